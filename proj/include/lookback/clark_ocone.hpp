#pragma once

#include "lookback/first_passage.hpp"
#include "lookback/malliavin.hpp"
#include "lookback/model.hpp"
#include "lookback/path_sim.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace lookback {

enum class IntegrandMode { closed_form, nested_mc, both };
// theorem: the W integrand enters with a minus sign. raw: with a plus sign.
enum class SignConvention { theorem, raw };
enum class IntegrandMethod { closed_form, nested_mc };

IntegrandMode parse_integrand_mode(std::string_view name);
SignConvention parse_sign_convention(std::string_view name);
const char* to_string(IntegrandMode mode);
const char* to_string(SignConvention sign);
const char* to_string(IntegrandMethod method);

struct CoOptions {
    std::size_t n_paths = 200;
    std::size_t n_inner = 256;
    std::size_t ef_paths = 20000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    IntegrandMode mode = IntegrandMode::nested_mc;
    SignConvention sign = SignConvention::theorem;
    FloorMode floor = FloorMode::error;
    Monitoring monitoring = Monitoring::bridge;
    // Include sigma1 P(M_{t,T} >= M_t) dW^S for Cox paths.
    bool cox_price_term = true;
    double cox_alpha1 = kDefaultCoxAlpha1;
    TailOptions tail;
};

struct EfEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

// Sample mean of M_T over fresh paths.
EfEstimate estimate_ef(const ModelConfig& model, const SimGrid& grid, const CoOptions& options);

struct IntegrandEstimate {
    double t = 0.0;
    double z = 0.0;
    double value = 0.0;
    double se = 0.0;
    IntegrandMethod method = IntegrandMethod::nested_mc;
    std::size_t n_inner = 0;
};

// Every integrand at one node. Cox: psi has one entry per atom. Hawkes: one
// entry valid for every ordinate z in (0, lambda_t].
struct NodeIntegrands {
    IntegrandEstimate phi_price;
    IntegrandEstimate phi_intensity;  // magnitude; zero for Hawkes
    std::vector<IntegrandEstimate> psi;
    std::vector<IntegrandEstimate> psi_closed;  // filled for closed_form and both
};

// sigma1 P(sup_{s <= h} (nu s + sigma1 W_s) >= gap) for a drifted Brownian motion.
double drifted_bm_phi(double drift, double sigma1, double gap, double remaining);

class IntegrandEngine {
public:
    IntegrandEngine(ModelConfig model, SimGrid grid, CoOptions options);

    // Continuations branched from node k of `base`, inner streams child(j) of `inner`.
    NodeIntegrands nested(const SimPath& base, std::size_t k, StreamId inner);
    // Closed-form psi at node k (needs valid exit-time constants).
    std::vector<IntegrandEstimate> closed_psi(const SimPath& base, std::size_t k) const;
    // Closed-form phi for jump-free models.
    IntegrandEstimate closed_phi(const SimPath& base, std::size_t k) const;

    // Integrands used by the reconstruction under the configured mode.
    NodeIntegrands evaluate(const SimPath& base, std::size_t k, StreamId inner);

    bool needs_nesting() const;
    const ModelConfig& model() const { return model_; }

private:
    ModelConfig model_;
    SimGrid grid_;
    CoOptions options_;
    PathSimulator sim_;
    SimPath cont_;
    PerturbedPath pert_;
    bool have_constants_ = false;
    AlphaConstants constants_;
};

IntegrandEstimate brownian_integrand(const ModelConfig& model, const SimGrid& grid, const SimPath& base,
                                     std::size_t t_idx, StreamId inner, const CoOptions& options);

struct JumpIntegrand {
    bool has_closed = false;
    bool has_nested = false;
    IntegrandEstimate closed;
    IntegrandEstimate nested;
};

// Cox: z is an atom. Hawkes: z is a thinning ordinate.
JumpIntegrand jump_integrand(const ModelConfig& model, const SimGrid& grid, const SimPath& base, std::size_t t_idx,
                             double z, StreamId inner, const CoOptions& options);

struct PathResidual {
    std::size_t path_id = 0;
    double f = 0.0;
    double f_hat = 0.0;
    double residual = 0.0;
    double f_hat_alt = 0.0;  // opposite sign convention for the W term
};

struct ClarkOconeReport {
    EfEstimate ef;
    std::vector<PathResidual> rows;
    double resid_mean = 0.0;
    double resid_se = 0.0;
    double resid_var = 0.0;
    double resid_var_alt = 0.0;
    double corr = 0.0;
    // Mean |closed - nested| over all psi evaluations (mode both only).
    double psi_discrepancy = 0.0;
    SignConvention sign = SignConvention::theorem;
    IntegrandMode mode = IntegrandMode::nested_mc;
    std::size_t n_steps = 0;
    std::size_t n_paths = 0;
    std::size_t n_inner = 0;
    StreamId ef_stream;
    StreamId outer_stream;
    StreamId inner_stream;
};

ClarkOconeReport reconstruct(const ModelConfig& model, const SimGrid& grid, const CoOptions& options);

struct HedgeRow {
    double t = 0.0;
    double phi = 0.0;            // integrand against W^S (the traded noise)
    double phi_intensity = 0.0;  // signed integrand against W
    double psi_weighted = 0.0;   // Cox: sum_i psi(t, z_i) w_i. Hawkes: psi(t) lambda_t
};

// Integrands along the realised outer path `path_id`.
std::vector<HedgeRow> hedge_table(const ModelConfig& model, const SimGrid& grid, const CoOptions& options,
                                  std::size_t path_id = 0);

struct BootstrapResult {
    double observed = 0.0;  // var(fine) - var(coarse)
    double lower = 0.0;     // 5th percentile
    double upper = 0.0;     // 95th percentile
    bool pass = false;      // lower <= 0
};

// Is the residual variance at the finer grid no larger than at the coarser one?
BootstrapResult bootstrap_variance_decrease(const std::vector<double>& coarse, const std::vector<double>& fine,
                                            std::size_t resamples, std::uint64_t seed);

}  // namespace lookback
