#pragma once

#include "lookback/laplace.hpp"
#include "lookback/model.hpp"
#include "lookback/path_sim.hpp"

#include <cstdint>
#include <vector>

namespace lookback {

struct AlphaConstants {
    ModelKind model = ModelKind::hawkes;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;  // Hawkes only; zero for Cox
    double alpha = 0.0;
    double jump = 0.0;    // the constant J the constants were built for
    double eta = 0.0;     // Hawkes only
};

inline constexpr double kDefaultCoxAlpha1 = 2.0;

// alpha2 = 1/kappa, alpha1 = (ln(alpha2 kappa + 1) - alpha2 eta)/J, alpha3 = alpha2.
AlphaConstants alpha_constants_hawkes(const HawkesParams& params, const JumpSpec& spec);
// alpha2 = 2 kappa (theta + 1)/sigma2^2, alpha1 > 1 chosen by the caller.
AlphaConstants alpha_constants_cox(const CoxParams& params, const JumpSpec& spec,
                                   double alpha1 = kDefaultCoxAlpha1);
AlphaConstants alpha_constants(const ModelConfig& model, double cox_alpha1 = kDefaultCoxAlpha1);

// exp(alpha1 J + alpha2 eta) - (alpha2 kappa + 1)
double hawkes_identity_residual(const AlphaConstants& c, double kappa);
// -alpha2 kappa + sigma2^2 alpha2^2 / 2 - alpha2 kappa theta
double cox_identity_residual(const AlphaConstants& c, const CoxParams& params);

struct ExitTimeQuery {
    double t = 0.0;
    double horizon = 1.0;
    double b = 0.0;         // threshold for X (or Z)
    double e = 0.0;         // threshold for lambda
    double x_t = 0.0;       // X_t, or Z_t for the perturbed process
    double lambda_t = 0.0;
    double m_t = 0.0;
    double k_jump = 0.0;    // K_{t,z}
    bool inserted = false;  // 0 < z <= lambda_t
};

struct TailValue {
    double value = 0.0;  // clamped to [0, 1] when the quantity is a probability
    double raw = 0.0;
    bool clamped = false;
};

struct TailOptions {
    LaplaceMethod method = LaplaceMethod::gaver_stehfest;
    int order = 0;
};

// L^{-1}(1/u)(T - t); throws when t >= T.
double horizon_factor(const ExitTimeQuery& q, const TailOptions& options = {});

TailValue bar_F_cox(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options = {});
TailValue tail_supX_hawkes(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options = {});
// Integrated tail of sup Z from M_t - K: an expectation, not a probability, so never clamped.
TailValue tail_supZ_hawkes(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options = {});

// Conditional expectation of D2 F from the closed-form tails. Cox: J is the
// jump of the atom; Hawkes: J is K_{t,z}.
double psi_jump(ModelKind model, const ExitTimeQuery& q, const AlphaConstants& c, double jump,
                const TailOptions& options = {});

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

struct McRunOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Monitoring monitoring = Monitoring::bridge;
};

// P(sup_{[0,T]} X >= b and sup_{[0,T]} lambda >= e) with a binomial SE.
McEstimate mc_first_passage(const ModelConfig& model, const SimGrid& grid, double b, double e,
                            const McRunOptions& options);

struct DynkinPoint {
    double time = 0.0;
    std::size_t node = 0;
    double mean = 0.0;
    double se = 0.0;
    double deviation = 0.0;  // mean - u(state_0)
};

struct DynkinReport {
    double u0 = 0.0;
    std::vector<DynkinPoint> points;
    double max_deviation = 0.0;
    double se_at_max = 0.0;
    // Largest |deviation| / se over the checkpoints (0 where se is 0 and deviation is 0).
    double max_z = 0.0;
};

// Estimates E[e^{-alpha (s ^ tau)} u(X, lambda)(s ^ tau)] with
// u(x, y) = exp(-alpha1 (b - x) - alpha2 (e - y)) and tau the first node
// where X >= b and lambda >= e. Checkpoints are snapped to grid nodes.
DynkinReport dynkin_martingale_check(const ModelConfig& model, const SimGrid& grid, const AlphaConstants& c,
                                     double b, double e, const std::vector<double>& checkpoints,
                                     const McRunOptions& options);

}  // namespace lookback
