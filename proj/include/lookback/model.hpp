#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace lookback {

enum class ModelKind { cox, hawkes };

const char* to_string(ModelKind kind);

// Log-price driven by W^S plus jumps from a Cox process whose intensity is a
// CIR diffusion driven by an independent Brownian motion W.
struct CoxParams {
    double mu = 0.0;
    double sigma1 = 0.2;
    double kappa = 1.0;
    double theta = 1.0;
    double sigma2 = 0.5;
    double lambda0 = 1.0;
    double s0 = 1.0;
    double horizon = 1.0;

    // 2 kappa theta > sigma2^2
    bool feller_ok() const { return 2.0 * kappa * theta > sigma2 * sigma2; }
};

// Log-price with a self-exciting exponential-kernel Hawkes jump component.
// The intensity decays toward theta at rate kappa and jumps by eta per event.
struct HawkesParams {
    double mu = 0.0;
    double sigma1 = 0.2;
    double kappa = 1.0;
    double theta = 0.5;
    double eta = 0.5;
    double lambda0 = 0.5;
    double s0 = 1.0;
    double horizon = 1.0;

    bool stable() const { return eta < kappa; }
    // The exit-time constants need eta < kappa ln 2 so that alpha1 > 0.
    bool closed_form_ok() const;
};

struct Atom {
    double z = 0.0;
    double w = 0.0;
};

// Jump size J(t, z). The families are declared so that properties such as
// "constant" or "independent of the mark" can be checked before use.
struct ConstJump {
    double value = 0.0;
};
struct LinearInMark {
    double slope = 0.0;  // J(t, z) = slope * z
};
struct TimeAffineJump {
    double value = 0.0;  // J(t) = value + slope * t
    double slope = 0.0;
};
using JumpFn = std::variant<ConstJump, LinearInMark, TimeAffineJump>;

// Finite discrete Levy measure nu = sum_i w_i delta_{z_i} plus the jump-size
// family. An empty atom list switches Cox jumps off.
struct JumpSpec {
    std::vector<Atom> atoms;
    JumpFn jump = ConstJump{0.0};

    double jump_at(double t, double z) const;
    double total_mass() const;
    bool enabled() const { return total_mass() > 0.0; }
    bool is_const() const { return std::holds_alternative<ConstJump>(jump); }
    bool depends_on_mark() const { return std::holds_alternative<LinearInMark>(jump); }
    bool depends_on_time() const;
    // True when J(t, z) is the same number for every atom and every t.
    bool constant_across_atoms() const;
};

// mu_bar(t) = sum_i w_i (exp(J(t, z_i)) - 1); exact because nu is discrete.
double mu_bar(const JumpSpec& spec, double t);

struct SimGrid {
    std::size_t n_steps = 256;
    double horizon = 1.0;

    SimGrid() = default;
    SimGrid(std::size_t steps, double t_end);

    double dt() const { return horizon / static_cast<double>(n_steps); }
    double time(std::size_t k) const;
    std::vector<double> times() const;
    // Index of the node equal to t (within a tiny tolerance), or npos.
    std::size_t node_index(double t) const;
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool feller_ok = false;
    bool stable = false;
    bool closed_form_ok = false;

    bool ok() const { return errors.empty(); }
    std::string summary() const;
};

ValidationReport validate_cox(const CoxParams& params);
ValidationReport validate_hawkes(const HawkesParams& params);
// Appends jump-measure problems to an existing report.
void validate_jumps(const JumpSpec& spec, ModelKind kind, ValidationReport& report);

// Throws InvalidParams listing every hard error.
void require_valid(const ValidationReport& report);

struct ModelConfig {
    std::variant<CoxParams, HawkesParams> params;
    JumpSpec jumps;

    ModelKind kind() const {
        return std::holds_alternative<CoxParams>(params) ? ModelKind::cox : ModelKind::hawkes;
    }
    const CoxParams& cox() const { return std::get<CoxParams>(params); }
    const HawkesParams& hawkes() const { return std::get<HawkesParams>(params); }

    double mu() const;
    double sigma1() const;
    double kappa() const;
    double theta() const;
    double lambda0() const;
    double s0() const;
    double horizon() const;

    ValidationReport validate() const;
    // True when the log-price has no jump component at all.
    bool jump_free() const;
};

}  // namespace lookback
