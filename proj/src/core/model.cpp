#include "lookback/model.hpp"

#include "lookback/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

namespace lookback {

const char* to_string(ModelKind kind) {
    return kind == ModelKind::cox ? "cox" : "hawkes";
}

bool HawkesParams::closed_form_ok() const {
    return eta < kappa * std::log(2.0);
}

double JumpSpec::jump_at(double t, double z) const {
    return std::visit(
        [&](const auto& fn) -> double {
            using T = std::decay_t<decltype(fn)>;
            if constexpr (std::is_same_v<T, ConstJump>) {
                return fn.value;
            } else if constexpr (std::is_same_v<T, LinearInMark>) {
                return fn.slope * z;
            } else {
                return fn.value + fn.slope * t;
            }
        },
        jump);
}

double JumpSpec::total_mass() const {
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.w;
    return mass;
}

bool JumpSpec::depends_on_time() const {
    if (const auto* fn = std::get_if<TimeAffineJump>(&jump)) return fn->slope != 0.0;
    return false;
}

bool JumpSpec::constant_across_atoms() const {
    if (depends_on_time()) return false;
    if (!depends_on_mark()) return true;
    for (const auto& a : atoms) {
        if (a.w > 0.0 && jump_at(0.0, a.z) != jump_at(0.0, atoms.front().z)) return false;
    }
    return true;
}

double mu_bar(const JumpSpec& spec, double t) {
    double acc = 0.0;
    for (const auto& a : spec.atoms) acc += a.w * std::expm1(spec.jump_at(t, a.z));
    return acc;
}

SimGrid::SimGrid(std::size_t steps, double t_end) : n_steps(steps), horizon(t_end) {
    if (steps == 0) throw ConfigError("grid.n_steps must be at least 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("grid horizon must be positive");
}

double SimGrid::time(std::size_t k) const {
    if (k == n_steps) return horizon;
    return horizon * static_cast<double>(k) / static_cast<double>(n_steps);
}

std::vector<double> SimGrid::times() const {
    std::vector<double> out(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) out[k] = time(k);
    return out;
}

std::size_t SimGrid::node_index(double t) const {
    const double pos = t / dt();
    const double k = std::round(pos);
    if (k < 0.0 || k > static_cast<double>(n_steps)) return std::numeric_limits<std::size_t>::max();
    if (std::abs(pos - k) > 1e-9) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(k);
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) os << (i ? "; " : "") << errors[i];
    return os.str();
}

namespace {

void need_positive(double v, const char* name, ValidationReport& r) {
    if (!(v > 0.0) || !std::isfinite(v)) r.errors.push_back(std::string(name) + " must be > 0");
}

void need_finite(double v, const char* name, ValidationReport& r) {
    if (!std::isfinite(v)) r.errors.push_back(std::string(name) + " must be finite");
}

}  // namespace

ValidationReport validate_cox(const CoxParams& p) {
    ValidationReport r;
    need_finite(p.mu, "mu", r);
    need_positive(p.sigma1, "sigma1", r);
    need_positive(p.sigma2, "sigma2", r);
    need_positive(p.kappa, "kappa", r);
    need_positive(p.theta, "theta", r);
    need_positive(p.s0, "s0", r);
    need_positive(p.horizon, "T", r);
    if (!(p.lambda0 >= 0.0) || !std::isfinite(p.lambda0)) r.errors.push_back("lambda0 must be >= 0");
    r.feller_ok = p.feller_ok();
    if (!r.feller_ok) {
        r.warnings.push_back("Feller condition 2*kappa*theta > sigma2^2 violated; "
                             "inverse-moment bounds on the intensity are not guaranteed");
    }
    return r;
}

ValidationReport validate_hawkes(const HawkesParams& p) {
    ValidationReport r;
    need_finite(p.mu, "mu", r);
    need_positive(p.sigma1, "sigma1", r);
    need_positive(p.kappa, "kappa", r);
    need_positive(p.theta, "theta", r);
    need_positive(p.s0, "s0", r);
    need_positive(p.horizon, "T", r);
    if (!(p.eta >= 0.0) || !std::isfinite(p.eta)) r.errors.push_back("eta must be >= 0");
    if (!(p.lambda0 >= 0.0) || !std::isfinite(p.lambda0)) r.errors.push_back("lambda0 must be >= 0");
    r.stable = p.stable();
    r.closed_form_ok = p.closed_form_ok();
    if (!r.stable) r.warnings.push_back("eta >= kappa: intensity is not mean-reverting");
    if (!r.closed_form_ok) r.warnings.push_back("eta >= kappa*ln2: closed-form tails unavailable");
    return r;
}

void validate_jumps(const JumpSpec& spec, ModelKind kind, ValidationReport& r) {
    for (const auto& a : spec.atoms) {
        if (!std::isfinite(a.z) || a.z == 0.0) r.errors.push_back("nu atoms must have finite nonzero z");
        if (!(a.w >= 0.0) || !std::isfinite(a.w)) r.errors.push_back("nu weights must be finite and >= 0");
    }
    std::visit(
        [&](const auto& fn) {
            using T = std::decay_t<decltype(fn)>;
            if constexpr (std::is_same_v<T, TimeAffineJump>) {
                if (!std::isfinite(fn.value) || !std::isfinite(fn.slope)) r.errors.push_back("jump value must be finite");
            } else if constexpr (std::is_same_v<T, LinearInMark>) {
                if (!std::isfinite(fn.slope)) r.errors.push_back("jump value must be finite");
            } else {
                if (!std::isfinite(fn.value)) r.errors.push_back("jump value must be finite");
            }
        },
        spec.jump);
    if (kind == ModelKind::hawkes && spec.depends_on_mark()) {
        r.errors.push_back("hawkes jumps cannot depend on the mark (use const or time_affine)");
    }
}

void require_valid(const ValidationReport& report) {
    if (!report.ok()) throw InvalidParams(report.summary());
}

double ModelConfig::mu() const {
    return std::visit([](const auto& p) { return p.mu; }, params);
}
double ModelConfig::sigma1() const {
    return std::visit([](const auto& p) { return p.sigma1; }, params);
}
double ModelConfig::kappa() const {
    return std::visit([](const auto& p) { return p.kappa; }, params);
}
double ModelConfig::theta() const {
    return std::visit([](const auto& p) { return p.theta; }, params);
}
double ModelConfig::lambda0() const {
    return std::visit([](const auto& p) { return p.lambda0; }, params);
}
double ModelConfig::s0() const {
    return std::visit([](const auto& p) { return p.s0; }, params);
}
double ModelConfig::horizon() const {
    return std::visit([](const auto& p) { return p.horizon; }, params);
}

ValidationReport ModelConfig::validate() const {
    ValidationReport r = kind() == ModelKind::cox ? validate_cox(cox()) : validate_hawkes(hawkes());
    validate_jumps(jumps, kind(), r);
    return r;
}

bool ModelConfig::jump_free() const {
    if (kind() == ModelKind::cox) {
        if (!jumps.enabled()) return true;
        for (const auto& a : jumps.atoms) {
            if (a.w > 0.0 && (jumps.depends_on_time() || jumps.jump_at(0.0, a.z) != 0.0)) return false;
        }
        return true;
    }
    return jumps.is_const() && jumps.jump_at(0.0, 0.0) == 0.0;
}

}  // namespace lookback
