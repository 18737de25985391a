#include "lookback/malliavin.hpp"

#include "lookback/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lookback {

namespace {

double floored(double lam, FloorMode floor, std::size_t idx) {
    if (lam > kLambdaFloor) return lam;
    if (floor == FloorMode::clamp) return kLambdaFloor;
    throw IntensityHitZero("intensity reached the floor at node " + std::to_string(idx));
}

void check_cox(const SimPath& path) {
    if (path.model != ModelKind::cox) throw Error("expected a Cox path");
}

}  // namespace

double cir_c_sigma(const CoxParams& p) {
    return 0.5 * p.kappa * p.theta - p.sigma2 * p.sigma2 / 8.0;
}

double d1_lambda_cir(const CoxParams& p, const SimPath& path, std::size_t s_idx, std::size_t t_idx,
                     FloorMode floor) {
    check_cox(path);
    if (s_idx > t_idx || t_idx > path.n_steps()) throw Error("d1_lambda_cir needs s <= t on the grid");
    const double c = cir_c_sigma(p);
    const double dt = path.grid.dt();
    double integral = 0.0;
    double left = 0.5 * p.kappa + c / floored(path.lambda[s_idx], floor, s_idx);
    for (std::size_t r = s_idx + 1; r <= t_idx; ++r) {
        const double right = 0.5 * p.kappa + c / floored(path.lambda[r], floor, r);
        integral += 0.5 * (left + right) * dt;
        left = right;
    }
    return p.sigma2 * std::sqrt(path.lambda[t_idx]) * std::exp(-integral);
}

double d1_max_cox(const CoxParams& p, const JumpSpec& spec, const SimPath& path, std::size_t t_idx,
                  FloorMode floor) {
    check_cox(path);
    const std::size_t tau = path.sup_tau_idx;
    if (tau == npos || t_idx > tau) return 0.0;
    if (!spec.enabled()) return 0.0;
    const double c = cir_c_sigma(p);
    const double dt = path.grid.dt();
    const bool timed = spec.depends_on_time();
    const double mb0 = mu_bar(spec, 0.0);

    // Walk s from t to tau, carrying the exponent of D_t lambda_s.
    double exponent = 0.0;
    double rate_left = 0.5 * p.kappa + c / floored(path.lambda[t_idx], floor, t_idx);
    double f_left = (timed ? mu_bar(spec, path.grid.time(t_idx)) : mb0) * p.sigma2 * std::sqrt(path.lambda[t_idx]);
    double total = 0.0;
    for (std::size_t s = t_idx + 1; s <= tau; ++s) {
        const double rate = 0.5 * p.kappa + c / floored(path.lambda[s], floor, s);
        exponent += 0.5 * (rate_left + rate) * dt;
        rate_left = rate;
        const double mb = timed ? mu_bar(spec, path.grid.time(s)) : mb0;
        const double f = mb * p.sigma2 * std::sqrt(path.lambda[s]) * std::exp(-exponent);
        total += 0.5 * (f_left + f) * dt;
        f_left = f;
    }
    return total;
}

double d1_max_price(double sigma1, const SimPath& path, std::size_t t_idx) {
    const std::size_t tau = path.sup_tau_idx;
    return (tau != npos && t_idx <= tau) ? sigma1 : 0.0;
}

double d1_max_hawkes(const HawkesParams& p, const SimPath& path, std::size_t t_idx) {
    return d1_max_price(p.sigma1, path, t_idx);
}

double d2_max_cox(const SimPath& path, std::size_t t_idx, double jump) {
    const double shifted = path.max_after(t_idx) + jump;
    return std::max(path.sup[t_idx], shifted) - path.sup.back();
}

double d2_max_cox(const JumpSpec& spec, const SimPath& path, std::size_t t_idx, double z) {
    return d2_max_cox(path, t_idx, spec.jump_at(path.grid.time(t_idx), z));
}

double d2_from_cascade(const SimPath& path, const PerturbedPath& pert) {
    if (!pert.inserted) return 0.0;
    return std::max(path.sup[pert.t_idx], pert.sup_after + pert.k_jump) - path.sup.back();
}

double d2_max_hawkes(PathSimulator& sim, const SimPath& path, std::size_t t_idx, double z) {
    PerturbedPath pert;
    sim.cascade(path, t_idx, z, pert);
    return d2_from_cascade(path, pert);
}

}  // namespace lookback
