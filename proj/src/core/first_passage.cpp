#include "lookback/first_passage.hpp"

#include "lookback/errors.hpp"
#include "lookback/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lookback {

namespace {

void check_constants(const AlphaConstants& c) {
    if (!(c.alpha1 > 0.0) || !(c.alpha2 > 0.0) || !std::isfinite(c.alpha)) {
        throw ClosedFormUnavailable("exit-time constants are not positive");
    }
}

TailValue clamp_probability(double raw) {
    TailValue v;
    v.raw = raw;
    v.value = std::clamp(raw, 0.0, 1.0);
    v.clamped = v.value != raw;
    return v;
}

double sup_lambda(const SimPath& path) {
    double best = path.lambda[path.start];
    for (std::size_t c = path.start; c < path.n_steps(); ++c) best = std::max(best, path.lambda_cell_sup[c]);
    return best;
}

}  // namespace

AlphaConstants alpha_constants_hawkes(const HawkesParams& p, const JumpSpec& spec) {
    if (!p.closed_form_ok()) throw ClosedFormUnavailable("closed-form tails need eta < kappa ln 2");
    if (spec.depends_on_time() || spec.depends_on_mark()) {
        throw ClosedFormUnavailable("closed-form tails need a jump size constant in time");
    }
    const double j = spec.jump_at(0.0, 0.0);
    if (j == 0.0) throw ClosedFormUnavailable("closed-form tails need a nonzero jump size");
    AlphaConstants c;
    c.model = ModelKind::hawkes;
    c.jump = j;
    c.eta = p.eta;
    c.alpha2 = 1.0 / p.kappa;
    c.alpha1 = (std::log(c.alpha2 * p.kappa + 1.0) - c.alpha2 * p.eta) / j;
    c.alpha3 = c.alpha2;
    const double drift = p.mu - 0.5 * p.sigma1 * p.sigma1;
    c.alpha = drift * c.alpha1 + 0.5 * p.sigma1 * p.sigma1 * c.alpha1 * c.alpha1 + p.kappa * p.theta * c.alpha2;
    if (!(c.alpha1 > 0.0)) throw ClosedFormUnavailable("alpha1 <= 0 for this jump sign");
    return c;
}

AlphaConstants alpha_constants_cox(const CoxParams& p, const JumpSpec& spec, double alpha1) {
    if (!spec.constant_across_atoms()) throw ClosedFormUnavailable("closed-form tails need a single jump size");
    if (!(p.sigma2 > 0.0)) throw ClosedFormUnavailable("closed-form tails need sigma2 > 0");
    if (!(alpha1 > 1.0) || !std::isfinite(alpha1)) throw ConfigError("alpha1 must be a finite number above 1");
    AlphaConstants c;
    c.model = ModelKind::cox;
    c.jump = spec.atoms.empty() ? 0.0 : spec.jump_at(0.0, spec.atoms.front().z);
    c.alpha1 = alpha1;
    c.alpha2 = 2.0 * p.kappa * (p.theta + 1.0) / (p.sigma2 * p.sigma2);
    const double drift = p.mu - 0.5 * p.sigma1 * p.sigma1;
    c.alpha = drift * alpha1 + 0.5 * p.sigma1 * p.sigma1 * alpha1 * alpha1 + alpha1 * (mu_bar(spec, 0.0) - c.jump) +
              std::expm1(alpha1 * c.jump);
    return c;
}

AlphaConstants alpha_constants(const ModelConfig& model, double cox_alpha1) {
    if (model.kind() == ModelKind::cox) return alpha_constants_cox(model.cox(), model.jumps, cox_alpha1);
    return alpha_constants_hawkes(model.hawkes(), model.jumps);
}

double hawkes_identity_residual(const AlphaConstants& c, double kappa) {
    return std::exp(c.alpha1 * c.jump + c.alpha2 * c.eta) - (c.alpha2 * kappa + 1.0);
}

double cox_identity_residual(const AlphaConstants& c, const CoxParams& p) {
    return -c.alpha2 * p.kappa + 0.5 * p.sigma2 * p.sigma2 * c.alpha2 * c.alpha2 - c.alpha2 * p.kappa * p.theta;
}

double horizon_factor(const ExitTimeQuery& q, const TailOptions& options) {
    if (!(q.t < q.horizon)) throw Error("exit-time query needs t < T");
    return inverse_laplace([](std::complex<long double> u) { return 1.0L / u; }, q.horizon - q.t, options.method,
                           options.order);
}

TailValue bar_F_cox(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options) {
    check_constants(c);
    const double raw = horizon_factor(q, options) / c.alpha2 *
                       std::exp(-c.alpha1 * (q.b - q.x_t) - c.alpha2 * (q.e - q.lambda_t));
    return clamp_probability(raw);
}

TailValue tail_supX_hawkes(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options) {
    check_constants(c);
    const double raw =
        horizon_factor(q, options) / c.alpha2 * std::exp(-c.alpha1 * (q.b - q.x_t) + c.alpha2 * q.lambda_t);
    return clamp_probability(raw);
}

TailValue tail_supZ_hawkes(const ExitTimeQuery& q, const AlphaConstants& c, const TailOptions& options) {
    check_constants(c);
    const double boost = q.inserted ? c.alpha2 * c.eta : 0.0;
    const double raw = horizon_factor(q, options) / (c.alpha2 * c.alpha2 * c.alpha1) *
                       std::exp(c.alpha2 * q.lambda_t + boost - c.alpha1 * (q.m_t - q.k_jump - q.x_t));
    return {raw, raw, false};
}

double psi_jump(ModelKind model, const ExitTimeQuery& q, const AlphaConstants& c, double jump,
                const TailOptions& options) {
    check_constants(c);
    if (jump == 0.0) return 0.0;
    const double level = std::exp(c.alpha2 * q.lambda_t - c.alpha1 * (q.m_t - q.x_t)) * std::expm1(c.alpha1 * jump);
    const double factor = horizon_factor(q, options);
    // Cox: the x-integral of bar F between M_t - J and M_t, times the
    // r-integral e^{alpha2 lambda_t}/alpha2 over [0, inf).
    if (model == ModelKind::cox) return factor / (c.alpha2 * c.alpha2 * c.alpha1) * level;
    return factor / (c.alpha2 * c.alpha1) * level;
}

McEstimate mc_first_passage(const ModelConfig& model, const SimGrid& grid, double b, double e,
                            const McRunOptions& options) {
    if (options.n_paths == 0) throw ConfigError("mc_first_passage needs at least one path");
    const StreamId root = root_stream(options.seed, StreamPurpose::first_passage);
    const std::size_t n = options.n_paths;
    std::vector<unsigned char> hit(n, 0);
    const unsigned workers = std::max(1u, options.workers);
    const std::size_t chunk = 256;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;
    parallel_for(chunks, workers, [&](std::size_t ci) {
        PathSimulator sim(model, grid, sim_options);
        SimPath path;
        for (std::size_t i = ci * chunk; i < std::min(n, (ci + 1) * chunk); ++i) {
            sim.simulate(root.child(i), path);
            hit[i] = path.max_value() >= b && sup_lambda(path) >= e;
        }
    });
    std::size_t count = 0;
    for (auto h : hit) count += h;
    McEstimate est;
    est.n = n;
    est.value = static_cast<double>(count) / static_cast<double>(n);
    est.se = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(n));
    return est;
}

DynkinReport dynkin_martingale_check(const ModelConfig& model, const SimGrid& grid, const AlphaConstants& c,
                                     double b, double e, const std::vector<double>& checkpoints,
                                     const McRunOptions& options) {
    if (options.n_paths < 2) throw ConfigError("dynkin check needs at least two paths");
    std::vector<std::size_t> nodes;
    for (double s : checkpoints) {
        if (!(s >= 0.0) || s > grid.horizon) throw ConfigError("checkpoint outside [0, T]");
        nodes.push_back(static_cast<std::size_t>(std::llround(s / grid.dt())));
    }
    const std::size_t n = options.n_paths;
    const std::size_t q = nodes.size();
    auto u = [&](double x, double y) { return std::exp(-c.alpha1 * (b - x) - c.alpha2 * (e - y)); };

    const StreamId root = root_stream(options.seed, StreamPurpose::dynkin);
    std::vector<double> values(n * q);
    const std::size_t chunk = 256;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;
    parallel_for(chunks, std::max(1u, options.workers), [&](std::size_t ci) {
        PathSimulator sim(model, grid, sim_options);
        SimPath path;
        for (std::size_t i = ci * chunk; i < std::min(n, (ci + 1) * chunk); ++i) {
            sim.simulate(root.child(i), path);
            std::size_t stop = npos;
            for (std::size_t k = 0; k <= grid.n_steps; ++k) {
                if (path.x[k] >= b && path.lambda[k] >= e) {
                    stop = k;
                    break;
                }
            }
            for (std::size_t j = 0; j < q; ++j) {
                const std::size_t k = std::min(nodes[j], stop);
                values[i * q + j] = std::exp(-c.alpha * grid.time(k)) * u(path.x[k], path.lambda[k]);
            }
        }
    });

    PathSimulator probe(model, grid);
    const PathState s0 = probe.initial_state();
    DynkinReport report;
    report.u0 = u(s0.x, s0.lambda);
    for (std::size_t j = 0; j < q; ++j) {
        // Centre on u0 so that an unstopped t = 0 checkpoint gives exactly 0.
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += values[i * q + j] - report.u0;
        const double dev = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = values[i * q + j] - report.u0 - dev;
            ss += r * r;
        }
        DynkinPoint pt;
        pt.time = grid.time(nodes[j]);
        pt.node = nodes[j];
        pt.mean = report.u0 + dev;
        pt.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        pt.deviation = dev;
        const double z = pt.se > 0.0 ? std::abs(pt.deviation) / pt.se
                                     : (pt.deviation == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (std::abs(pt.deviation) >= report.max_deviation) {
            report.max_deviation = std::abs(pt.deviation);
            report.se_at_max = pt.se;
        }
        report.max_z = std::max(report.max_z, z);
        report.points.push_back(pt);
    }
    return report;
}

}  // namespace lookback
