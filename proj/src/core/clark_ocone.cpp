#include "lookback/clark_ocone.hpp"

#include "lookback/errors.hpp"
#include "lookback/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lookback {

namespace {

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double se() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

IntegrandEstimate estimate(double t, double z, const Moments& m, std::size_t inner) {
    return {t, z, m.mean(), m.se(), IntegrandMethod::nested_mc, inner};
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

IntegrandMode parse_integrand_mode(std::string_view name) {
    if (name == "closed" || name == "closed_form") return IntegrandMode::closed_form;
    if (name == "nested" || name == "nested_mc") return IntegrandMode::nested_mc;
    if (name == "both") return IntegrandMode::both;
    throw ConfigError("unknown integrand mode '" + std::string(name) + "'");
}

SignConvention parse_sign_convention(std::string_view name) {
    if (name == "theorem") return SignConvention::theorem;
    if (name == "raw") return SignConvention::raw;
    throw ConfigError("unknown sign convention '" + std::string(name) + "'");
}

const char* to_string(IntegrandMode mode) {
    switch (mode) {
        case IntegrandMode::closed_form: return "closed";
        case IntegrandMode::nested_mc: return "nested";
        case IntegrandMode::both: return "both";
    }
    return "?";
}

const char* to_string(SignConvention sign) {
    return sign == SignConvention::theorem ? "theorem" : "raw";
}

const char* to_string(IntegrandMethod method) {
    return method == IntegrandMethod::closed_form ? "closed_form" : "nested_mc";
}

EfEstimate estimate_ef(const ModelConfig& model, const SimGrid& grid, const CoOptions& options) {
    if (options.ef_paths < 2) throw ConfigError("estimate_ef needs at least two paths");
    const std::size_t n = options.ef_paths;
    const StreamId root = root_stream(options.seed, StreamPurpose::expectation);
    std::vector<double> f(n);
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;
    const std::size_t chunk = 256;
    parallel_for((n + chunk - 1) / chunk, std::max(1u, options.workers), [&](std::size_t ci) {
        PathSimulator sim(model, grid, sim_options);
        SimPath path;
        for (std::size_t i = ci * chunk; i < std::min(n, (ci + 1) * chunk); ++i) {
            sim.simulate(root.child(i), path);
            f[i] = path.max_value();
        }
    });
    EfEstimate out;
    out.n = n;
    out.value = sample_mean(f);
    out.se = std::sqrt(sample_var(f) / static_cast<double>(n));
    return out;
}

double drifted_bm_phi(double drift, double sigma1, double gap, double remaining) {
    if (gap <= 0.0) return sigma1;
    if (!(remaining > 0.0) || sigma1 == 0.0) {
        return drift * remaining >= gap ? sigma1 : 0.0;
    }
    const double sd = sigma1 * std::sqrt(remaining);
    const double a = normal_cdf((-gap + drift * remaining) / sd);
    const double tilt = 2.0 * drift * gap / (sigma1 * sigma1);
    const double tail = normal_cdf((-gap - drift * remaining) / sd);
    const double b = tail > 0.0 ? std::exp(tilt + std::log(tail)) : 0.0;
    return sigma1 * std::min(1.0, a + b);
}

IntegrandEngine::IntegrandEngine(ModelConfig model, SimGrid grid, CoOptions options)
    : model_(std::move(model)), grid_(grid), options_(options), sim_(model_, grid_, [&] {
          SimOptions s;
          s.monitoring = options.monitoring;
          s.record_rejected = false;
          return s;
      }()) {
    if (options_.mode != IntegrandMode::nested_mc && !model_.jump_free()) {
        try {
            constants_ = alpha_constants(model_, options_.cox_alpha1);
            have_constants_ = true;
        } catch (const NumericError&) {
            if (options_.mode == IntegrandMode::closed_form) throw;
        }
    }
}

bool IntegrandEngine::needs_nesting() const {
    return options_.mode != IntegrandMode::closed_form || !model_.jump_free();
}

NodeIntegrands IntegrandEngine::nested(const SimPath& base, std::size_t k, StreamId inner) {
    const double t = grid_.time(k);
    const PathState state = base.state_at(k);
    const std::size_t n_inner = options_.n_inner;
    if (n_inner == 0) throw ConfigError("nested integrands need at least one inner path");
    const double sigma1 = model_.sigma1();
    const bool cox = model_.kind() == ModelKind::cox;
    const JumpSpec& spec = model_.jumps;

    Moments price, intensity;
    const std::size_t n_psi = cox ? spec.atoms.size() : 1;
    std::vector<Moments> psi(n_psi);
    std::vector<double> jumps(n_psi, 0.0);
    if (cox) {
        for (std::size_t i = 0; i < n_psi; ++i) jumps[i] = spec.jump_at(t, spec.atoms[i].z);
    }
    const bool cox_d1 = cox && spec.enabled() && !model_.jump_free();
    const bool hawkes_d2 = !cox && state.lambda > 0.0 && !(spec.is_const() && spec.jump_at(t, 0.0) == 0.0);

    for (std::size_t j = 0; j < n_inner; ++j) {
        sim_.simulate_tail(k, state, inner.child(j), cont_);
        price.add(d1_max_price(1.0, cont_, k));
        if (cox) {
            intensity.add(cox_d1 ? d1_max_cox(model_.cox(), spec, cont_, k, options_.floor) : 0.0);
            for (std::size_t i = 0; i < n_psi; ++i) psi[i].add(d2_max_cox(cont_, k, jumps[i]));
        } else if (hawkes_d2) {
            sim_.cascade(cont_, k, state.lambda, pert_);
            psi[0].add(d2_from_cascade(cont_, pert_));
        } else {
            psi[0].add(0.0);
        }
    }

    NodeIntegrands out;
    // Scaled after averaging so that 0 <= phi <= sigma1 holds exactly.
    out.phi_price = estimate(t, 0.0, price, n_inner);
    out.phi_price.value *= sigma1;
    out.phi_price.se *= sigma1;
    out.phi_intensity = estimate(t, 0.0, intensity, n_inner);
    for (std::size_t i = 0; i < n_psi; ++i) {
        out.psi.push_back(estimate(t, cox ? spec.atoms[i].z : state.lambda, psi[i], n_inner));
    }
    return out;
}

std::vector<IntegrandEstimate> IntegrandEngine::closed_psi(const SimPath& base, std::size_t k) const {
    const double t = grid_.time(k);
    const bool cox = model_.kind() == ModelKind::cox;
    const JumpSpec& spec = model_.jumps;
    std::vector<IntegrandEstimate> out;
    auto push = [&](double z, double v) { out.push_back({t, z, v, 0.0, IntegrandMethod::closed_form, 0}); };
    // No horizon left (or no jumps): an insertion cannot move the maximum.
    if (model_.jump_free() || k >= grid_.n_steps) {
        if (cox) {
            for (const auto& a : spec.atoms) push(a.z, 0.0);
        } else {
            push(base.lambda[k], 0.0);
        }
        return out;
    }
    if (!have_constants_) throw ClosedFormUnavailable("no closed-form constants for this model");
    ExitTimeQuery q;
    q.t = t;
    q.horizon = grid_.horizon;
    q.x_t = base.x[k];
    q.lambda_t = base.lambda[k];
    q.m_t = base.sup[k];
    if (cox) {
        for (const auto& a : spec.atoms) push(a.z, psi_jump(ModelKind::cox, q, constants_, spec.jump_at(t, a.z), options_.tail));
    } else {
        const bool inside = base.lambda[k] > 0.0;
        q.inserted = inside;
        q.k_jump = inside ? spec.jump_at(t, 0.0) : 0.0;
        push(base.lambda[k], psi_jump(ModelKind::hawkes, q, constants_, q.k_jump, options_.tail));
    }
    return out;
}

IntegrandEstimate IntegrandEngine::closed_phi(const SimPath& base, std::size_t k) const {
    if (!model_.jump_free()) throw ClosedFormUnavailable("closed-form phi needs a jump-free model");
    const double drift = model_.mu() - 0.5 * model_.sigma1() * model_.sigma1();
    const double gap = base.sup[k] - base.x[k];
    const double v = drifted_bm_phi(drift, model_.sigma1(), gap, grid_.horizon - grid_.time(k));
    return {grid_.time(k), 0.0, v, 0.0, IntegrandMethod::closed_form, 0};
}

NodeIntegrands IntegrandEngine::evaluate(const SimPath& base, std::size_t k, StreamId inner) {
    NodeIntegrands out;
    if (options_.mode == IntegrandMode::closed_form && model_.jump_free()) {
        out.phi_price = closed_phi(base, k);
        out.phi_intensity = {grid_.time(k), 0.0, 0.0, 0.0, IntegrandMethod::closed_form, 0};
        out.psi = closed_psi(base, k);
        return out;
    }
    out = nested(base, k, inner);
    if (options_.mode == IntegrandMode::closed_form) {
        out.psi = closed_psi(base, k);
    } else if (options_.mode == IntegrandMode::both && (have_constants_ || model_.jump_free())) {
        out.psi_closed = closed_psi(base, k);
    }
    return out;
}

IntegrandEstimate brownian_integrand(const ModelConfig& model, const SimGrid& grid, const SimPath& base,
                                     std::size_t t_idx, StreamId inner, const CoOptions& options) {
    IntegrandEngine engine(model, grid, options);
    if (options.mode == IntegrandMode::closed_form && model.jump_free()) return engine.closed_phi(base, t_idx);
    const NodeIntegrands node = engine.nested(base, t_idx, inner);
    return model.kind() == ModelKind::hawkes ? node.phi_price : node.phi_intensity;
}

JumpIntegrand jump_integrand(const ModelConfig& model, const SimGrid& grid, const SimPath& base, std::size_t t_idx,
                             double z, StreamId inner, const CoOptions& options) {
    const bool cox = model.kind() == ModelKind::cox;
    const double t = grid.time(t_idx);
    std::size_t atom = 0;
    if (cox) {
        while (atom < model.jumps.atoms.size() && model.jumps.atoms[atom].z != z) ++atom;
        if (atom == model.jumps.atoms.size()) throw ConfigError("z is not an atom of nu");
    }
    const bool off_strip = !cox && !(z > 0.0 && z <= base.lambda[t_idx]);

    JumpIntegrand out;
    IntegrandEngine engine(model, grid, options);
    if (options.mode != IntegrandMode::nested_mc) {
        out.has_closed = true;
        out.closed = off_strip ? IntegrandEstimate{t, z, 0.0, 0.0, IntegrandMethod::closed_form, 0}
                               : engine.closed_psi(base, t_idx)[atom];
        out.closed.z = z;
    }
    if (options.mode != IntegrandMode::closed_form) {
        out.has_nested = true;
        if (off_strip) {
            out.nested = {t, z, 0.0, 0.0, IntegrandMethod::nested_mc, options.n_inner};
        } else {
            out.nested = engine.nested(base, t_idx, inner).psi[atom];
            out.nested.z = z;
        }
    }
    return out;
}

ClarkOconeReport reconstruct(const ModelConfig& model, const SimGrid& grid, const CoOptions& options) {
    if (options.n_paths < 2) throw ConfigError("reconstruction needs at least two outer paths");
    ClarkOconeReport report;
    report.mode = options.mode;
    report.sign = options.sign;
    report.n_steps = grid.n_steps;
    report.n_paths = options.n_paths;
    report.n_inner = options.n_inner;
    report.ef_stream = root_stream(options.seed, StreamPurpose::expectation);
    report.outer_stream = root_stream(options.seed, StreamPurpose::outer_path);
    report.inner_stream = root_stream(options.seed, StreamPurpose::inner_path);
    report.ef = estimate_ef(model, grid, options);

    const bool cox = model.kind() == ModelKind::cox;
    const JumpSpec& spec = model.jumps;
    const double sign = options.sign == SignConvention::theorem ? -1.0 : 1.0;
    const double dt = grid.dt();
    const std::size_t n = grid.n_steps;
    const bool price_term = !cox || options.cox_price_term;

    std::vector<PathResidual> rows(options.n_paths);
    std::vector<double> discrepancy(options.n_paths, 0.0);
    std::vector<std::size_t> discrepancy_n(options.n_paths, 0);
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;

    parallel_for(options.n_paths, std::max(1u, options.workers), [&](std::size_t p) {
        PathSimulator sim(model, grid, sim_options);
        IntegrandEngine engine(model, grid, options);
        const SimPath base = sim.simulate(report.outer_stream.child(p));
        const StreamId inner = report.inner_stream.child(p);

        double brownian = 0.0;
        double intensity = 0.0;
        double jumps = 0.0;
        std::vector<std::vector<double>> psi(n);
        for (std::size_t k = 0; k < n; ++k) {
            const NodeIntegrands node = engine.evaluate(base, k, inner.child(k));
            if (price_term) brownian += node.phi_price.value * base.w_s_incr[k];
            intensity += node.phi_intensity.value * base.w_incr[k];
            psi[k].reserve(node.psi.size());
            for (const auto& e : node.psi) psi[k].push_back(e.value);
            for (std::size_t i = 0; i < node.psi_closed.size() && i < node.psi.size(); ++i) {
                discrepancy[p] += std::abs(node.psi_closed[i].value - node.psi[i].value);
                ++discrepancy_n[p];
            }
            // Compensator of the jump measure over the cell.
            if (cox) {
                for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
                    jumps -= psi[k][i] * base.lambda[k] * spec.atoms[i].w * dt;
                }
            } else {
                jumps -= psi[k][0] * base.lambda_integral[k];
            }
        }
        for (const auto& ev : base.events) {
            if (!ev.accepted) continue;
            std::size_t i = 0;
            if (cox) {
                while (i + 1 < spec.atoms.size() && spec.atoms[i].z != ev.mark) ++i;
            }
            jumps += psi[ev.cell][i];
        }
        PathResidual& row = rows[p];
        row.path_id = p;
        row.f = base.max_value();
        row.f_hat = report.ef.value + brownian + sign * intensity + jumps;
        row.f_hat_alt = report.ef.value + brownian - sign * intensity + jumps;
        row.residual = row.f - row.f_hat;
    });

    report.rows = std::move(rows);
    std::vector<double> resid, resid_alt, f, fh;
    for (const auto& r : report.rows) {
        resid.push_back(r.residual);
        resid_alt.push_back(r.f - r.f_hat_alt);
        f.push_back(r.f);
        fh.push_back(r.f_hat);
    }
    report.resid_mean = sample_mean(resid);
    report.resid_var = sample_var(resid);
    report.resid_var_alt = sample_var(resid_alt);
    report.resid_se = std::sqrt(report.resid_var / static_cast<double>(resid.size()) + report.ef.se * report.ef.se);
    const double mf = sample_mean(f), mh = sample_mean(fh);
    double sfh = 0.0, sff = 0.0, shh = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sfh += (f[i] - mf) * (fh[i] - mh);
        sff += (f[i] - mf) * (f[i] - mf);
        shh += (fh[i] - mh) * (fh[i] - mh);
    }
    report.corr = (sff > 0.0 && shh > 0.0) ? sfh / std::sqrt(sff * shh) : (sff == shh ? 1.0 : 0.0);
    double dsum = 0.0;
    std::size_t dn = 0;
    for (std::size_t p = 0; p < discrepancy.size(); ++p) {
        dsum += discrepancy[p];
        dn += discrepancy_n[p];
    }
    report.psi_discrepancy = dn ? dsum / static_cast<double>(dn) : 0.0;
    return report;
}

std::vector<HedgeRow> hedge_table(const ModelConfig& model, const SimGrid& grid, const CoOptions& options,
                                  std::size_t path_id) {
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;
    PathSimulator sim(model, grid, sim_options);
    IntegrandEngine engine(model, grid, options);
    const SimPath base = sim.simulate(root_stream(options.seed, StreamPurpose::outer_path).child(path_id));
    const StreamId inner = root_stream(options.seed, StreamPurpose::inner_path).child(path_id);
    const double sign = options.sign == SignConvention::theorem ? -1.0 : 1.0;
    const bool cox = model.kind() == ModelKind::cox;

    std::vector<HedgeRow> rows;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const NodeIntegrands node = engine.evaluate(base, k, inner.child(k));
        HedgeRow row;
        row.t = grid.time(k);
        row.phi = (!cox || options.cox_price_term) ? node.phi_price.value : 0.0;
        row.phi_intensity = sign * node.phi_intensity.value;
        if (cox) {
            for (std::size_t i = 0; i < node.psi.size(); ++i) row.psi_weighted += node.psi[i].value * model.jumps.atoms[i].w;
        } else {
            row.psi_weighted = node.psi[0].value * base.lambda[k];
        }
        rows.push_back(row);
    }
    return rows;
}

BootstrapResult bootstrap_variance_decrease(const std::vector<double>& coarse, const std::vector<double>& fine,
                                            std::size_t resamples, std::uint64_t seed) {
    if (coarse.size() < 2 || fine.size() < 2 || resamples == 0) throw ConfigError("bootstrap needs data");
    BootstrapResult out;
    out.observed = sample_var(fine) - sample_var(coarse);
    const StreamId root = root_stream(seed, StreamPurpose::bootstrap);
    std::vector<double> diffs(resamples);
    std::vector<double> a(coarse.size()), b(fine.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        RandomStream rng(root.child(r));
        for (auto& v : a) v = coarse[static_cast<std::size_t>(rng.uniform() * static_cast<double>(coarse.size()))];
        for (auto& v : b) v = fine[static_cast<std::size_t>(rng.uniform() * static_cast<double>(fine.size()))];
        diffs[r] = sample_var(b) - sample_var(a);
    }
    std::sort(diffs.begin(), diffs.end());
    const auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(resamples - 1));
        return diffs[idx];
    };
    out.lower = at(0.05);
    out.upper = at(0.95);
    out.pass = out.lower <= 0.0;
    return out;
}

}  // namespace lookback
