#include "lookback/path_sim.hpp"

#include "lookback/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lookback {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStripTag = 0x5157u;
constexpr std::uint64_t kEventTag = 0xE7E7u;

// Shared by the base sweep and the cascade so both produce identical bits
// when they see identical inputs.
inline double advance(double value, double drift_dt, double sigma, double dw, double jumps) {
    return value + drift_dt + sigma * dw + jumps;
}

inline double cell_sup_of(Monitoring mon, double left, double excursion, double right) {
    if (mon == Monitoring::discrete) return right;
    return std::max(left + excursion, right);
}

// Integral of theta + (l0 - theta) exp(-kappa s) over s in [0, h].
inline double decay_integral(double theta, double kappa, double l0, double h) {
    return theta * h - (l0 - theta) * std::expm1(-kappa * h) / kappa;
}

inline double decay(double theta, double kappa, double l0, double h) {
    return theta + (l0 - theta) * std::exp(-kappa * h);
}

}  // namespace

double bridge_excursion(double increment, double variance, double u) {
    const double disc = increment * increment - 2.0 * variance * std::log(u);
    return 0.5 * (increment + std::sqrt(disc));
}

PathState SimPath::state_at(std::size_t k) const {
    return {x[k], log_s[k], lambda[k], lambda_raw[k], m[k], sup[k]};
}

double SimPath::max_after(std::size_t k) const {
    double best = -kInf;
    for (std::size_t c = k; c < cell_sup.size(); ++c) best = std::max(best, cell_sup[c]);
    return best;
}

double SimPath::log_s_max() const {
    if (model == ModelKind::cox) return sup.back();
    double best = log_s[start];
    for (std::size_t c = start; c < grid.n_steps; ++c) {
        double cs = log_s[c + 1];
        if (monitoring == Monitoring::bridge && cell_variance > 0.0) {
            const double incr = log_s[c + 1] - jump_sum[c] - log_s[c];
            const double ex = bridge_excursion(incr, cell_variance, bridge_u[c]);
            cs = std::max(log_s[c] + ex, cs);
        }
        best = std::max(best, cs);
    }
    return best;
}

// ---------------------------------------------------------------------------

void PoissonStrip::reset(StreamId id, double band_height, double origin, double horizon) {
    id_ = id;
    height_ = band_height;
    origin_ = origin;
    horizon_ = horizon;
    live_ = 0;
}

PoissonStrip::Band& PoissonStrip::band(std::size_t b) {
    while (live_ <= b) {
        if (bands_.size() <= live_) bands_.emplace_back();
        Band& fresh = bands_[live_];
        fresh.rng = RandomStream(id_.child(live_));
        fresh.points.clear();
        fresh.last = origin_;
        ++live_;
    }
    return bands_[b];
}

const PoissonStrip::Point& PoissonStrip::point(std::size_t b, std::size_t index) {
    Band& bd = band(b);
    while (bd.points.size() <= index) {
        if (bd.last > horizon_) {
            bd.points.push_back({kInf, 0.0});
            continue;
        }
        bd.last += bd.rng.exponential() / height_;
        const double ordinate = height_ * (static_cast<double>(b) + bd.rng.uniform());
        bd.points.push_back({bd.last > horizon_ ? kInf : bd.last, ordinate});
    }
    return bd.points[index];
}

// ---------------------------------------------------------------------------

PathSimulator::PathSimulator(ModelConfig model, SimGrid grid, SimOptions options)
    : model_(std::move(model)), grid_(grid), options_(options) {
    if (model_.kind() == ModelKind::cox) {
        double acc = 0.0;
        for (const auto& a : model_.jumps.atoms) {
            acc += a.w;
            atom_cdf_.push_back(acc);
        }
    }
}

double PathSimulator::strip_band_height() const {
    return std::max({model_.theta(), model_.lambda0(), 1e-3});
}

PathState PathSimulator::initial_state() const {
    const double x0 = std::log(model_.s0());
    const double l0 = model_.lambda0();
    return {x0, x0, l0, l0, x0, x0};
}

void PathSimulator::prepare(SimPath& out, std::size_t start, StreamId id) const {
    const std::size_t n = grid_.n_steps;
    out.model = model_.kind();
    out.grid = grid_;
    out.monitoring = options_.monitoring;
    out.start = start;
    out.noise = id;
    out.strip = id.child(kStripTag);
    out.strip_origin = grid_.time(start);
    out.cell_variance = model_.sigma1() * model_.sigma1() * grid_.dt();
    for (auto* v : {&out.w_s_incr, &out.w_incr, &out.jump_sum, &out.lambda_integral, &out.lambda_cell_sup,
                    &out.bridge_u, &out.excursion, &out.cell_sup}) {
        v->resize(n);
    }
    for (auto* v : {&out.lambda, &out.lambda_raw, &out.x, &out.log_s, &out.m, &out.sup}) v->resize(n + 1);
    out.events.clear();
}

SimPath PathSimulator::simulate(StreamId id) {
    SimPath out;
    simulate(id, out);
    return out;
}

void PathSimulator::simulate(StreamId id, SimPath& out) {
    simulate_tail(0, initial_state(), id, out);
}

void PathSimulator::simulate_tail(std::size_t start, const PathState& state, StreamId id, SimPath& out) {
    prepare(out, start, id);
    out.x[start] = state.x;
    out.log_s[start] = state.log_s;
    out.lambda[start] = state.lambda;
    out.lambda_raw[start] = state.lambda_raw;
    if (model_.kind() == ModelKind::cox) {
        cox_tail(start, state, out);
    } else {
        hawkes_tail(start, state, out);
    }
    finish_profile(start, state, out);
}

void PathSimulator::cox_tail(std::size_t start, const PathState& state, SimPath& out) {
    const CoxParams& p = model_.cox();
    const JumpSpec& spec = model_.jumps;
    const std::size_t n = grid_.n_steps;
    const double dt = grid_.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double drift_dt = (p.mu - 0.5 * p.sigma1 * p.sigma1) * dt;
    const double variance = p.sigma1 * p.sigma1 * dt;
    // Without diffusion the path is linear inside a cell and the nodes carry the max.
    const bool bridged = options_.monitoring == Monitoring::bridge && variance > 0.0;
    const double mass = atom_cdf_.empty() ? 0.0 : atom_cdf_.back();
    const bool time_dependent = spec.depends_on_time();
    const double mu_bar_const = mu_bar(spec, 0.0);

    // Events draw from their own stream so the Brownian increments do not
    // depend on whether jumps are switched on.
    RandomStream rng(out.noise);
    RandomStream ev_rng(out.noise.child(kEventTag));
    double raw = state.lambda_raw;
    for (std::size_t k = start; k < n; ++k) {
        const double t0 = grid_.time(k);
        const double t1 = grid_.time(k + 1);
        const double lam = std::max(raw, 0.0);
        const double dws = sqrt_dt * rng.normal();
        const double dw = sqrt_dt * rng.normal();
        const double u = rng.uniform();

        double jumps = 0.0;
        const double rate = lam * mass;
        if (rate > 0.0) {
            double s = t0 + ev_rng.exponential() / rate;
            while (s <= t1) {
                const double pick = ev_rng.uniform() * mass;
                std::size_t i = 0;
                while (i + 1 < atom_cdf_.size() && atom_cdf_[i] < pick) ++i;
                const double z = spec.atoms[i].z;
                const double j = spec.jump_at(s, z);
                jumps += j;
                out.events.push_back({s, z, true, j, lam, k});
                s += ev_rng.exponential() / rate;
            }
        }

        const double mb = time_dependent ? mu_bar(spec, t0) : mu_bar_const;
        const double comp = mb * lam * dt;
        out.w_s_incr[k] = dws;
        out.w_incr[k] = dw;
        out.bridge_u[k] = u;
        out.jump_sum[k] = jumps;
        out.lambda_integral[k] = lam * dt;
        out.x[k + 1] = advance(out.x[k], drift_dt - comp, p.sigma1, dws, jumps);
        out.log_s[k + 1] = out.x[k + 1];
        out.excursion[k] = bridged ? bridge_excursion(out.x[k + 1] - jumps - out.x[k], variance, u) : -kInf;

        raw = raw + p.kappa * (p.theta - lam) * dt + p.sigma2 * std::sqrt(lam) * dw;
        out.lambda_raw[k + 1] = raw;
        out.lambda[k + 1] = std::max(raw, 0.0);
        out.lambda_cell_sup[k] = std::max(out.lambda[k], out.lambda[k + 1]);
    }
}

void PathSimulator::thin(double t0, double lambda_start, std::vector<MarkedEvent>& out, bool record_rejected) {
    const HawkesParams& p = model_.hawkes();
    const JumpSpec& spec = model_.jumps;
    const double height = strip_.band_height();
    const double horizon = grid_.horizon;
    const double dt = grid_.dt();

    cursors_.clear();
    double s = t0;
    double lam = lambda_start;
    for (;;) {
        const double bound = std::max(lam, p.theta);
        const auto active = static_cast<std::size_t>(std::max(1.0, std::ceil(bound / height)));
        double best = kInf;
        std::size_t best_band = 0;
        for (std::size_t b = 0; b < active; ++b) {
            if (b == cursors_.size()) cursors_.push_back(0);
            std::size_t& c = cursors_[b];
            while (strip_.point(b, c).time <= s) ++c;
            const double tb = strip_.point(b, c).time;
            if (tb < best) {
                best = tb;
                best_band = b;
            }
        }
        if (!(best <= horizon)) break;
        const PoissonStrip::Point pt = strip_.point(best_band, cursors_[best_band]);
        ++cursors_[best_band];
        const double lam_minus = decay(p.theta, p.kappa, lam, pt.time - s);
        const bool accept = pt.ordinate <= lam_minus;
        const auto cell = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(pt.time / dt)) - 1,
                                                grid_.n_steps - 1);
        if (accept || record_rejected) {
            out.push_back({pt.time, pt.ordinate, accept, accept ? spec.jump_at(pt.time, 0.0) : 0.0, lam_minus, cell});
        }
        lam = accept ? lam_minus + p.eta : lam_minus;
        s = pt.time;
    }
}

void PathSimulator::hawkes_tail(std::size_t start, const PathState& state, SimPath& out) {
    const HawkesParams& p = model_.hawkes();
    const JumpSpec& spec = model_.jumps;
    const std::size_t n = grid_.n_steps;
    const double dt = grid_.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double drift_dt = (p.mu - 0.5 * p.sigma1 * p.sigma1) * dt;
    const double variance = p.sigma1 * p.sigma1 * dt;
    // Without diffusion the path is linear inside a cell and the nodes carry the max.
    const bool bridged = options_.monitoring == Monitoring::bridge && variance > 0.0;

    strip_.reset(out.strip, strip_band_height(), out.strip_origin, grid_.horizon);
    thin(grid_.time(start), state.lambda, out.events, options_.record_rejected);

    RandomStream rng(out.noise);
    std::size_t e = 0;
    const std::size_t n_events = out.events.size();
    for (std::size_t k = start; k < n; ++k) {
        const double t0 = grid_.time(k);
        const double t1 = grid_.time(k + 1);
        double cur_t = t0;
        double cur_lam = out.lambda[k];
        double integral = 0.0;
        double lam_sup = cur_lam;
        double jumps = 0.0;
        for (; e < n_events && out.events[e].cell <= k; ++e) {
            const MarkedEvent& ev = out.events[e];
            if (!ev.accepted) continue;
            integral += decay_integral(p.theta, p.kappa, cur_lam, ev.time - cur_t);
            cur_lam = ev.lambda_at + p.eta;
            lam_sup = std::max(lam_sup, cur_lam);
            jumps += ev.jump_applied;
            cur_t = ev.time;
        }
        integral += decay_integral(p.theta, p.kappa, cur_lam, t1 - cur_t);
        out.lambda[k + 1] = decay(p.theta, p.kappa, cur_lam, t1 - cur_t);
        out.lambda_raw[k + 1] = out.lambda[k + 1];
        lam_sup = std::max(lam_sup, out.lambda[k + 1]);

        const double dw = sqrt_dt * rng.normal();
        const double u = rng.uniform();
        out.w_s_incr[k] = dw;
        out.w_incr[k] = 0.0;
        out.bridge_u[k] = u;
        out.jump_sum[k] = jumps;
        out.lambda_integral[k] = integral;
        out.lambda_cell_sup[k] = lam_sup;
        out.x[k + 1] = advance(out.x[k], drift_dt, p.sigma1, dw, jumps);
        const double comp = std::expm1(spec.jump_at(t0 + 0.5 * dt, 0.0)) * integral;
        out.log_s[k + 1] = advance(out.log_s[k], drift_dt - comp, p.sigma1, dw, jumps);
        out.excursion[k] = bridged ? bridge_excursion(out.x[k + 1] - jumps - out.x[k], variance, u) : -kInf;
    }
}

void PathSimulator::finish_profile(std::size_t start, const PathState& state, SimPath& out) const {
    const std::size_t n = grid_.n_steps;
    out.m[start] = std::max(state.m, out.x[start]);
    out.sup[start] = std::max(state.sup, out.x[start]);
    for (std::size_t k = start; k < n; ++k) {
        out.cell_sup[k] = cell_sup_of(options_.monitoring, out.x[k], out.excursion[k], out.x[k + 1]);
        out.m[k + 1] = std::max(out.m[k], out.x[k + 1]);
        out.sup[k + 1] = std::max(out.sup[k], out.cell_sup[k]);
    }
    out.tau_idx = npos;
    for (std::size_t k = start; k <= n; ++k) {
        if (out.x[k] == out.m[n]) {
            out.tau_idx = k;
            break;
        }
    }
    out.sup_tau_idx = npos;
    if (out.x[start] == out.sup[n]) {
        out.sup_tau_idx = start;
    } else {
        for (std::size_t c = start; c < n; ++c) {
            if (out.cell_sup[c] == out.sup[n]) {
                // Interior attainment puts tau strictly inside the cell.
                out.sup_tau_idx = out.cell_sup[c] == out.x[c + 1] ? c + 1 : c;
                break;
            }
        }
    }
}

void PathSimulator::cascade(const SimPath& base, std::size_t k, double z, PerturbedPath& out) {
    if (model_.kind() != ModelKind::hawkes) throw Error("event insertion cascade requires a Hawkes path");
    const HawkesParams& p = model_.hawkes();
    const JumpSpec& spec = model_.jumps;
    const std::size_t n = grid_.n_steps;
    if (k < base.start || k > n) throw InsertOffGrid("insertion node outside the simulated range");

    const double t = grid_.time(k);
    const double lam_t = base.lambda[k];
    out.t_idx = k;
    out.z = z;
    out.inserted = z > 0.0 && z <= lam_t;
    out.k_jump = out.inserted ? spec.jump_at(t, 0.0) : 0.0;
    out.z_path = base.x;
    out.lambda_pert = base.lambda;
    out.d2_lambda.assign(n + 1, 0.0);
    out.cell_sup = base.cell_sup;
    out.events.clear();

    if (!out.inserted) {
        for (const auto& ev : base.events) {
            if (ev.accepted && ev.time > t) out.events.push_back(ev);
        }
        out.sup_after = base.max_after(k);
        return;
    }

    const double dt = grid_.dt();
    const double drift_dt = (p.mu - 0.5 * p.sigma1 * p.sigma1) * dt;
    strip_.reset(base.strip, strip_band_height(), base.strip_origin, grid_.horizon);
    thin(t, lam_t + p.eta, out.events, false);

    std::size_t e = 0;
    const std::size_t n_events = out.events.size();
    double sup_after = -kInf;
    for (std::size_t c = k; c < n; ++c) {
        const double t1 = grid_.time(c + 1);
        double cur_t = grid_.time(c);
        double cur_lam = c == k ? lam_t + p.eta : out.lambda_pert[c];
        double jumps = 0.0;
        for (; e < n_events && out.events[e].cell <= c; ++e) {
            const MarkedEvent& ev = out.events[e];
            cur_lam = ev.lambda_at + p.eta;
            jumps += ev.jump_applied;
            cur_t = ev.time;
        }
        out.lambda_pert[c + 1] = decay(p.theta, p.kappa, cur_lam, t1 - cur_t);
        out.d2_lambda[c + 1] = out.lambda_pert[c + 1] - base.lambda[c + 1];
        out.z_path[c + 1] = advance(out.z_path[c], drift_dt, p.sigma1, base.w_s_incr[c], jumps);
        out.cell_sup[c] = cell_sup_of(base.monitoring, out.z_path[c], base.excursion[c], out.z_path[c + 1]);
        sup_after = std::max(sup_after, out.cell_sup[c]);
    }
    out.sup_after = sup_after;
}

// ---------------------------------------------------------------------------

std::vector<double> simulate_cir(const CoxParams& p, const SimGrid& grid, RandomStream& rng) {
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> out(grid.n_steps + 1);
    double raw = p.lambda0;
    out[0] = std::max(raw, 0.0);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double lam = std::max(raw, 0.0);
        raw = raw + p.kappa * (p.theta - lam) * dt + p.sigma2 * std::sqrt(lam) * sqrt_dt * rng.normal();
        out[k + 1] = std::max(raw, 0.0);
    }
    return out;
}

SimPath simulate_cox_path(const CoxParams& params, const JumpSpec& spec, const SimGrid& grid, StreamId id,
                          const SimOptions& options) {
    PathSimulator sim(ModelConfig{params, spec}, grid, options);
    return sim.simulate(id);
}

SimPath simulate_hawkes_path(const HawkesParams& params, const JumpSpec& spec, const SimGrid& grid, StreamId id,
                             const SimOptions& options) {
    PathSimulator sim(ModelConfig{params, spec}, grid, options);
    return sim.simulate(id);
}

std::pair<std::vector<double>, std::size_t> running_max_and_tau(std::span<const double> x) {
    std::vector<double> m(x.size());
    if (x.empty()) return {m, npos};
    m[0] = x[0];
    for (std::size_t k = 1; k < x.size(); ++k) m[k] = std::max(m[k - 1], x[k]);
    std::size_t tau = 0;
    while (x[tau] != m.back()) ++tau;
    return {m, tau};
}

PerturbedPath insert_event_cascade(const HawkesParams& params, const JumpSpec& spec, const SimPath& base, double t,
                                   double z) {
    const std::size_t k = base.grid.node_index(t);
    if (k == npos) throw InsertOffGrid("insertion time is not a grid node");
    SimOptions options;
    options.monitoring = base.monitoring;
    PathSimulator sim(ModelConfig{params, spec}, base.grid, options);
    PerturbedPath out;
    sim.cascade(base, k, z, out);
    return out;
}

}  // namespace lookback
