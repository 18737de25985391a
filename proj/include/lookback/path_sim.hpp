#pragma once

#include "lookback/model.hpp"
#include "lookback/rng.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace lookback {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// How the running maximum sees the path between grid nodes. `discrete` only
// looks at the nodes; `bridge` samples the exact maximum of the Brownian
// bridge inside each cell, which removes the O(sqrt(dt)) monitoring bias.
enum class Monitoring { discrete, bridge };

struct MarkedEvent {
    double time = 0.0;
    // Cox: the atom z drawn from nu. Hawkes: the thinning ordinate u.
    double mark = 0.0;
    bool accepted = true;
    double jump_applied = 0.0;
    // Intensity just before the event.
    double lambda_at = 0.0;
    // Cell (t_cell, t_cell+1] the event is snapped to.
    std::size_t cell = 0;
};

// Markov state at a grid node, enough to branch a continuation.
struct PathState {
    double x = 0.0;
    double log_s = 0.0;
    double lambda = 0.0;
    double lambda_raw = 0.0;  // pre-truncation CIR state; equals lambda for Hawkes
    double m = 0.0;           // node-only running max
    double sup = 0.0;         // monitored running max
};

struct SimPath {
    ModelKind model = ModelKind::cox;
    SimGrid grid;
    Monitoring monitoring = Monitoring::bridge;
    // Entries before `start` are not populated (continuations).
    std::size_t start = 0;
    StreamId noise;
    StreamId strip;
    double strip_origin = 0.0;
    double cell_variance = 0.0;  // sigma1^2 dt

    // Per cell k = [t_k, t_k+1]: n entries.
    std::vector<double> w_s_incr;         // price Brownian increments
    std::vector<double> w_incr;           // CIR Brownian increments (zero for Hawkes)
    std::vector<double> jump_sum;         // sum of jumps snapped to the cell end
    std::vector<double> lambda_integral;  // integral of lambda over the cell
    std::vector<double> lambda_cell_sup;
    std::vector<double> bridge_u;
    std::vector<double> excursion;        // sup of the diffusion part above x_k
    std::vector<double> cell_sup;         // sup of x over (t_k, t_k+1]

    // Per node: n + 1 entries.
    std::vector<double> lambda;
    std::vector<double> lambda_raw;
    std::vector<double> x;
    std::vector<double> log_s;  // ln S; differs from x for Hawkes
    std::vector<double> m;
    std::vector<double> sup;

    std::size_t tau_idx = 0;      // first node attaining max x (npos: before start)
    // Last node t_k with t_k <= tau, tau the first time the monitored sup is
    // attained. npos when the sup was reached before `start`.
    std::size_t sup_tau_idx = 0;

    std::vector<MarkedEvent> events;

    std::size_t n_steps() const { return grid.n_steps; }
    PathState state_at(std::size_t k) const;
    double max_value() const { return sup.back(); }
    // sup of x over (t_k, T]; -inf when k == n.
    double max_after(std::size_t k) const;
    // max(x_k, max_after(k)): M_{t,T} including the current value.
    double max_from(std::size_t k) const { return std::max(x[k], max_after(k)); }
    // Monitored maximum of ln S over [0, T].
    double log_s_max() const;
};

struct SimOptions {
    Monitoring monitoring = Monitoring::bridge;
    bool record_rejected = true;
};

// Result of inserting an event (t, z) into a Hawkes path and replaying the
// thinning with the same Poisson strip.
struct PerturbedPath {
    std::size_t t_idx = 0;
    double z = 0.0;
    bool inserted = false;
    double k_jump = 0.0;  // J_t when 0 < z <= lambda_t, else 0
    std::vector<double> z_path;       // equals base.x before t, Z_s from t on
    std::vector<double> lambda_pert;
    std::vector<double> d2_lambda;    // lambda_pert - lambda
    std::vector<double> cell_sup;     // sup of Z per cell, from t_idx on
    std::vector<MarkedEvent> events;  // accepted perturbed events after t
    double sup_after = 0.0;           // sup of Z over (t, T]
};

// A Poisson random measure on (origin, horizon] x (0, inf), materialised
// lazily in horizontal bands of fixed height. Any intensity path can be
// thinned against it; two intensity paths thinned against the same strip are
// coupled pointwise.
class PoissonStrip {
public:
    struct Point {
        double time;
        double ordinate;
    };

    void reset(StreamId id, double band_height, double origin, double horizon);
    const Point& point(std::size_t band, std::size_t index);
    double band_height() const { return height_; }

private:
    struct Band {
        RandomStream rng{StreamId{}};
        std::vector<Point> points;
        double last = 0.0;
    };
    Band& band(std::size_t b);

    StreamId id_;
    double height_ = 1.0;
    double origin_ = 0.0;
    double horizon_ = 1.0;
    std::vector<Band> bands_;
    std::size_t live_ = 0;
};

// Owns reusable scratch space; one instance per worker thread.
class PathSimulator {
public:
    PathSimulator(ModelConfig model, SimGrid grid, SimOptions options = {});

    const ModelConfig& model() const { return model_; }
    const SimGrid& grid() const { return grid_; }
    const SimOptions& options() const { return options_; }

    PathState initial_state() const;
    SimPath simulate(StreamId id);
    void simulate(StreamId id, SimPath& out);
    // Overwrites nodes start..n of `out` with a continuation from `state`.
    void simulate_tail(std::size_t start, const PathState& state, StreamId id, SimPath& out);
    // Hawkes only. Inserts an event at node t_idx with mark z.
    void cascade(const SimPath& base, std::size_t t_idx, double z, PerturbedPath& out);

    double strip_band_height() const;

private:
    void prepare(SimPath& out, std::size_t start, StreamId id) const;
    void cox_tail(std::size_t start, const PathState& state, SimPath& out);
    void hawkes_tail(std::size_t start, const PathState& state, SimPath& out);
    void thin(double t0, double lambda_start, std::vector<MarkedEvent>& out, bool record_rejected);
    void finish_profile(std::size_t start, const PathState& state, SimPath& out) const;

    ModelConfig model_;
    SimGrid grid_;
    SimOptions options_;
    PoissonStrip strip_;
    std::vector<std::size_t> cursors_;
    std::vector<MarkedEvent> scratch_events_;
    std::vector<double> atom_cdf_;
};

// Full-truncation Euler CIR path on the grid, clamped at zero.
std::vector<double> simulate_cir(const CoxParams& params, const SimGrid& grid, RandomStream& rng);

SimPath simulate_cox_path(const CoxParams& params, const JumpSpec& spec, const SimGrid& grid, StreamId id,
                          const SimOptions& options = {});
SimPath simulate_hawkes_path(const HawkesParams& params, const JumpSpec& spec, const SimGrid& grid, StreamId id,
                             const SimOptions& options = {});

// m_k = max_{j<=k} x_j and the first index attaining m_n.
std::pair<std::vector<double>, std::size_t> running_max_and_tau(std::span<const double> x);

// Throws InsertOffGrid when t is not a grid node.
PerturbedPath insert_event_cascade(const HawkesParams& params, const JumpSpec& spec, const SimPath& base, double t,
                                   double z);

// Exact maximum of a Brownian bridge from 0 to `increment` over a cell,
// given the uniform u: the excursion above the starting point.
double bridge_excursion(double increment, double variance, double u);

}  // namespace lookback
