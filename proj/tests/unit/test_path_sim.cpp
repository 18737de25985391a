#include "fixtures.hpp"
#include "lookback/errors.hpp"
#include "lookback/path_sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace lookback;

namespace {

struct Stats {
    double sum = 0, sum2 = 0;
    int n = 0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++n;
    }
    double mean() const { return sum / n; }
    double se() const { return std::sqrt((sum2 / n - mean() * mean()) / (n - 1)); }
};

}  // namespace

TEST_CASE("CIR at its fixed point stays there") {
    CoxParams p = fixtures::cox_a();
    p.sigma2 = 0.0;
    p.lambda0 = p.theta;
    RandomStream rng(root_stream(1, StreamPurpose::outer_path));
    const auto lam = simulate_cir(p, SimGrid(64, 1.0), rng);
    for (double v : lam) CHECK(v == p.theta);
}

TEST_CASE("deterministic CIR converges to the ODE solution") {
    CoxParams p = fixtures::cox_a();
    p.sigma2 = 0.0;
    const double oracle = 1.0 - 0.5 * std::exp(-2.0);
    double last_err = 1.0;
    for (std::size_t n : {64u, 256u, 1024u, 4096u}) {
        RandomStream rng(root_stream(1, StreamPurpose::outer_path));
        const double err = std::abs(simulate_cir(p, SimGrid(n, 1.0), rng).back() - oracle);
        CHECK(err < last_err);
        last_err = err;
    }
    CHECK(last_err < 1e-4);
    CHECK(oracle == doctest::Approx(0.93233).epsilon(1e-5));
}

TEST_CASE("CIR sample mean matches the exact mean") {
    const CoxParams p = fixtures::cox_a();
    const SimGrid g(256, 1.0);
    Stats s;
    const StreamId root = root_stream(11, StreamPurpose::outer_path);
    for (int i = 0; i < 20000; ++i) {
        RandomStream rng(root.child(i));
        const auto lam = simulate_cir(p, g, rng);
        for (double v : lam) REQUIRE(v >= 0.0);
        s.add(lam.back());
    }
    const double oracle = p.theta + (p.lambda0 - p.theta) * std::exp(-p.kappa);
    CHECK(std::abs(s.mean() - oracle) < 3.5 * s.se());
}

TEST_CASE("Cox path without jump mass is a drifted Brownian path") {
    const CoxParams p = fixtures::cox_a();
    const SimGrid g(128, 1.0);
    const SimPath path = simulate_cox_path(p, JumpSpec{}, g, root_stream(3, StreamPurpose::outer_path));
    CHECK(path.events.empty());
    const double drift = (p.mu - 0.5 * p.sigma1 * p.sigma1) * g.dt();
    for (std::size_t k = 0; k < g.n_steps; ++k) {
        CHECK(path.x[k + 1] == path.x[k] + drift + p.sigma1 * path.w_s_incr[k] + 0.0);
    }
}

TEST_CASE("zero jump size leaves X untouched by the events") {
    const CoxParams p = fixtures::cox_a();
    const SimGrid g(128, 1.0);
    JumpSpec zero;
    zero.atoms = {{1.0, 3.0}};
    zero.jump = LinearInMark{0.0};
    const StreamId id = root_stream(4, StreamPurpose::outer_path);
    const SimPath with = simulate_cox_path(p, zero, g, id);
    const SimPath without = simulate_cox_path(p, JumpSpec{}, g, id);
    CHECK_FALSE(with.events.empty());
    CHECK(with.x == without.x);
    CHECK(with.lambda == without.lambda);
}

TEST_CASE("COX-A expected event count over [0,1]") {
    const CoxParams p = fixtures::cox_a();
    const JumpSpec spec = fixtures::cox_a_jumps();
    const SimGrid g(256, 1.0);
    PathSimulator sim(ModelConfig{p, spec}, g);
    SimPath path;
    Stats s;
    const StreamId root = root_stream(5, StreamPurpose::outer_path);
    for (int i = 0; i < 20000; ++i) {
        sim.simulate(root.child(i), path);
        s.add(static_cast<double>(path.events.size()));
        for (const auto& ev : path.events) {
            REQUIRE(ev.mark == 1.0);
            REQUIRE(ev.jump_applied == doctest::Approx(0.1));
            REQUIRE(ev.time > g.time(ev.cell));
            REQUIRE(ev.time <= g.time(ev.cell + 1));
        }
    }
    // int_0^1 (theta + (lambda0 - theta) e^{-kappa t}) dt
    const double oracle = 1.0 - 0.25 * (1.0 - std::exp(-2.0));
    CHECK(oracle == doctest::Approx(0.783834).epsilon(1e-6));
    CHECK(std::abs(s.mean() - oracle) < 3.5 * s.se());
}

TEST_CASE("path invariants hold") {
    const SimGrid g(128, 2.0);
    for (int model = 0; model < 2; ++model) {
        const StreamId id = root_stream(6 + model, StreamPurpose::outer_path);
        const SimPath path = model == 0 ? simulate_cox_path(fixtures::cox_a(), fixtures::cox_a_jumps(), g, id)
                                        : simulate_hawkes_path(fixtures::hawkes_a(), fixtures::hawkes_jump(), g, id);
        for (std::size_t k = 0; k <= g.n_steps; ++k) {
            CHECK(path.lambda[k] >= 0.0);
            CHECK(path.m[k] >= path.x[k]);
            CHECK(path.sup[k] >= path.m[k]);
            if (k) {
                CHECK(path.m[k] >= path.m[k - 1]);
                CHECK(path.sup[k] >= path.sup[k - 1]);
            }
        }
        CHECK(path.x[path.tau_idx] == path.m.back());
        CHECK(path.sup_tau_idx != npos);
    }
}

TEST_CASE("Hawkes with eta = 0 follows the deterministic intensity") {
    HawkesParams p = fixtures::hawkes_a();
    p.eta = 0.0;
    p.lambda0 = 2.0;
    const SimGrid g(64, 2.0);
    const SimPath path = simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(8, StreamPurpose::outer_path));
    for (std::size_t k = 0; k <= g.n_steps; ++k) {
        const double oracle = p.theta + (p.lambda0 - p.theta) * std::exp(-p.kappa * g.time(k));
        CHECK(path.lambda[k] == doctest::Approx(oracle).epsilon(1e-12));
    }

    p.lambda0 = p.theta;
    const SimPath flat = simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(9, StreamPurpose::outer_path));
    for (double v : flat.lambda) CHECK(v == doctest::Approx(p.theta).epsilon(1e-15));
}

TEST_CASE("HAWKES-A intensity mean and compensated count") {
    const HawkesParams p = fixtures::hawkes_a();
    const SimGrid g(32, 2.0);
    PathSimulator sim(ModelConfig{p, fixtures::hawkes_jump()}, g);
    SimPath path;
    Stats lam, comp;
    const StreamId root = root_stream(10, StreamPurpose::outer_path);
    for (int i = 0; i < 20000; ++i) {
        sim.simulate(root.child(i), path);
        lam.add(path.lambda.back());
        double count = 0, integral = 0;
        for (const auto& ev : path.events) count += ev.accepted;
        for (double v : path.lambda_integral) integral += v;
        comp.add(count - integral);
    }
    // m' = kappa theta - (kappa - eta) m, m(0) = lambda0
    const double r = p.kappa - p.eta;
    const double m_inf = p.kappa * p.theta / r;
    const double oracle = m_inf + (p.lambda0 - m_inf) * std::exp(-r * 2.0);
    CHECK(oracle == doctest::Approx(0.816060).epsilon(1e-6));
    CHECK(std::abs(lam.mean() - oracle) < 3.5 * lam.se());
    CHECK(std::abs(comp.mean()) < 3.5 * comp.se());
}

TEST_CASE("Hawkes events respect the thinning rule") {
    const SimGrid g(64, 2.0);
    std::size_t accepted = 0, total = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const SimPath path = simulate_hawkes_path(fixtures::hawkes_a(), fixtures::hawkes_jump(), g,
                                                  root_stream(12, StreamPurpose::outer_path).child(rep));
        for (const auto& ev : path.events) {
            CHECK(ev.accepted == (ev.mark <= ev.lambda_at));
            accepted += ev.accepted;
        }
        total += path.events.size();
    }
    CHECK(accepted > 0);
    CHECK(accepted < total);
}

TEST_CASE("Hawkes log-price carries the compensator, X does not") {
    const HawkesParams p = fixtures::hawkes_a();
    const SimGrid g(64, 2.0);
    const SimPath path = simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(13, StreamPurpose::outer_path));
    double comp = 0.0;
    for (double v : path.lambda_integral) comp += std::expm1(0.3) * v;
    CHECK(path.x.back() - path.log_s.back() == doctest::Approx(comp).epsilon(1e-10));
}

TEST_CASE("same stream gives the same path bit for bit") {
    const SimGrid g(64, 2.0);
    const StreamId id = root_stream(14, StreamPurpose::outer_path);
    const SimPath a = simulate_hawkes_path(fixtures::hawkes_a(), fixtures::hawkes_jump(), g, id);
    const SimPath b = simulate_hawkes_path(fixtures::hawkes_a(), fixtures::hawkes_jump(), g, id);
    CHECK(a.x == b.x);
    CHECK(a.lambda == b.lambda);
    CHECK(a.cell_sup == b.cell_sup);
    CHECK(a.events.size() == b.events.size());
}

TEST_CASE("running_max_and_tau") {
    {
        const std::vector<double> x{0, 1, 1, 0};
        const auto [m, tau] = running_max_and_tau(x);
        CHECK(m == std::vector<double>{0, 1, 1, 1});
        CHECK(tau == 1);
    }
    {
        const std::vector<double> x{-3, -1, 0, 2, 5};
        CHECK(running_max_and_tau(x).second == 4);
    }
    RandomStream rng(root_stream(15, StreamPurpose::outer_path));
    std::vector<double> x(1000);
    for (auto& v : x) v = std::floor(rng.normal() * 4.0);  // ties on purpose
    const auto [m, tau] = running_max_and_tau(x);
    double best = x[0];
    for (std::size_t k = 0; k < x.size(); ++k) {
        best = std::max(best, x[k]);
        CHECK(m[k] == best);
    }
    std::size_t scan = 0;
    while (x[scan] != best) ++scan;
    CHECK(tau == scan);
}

TEST_CASE("bridge monitoring removes the discrete-max bias") {
    const ModelConfig w = fixtures::wiener();
    const SimGrid g(64, 1.0);
    SimOptions discrete;
    discrete.monitoring = Monitoring::discrete;
    PathSimulator bridged(w, g), nodes(w, g, discrete);
    SimPath path;
    Stats sb, sd;
    const StreamId root = root_stream(16, StreamPurpose::outer_path);
    for (int i = 0; i < 20000; ++i) {
        bridged.simulate(root.child(i), path);
        sb.add(path.max_value());
        nodes.simulate(root.child(i), path);
        sd.add(path.max_value());
    }
    const double oracle = std::sqrt(2.0 / M_PI);
    CHECK(std::abs(sb.mean() - oracle) < 3.5 * sb.se());
    CHECK(oracle - sd.mean() > 0.05);  // about 0.5826 sqrt(dt)
}

TEST_CASE("cascade with a mark above the intensity is the identity") {
    const HawkesParams p = fixtures::hawkes_a();
    const SimGrid g(64, 2.0);
    const SimPath base = simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(17, StreamPurpose::outer_path));
    const double t = g.time(20);
    const PerturbedPath pert = insert_event_cascade(p, fixtures::hawkes_jump(), base, t, base.lambda[20] + 0.01);
    CHECK_FALSE(pert.inserted);
    CHECK(pert.k_jump == 0.0);
    for (double d : pert.d2_lambda) CHECK(d == 0.0);
    CHECK(pert.z_path == base.x);
    CHECK(pert.lambda_pert == base.lambda);
}

TEST_CASE("cascade off the grid is refused") {
    const HawkesParams p = fixtures::hawkes_a();
    const SimGrid g(64, 2.0);
    const SimPath base = simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(18, StreamPurpose::outer_path));
    CHECK_THROWS_AS(insert_event_cascade(p, fixtures::hawkes_jump(), base, 0.01, 0.1), InsertOffGrid);
}

TEST_CASE("cascade without excitation adds exactly one event") {
    HawkesParams p = fixtures::hawkes_a();
    p.eta = 0.0;
    const SimGrid g(64, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        const SimPath base =
            simulate_hawkes_path(p, fixtures::hawkes_jump(), g, root_stream(19, StreamPurpose::outer_path).child(rep));
        const std::size_t k = 5 + rep % 50;
        const PerturbedPath pert =
            insert_event_cascade(p, fixtures::hawkes_jump(), base, g.time(k), 0.5 * base.lambda[k]);
        REQUIRE(pert.inserted);
        CHECK(pert.k_jump == 0.3);
        std::vector<double> base_times;
        for (const auto& ev : base.events) {
            if (ev.accepted && ev.time > g.time(k)) base_times.push_back(ev.time);
        }
        std::vector<double> pert_times;
        for (const auto& ev : pert.events) pert_times.push_back(ev.time);
        CHECK(pert_times == base_times);
        // Z without the inserted jump retraces X; the jump itself is K.
        for (std::size_t c = k; c <= g.n_steps; ++c) CHECK(pert.z_path[c] == base.x[c]);
        for (double d : pert.d2_lambda) CHECK(d == 0.0);
    }
}

TEST_CASE("cascade intensity dominates the base intensity") {
    const HawkesParams p = fixtures::hawkes_a();
    const SimGrid g(64, 2.0);
    PathSimulator sim(ModelConfig{p, fixtures::hawkes_jump()}, g);
    SimPath base;
    PerturbedPath pert;
    std::size_t grew = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        sim.simulate(root_stream(20, StreamPurpose::outer_path).child(rep), base);
        const std::size_t k = rep % 64;
        sim.cascade(base, k, base.lambda[k], pert);
        REQUIRE(pert.inserted);
        for (std::size_t c = 0; c <= g.n_steps; ++c) {
            CHECK(pert.lambda_pert[c] >= base.lambda[c]);
            if (c > k) CHECK(pert.lambda_pert[c] > base.lambda[c]);
        }
        // Every base event after t survives in the perturbed run.
        std::size_t found = 0;
        for (const auto& ev : base.events) {
            if (!ev.accepted || ev.time <= g.time(k)) continue;
            for (const auto& pe : pert.events) found += pe.time == ev.time;
        }
        std::size_t base_after = 0;
        for (const auto& ev : base.events) base_after += ev.accepted && ev.time > g.time(k);
        CHECK(found == base_after);
        grew += pert.events.size() > base_after;
    }
    CHECK(grew > 0);
}
