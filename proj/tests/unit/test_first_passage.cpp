#include "fixtures.hpp"
#include "lookback/errors.hpp"
#include "lookback/first_passage.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lookback;

namespace {

ExitTimeQuery query(double horizon, double t = 0.0) {
    ExitTimeQuery q;
    q.t = t;
    q.horizon = horizon;
    return q;
}

}  // namespace

TEST_CASE("Hawkes constants for HAWKES-A") {
    const AlphaConstants c = alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump());
    CHECK(c.alpha2 == 1.0);
    CHECK(c.alpha3 == c.alpha2);
    CHECK(c.alpha1 == doctest::Approx((std::log(2.0) - 0.5) / 0.3).epsilon(1e-15));
    CHECK(c.alpha1 == doctest::Approx(0.643824).epsilon(1e-6));
    const double hand = 0.03 * c.alpha1 + 0.02 * c.alpha1 * c.alpha1 + 0.5;
    CHECK(c.alpha == doctest::Approx(hand).epsilon(1e-14));
    CHECK(c.alpha == doctest::Approx(0.527605).epsilon(1e-6));
    CHECK(std::abs(hawkes_identity_residual(c, 1.0)) < 1e-12);
}

TEST_CASE("Hawkes constants refuse strong excitation and moving jumps") {
    HawkesParams p = fixtures::hawkes_a();
    p.eta = 0.7;  // kappa ln 2 = 0.693
    CHECK_THROWS_AS(alpha_constants_hawkes(p, fixtures::hawkes_jump()), ClosedFormUnavailable);
    JumpSpec moving;
    moving.jump = TimeAffineJump{0.3, 0.1};
    CHECK_THROWS_AS(alpha_constants_hawkes(fixtures::hawkes_a(), moving), ClosedFormUnavailable);
    CHECK_THROWS_AS(alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump(0.0)), ClosedFormUnavailable);
}

TEST_CASE("Cox constants for COX-A") {
    const CoxParams p = fixtures::cox_a();
    const AlphaConstants c = alpha_constants_cox(p, fixtures::cox_a_jumps());
    CHECK(c.alpha2 == 32.0);
    CHECK(c.alpha1 == 2.0);
    CHECK(c.alpha3 == 0.0);
    CHECK(std::abs(cox_identity_residual(c, p)) < 1e-12);
    const double mb = std::expm1(0.1);
    CHECK(mb == doctest::Approx(0.105171).epsilon(1e-5));
    const double hand = 0.03 * 2 + 0.02 * 4 + 2 * (mb - 0.1) + std::exp(0.2) - 1;
    CHECK(c.alpha == doctest::Approx(hand).epsilon(1e-14));
    CHECK(c.alpha == doctest::Approx(0.371745).epsilon(1e-5));
    CHECK_THROWS_AS(alpha_constants_cox(p, fixtures::cox_a_jumps(), 1.0), ConfigError);
}

TEST_CASE("Cox constants need one jump size") {
    JumpSpec spec = fixtures::cox_a_jumps();
    spec.atoms = {{1.0, 0.5}, {-1.0, 0.5}};
    CHECK_THROWS_AS(alpha_constants_cox(fixtures::cox_a(), spec), ClosedFormUnavailable);
}

TEST_CASE("identities over random parameter draws") {
    RandomStream rng(root_stream(11, StreamPurpose::expectation));
    for (int i = 0; i < 1000; ++i) {
        HawkesParams h = fixtures::hawkes_a();
        h.kappa = 0.1 + 5.0 * rng.uniform();
        h.eta = 0.999 * h.kappa * std::log(2.0) * rng.uniform();
        const double j = 0.01 + 2.0 * rng.uniform();
        const AlphaConstants c = alpha_constants_hawkes(h, fixtures::hawkes_jump(j));
        CHECK(std::abs(hawkes_identity_residual(c, h.kappa)) < 1e-12);

        CoxParams p = fixtures::cox_a();
        p.kappa = 0.5 + 2.5 * rng.uniform();
        p.theta = 0.2 + 1.8 * rng.uniform();
        p.sigma2 = 0.3 + (std::sqrt(2.0 * p.kappa * p.theta) - 0.3) * rng.uniform();  // Feller holds
        const AlphaConstants cc = alpha_constants_cox(p, fixtures::cox_a_jumps());
        CHECK(std::abs(cox_identity_residual(cc, p)) < 1e-12);
    }
}

TEST_CASE("bar_F_cox examples") {
    const AlphaConstants c = alpha_constants_cox(fixtures::cox_a(), fixtures::cox_a_jumps());
    ExitTimeQuery q = query(1.0);
    q.x_t = 0.2;
    q.lambda_t = 0.7;
    q.b = q.x_t;
    q.e = q.lambda_t;
    CHECK(bar_F_cox(q, c).value == doctest::Approx(1.0 / 32.0).epsilon(5e-8));
    q.b = q.x_t + 0.5;
    CHECK(bar_F_cox(q, c).value == doctest::Approx(std::exp(-1.0) / 32.0).epsilon(5e-8));
    CHECK(bar_F_cox(q, c).value == doctest::Approx(0.011495).epsilon(1e-4));
    q.b = 1e6;
    CHECK(bar_F_cox(q, c).value == 0.0);
    // Below the current state the tilt exceeds one and is clamped.
    q.b = q.x_t;
    q.e = q.lambda_t - 1.0;
    const TailValue v = bar_F_cox(q, c);
    CHECK(v.clamped);
    CHECK(v.value == 1.0);
    CHECK(v.raw > 1.0);
}

TEST_CASE("tail_supX_hawkes examples") {
    const AlphaConstants c = alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump());
    ExitTimeQuery q = query(2.0);
    q.x_t = 0.1;
    q.b = q.x_t;
    q.lambda_t = 0.0;
    CHECK(tail_supX_hawkes(q, c).value == doctest::Approx(1.0).epsilon(5e-8));
    q.b = q.x_t + 1.0;
    q.lambda_t = 0.5;
    const double hand = std::exp(-c.alpha1 + 0.5);
    CHECK(tail_supX_hawkes(q, c).value == doctest::Approx(hand).epsilon(5e-8));
    CHECK(hand == doctest::Approx(0.866040).epsilon(1e-6));
    CHECK_FALSE(tail_supX_hawkes(q, c).clamped);
}

TEST_CASE("tail_supZ_hawkes reduces without a jump") {
    const AlphaConstants c = alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump());
    ExitTimeQuery q = query(2.0, 0.5);
    q.x_t = 0.3;
    q.m_t = 0.3;
    q.lambda_t = 0.9;
    q.k_jump = 0.0;
    const TailValue v = tail_supZ_hawkes(q, c);
    CHECK(v.value == doctest::Approx(std::exp(0.9) / (c.alpha1)).epsilon(5e-8));
    CHECK_FALSE(v.clamped);
    CHECK(v.value > 1.0);  // an expectation, so left unclamped
    q.inserted = true;
    q.k_jump = 0.3;
    CHECK(tail_supZ_hawkes(q, c).value ==
          doctest::Approx(std::exp(0.9 + 0.5 + c.alpha1 * 0.3) / c.alpha1).epsilon(5e-8));
}

TEST_CASE("tails are nonincreasing in their thresholds and flat in T - t") {
    const AlphaConstants cc = alpha_constants_cox(fixtures::cox_a(), fixtures::cox_a_jumps());
    const AlphaConstants hc = alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump());
    ExitTimeQuery q = query(2.0);
    q.x_t = 0.0;
    q.lambda_t = 0.5;
    double last_b = std::numeric_limits<double>::infinity();
    for (double b = 0.0; b <= 3.0; b += 0.25) {
        q.b = b;
        double last_e = std::numeric_limits<double>::infinity();
        for (double e = 0.5; e <= 2.0; e += 0.25) {
            q.e = e;
            const double v = bar_F_cox(q, cc).value;
            CHECK(v <= last_e);
            last_e = v;
        }
        const double s = tail_supX_hawkes(q, hc).raw;
        CHECK(s <= last_b);
        last_b = s;
    }
    q.b = 1.0;
    q.e = 0.8;
    const double ref = bar_F_cox(q, cc).value;
    for (double t : {0.0, 0.5, 1.5, 1.99}) {
        q.t = t;
        CHECK(bar_F_cox(q, cc).value == doctest::Approx(ref).epsilon(5e-8));
        CHECK(bar_F_cox(q, cc, {LaplaceMethod::talbot, 0}).value == doctest::Approx(ref).epsilon(5e-8));
    }
    q.t = 2.0;
    CHECK_THROWS(bar_F_cox(q, cc));
}

TEST_CASE("psi_jump signs and zeros") {
    const AlphaConstants hc = alpha_constants_hawkes(fixtures::hawkes_a(), fixtures::hawkes_jump());
    const AlphaConstants cc = alpha_constants_cox(fixtures::cox_a(), fixtures::cox_a_jumps());
    ExitTimeQuery q = query(2.0, 0.5);
    q.x_t = 0.1;
    q.m_t = 0.4;
    q.lambda_t = 0.6;
    CHECK(psi_jump(ModelKind::hawkes, q, hc, 0.0) == 0.0);
    CHECK(psi_jump(ModelKind::cox, q, cc, 0.0) == 0.0);
    CHECK(psi_jump(ModelKind::hawkes, q, hc, 0.3) > 0.0);
    CHECK(psi_jump(ModelKind::hawkes, q, hc, -0.3) < 0.0);
    CHECK(psi_jump(ModelKind::cox, q, cc, 0.1) > 0.0);
    CHECK(psi_jump(ModelKind::cox, q, cc, -0.1) < 0.0);
    const double hand = std::exp(0.6 - hc.alpha1 * 0.3) * std::expm1(hc.alpha1 * 0.3) / hc.alpha1;
    CHECK(psi_jump(ModelKind::hawkes, q, hc, 0.3) == doctest::Approx(hand).epsilon(5e-8));
}

TEST_CASE("psi_cox equals the double integral of bar F") {
    const AlphaConstants c = alpha_constants_cox(fixtures::cox_a(), fixtures::cox_a_jumps());
    ExitTimeQuery q = query(1.0, 0.25);
    q.x_t = -0.05;
    q.m_t = 0.12;
    q.lambda_t = 0.04;
    for (double j : {0.1, 0.3, -0.2}) {
        // Midpoint quadrature of (1/a2) e^{-a1 (x - X_t)} e^{-a2 (r - lambda_t)} over
        // x in [M_t - J, M_t] and r in [0, 40/a2].
        const double a = q.m_t - j;
        const double lo = std::min(a, q.m_t), hi = std::max(a, q.m_t);
        const int nx = 4000, nr = 40000;
        const double hx = (hi - lo) / nx, rmax = 40.0 / c.alpha2, hr = rmax / nr;
        double ix = 0.0, ir = 0.0;
        for (int i = 0; i < nx; ++i) ix += std::exp(-c.alpha1 * (lo + (i + 0.5) * hx - q.x_t)) * hx;
        for (int i = 0; i < nr; ++i) ir += std::exp(-c.alpha2 * ((i + 0.5) * hr - q.lambda_t)) * hr;
        const double oracle = (j >= 0 ? 1.0 : -1.0) * ix * ir / c.alpha2;
        CAPTURE(j);
        CHECK(psi_jump(ModelKind::cox, q, c, j) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("mc_first_passage trivial thresholds") {
    const SimGrid g(32, 2.0);
    const ModelConfig m{fixtures::hawkes_a(), fixtures::hawkes_jump()};
    McRunOptions o;
    o.n_paths = 500;
    const double inf = std::numeric_limits<double>::infinity();
    const McEstimate all = mc_first_passage(m, g, -inf, -inf, o);
    CHECK(all.value == 1.0);
    CHECK(all.se == 0.0);
    CHECK(mc_first_passage(m, g, 1e9, -inf, o).value == 0.0);
    CHECK(mc_first_passage(m, g, -inf, 1e9, o).value == 0.0);
    o.n_paths = 0;
    CHECK_THROWS_AS(mc_first_passage(m, g, 0, 0, o), ConfigError);
}

TEST_CASE("mc_first_passage follows the reflection principle") {
    McRunOptions o;
    o.n_paths = 20000;
    o.seed = 5;
    const double inf = std::numeric_limits<double>::infinity();
    const McEstimate est = mc_first_passage(fixtures::wiener(), SimGrid(64, 1.0), 1.0, -inf, o);
    const double exact = 2.0 * (1.0 - fixtures::normal_cdf(1.0));
    CHECK(exact == doctest::Approx(0.317311).epsilon(1e-6));
    CHECK(std::abs(est.value - exact) <= 3.0 * est.se);
}

TEST_CASE("mc_first_passage is worker-invariant") {
    const ModelConfig m{fixtures::cox_a(), fixtures::cox_a_jumps()};
    McRunOptions o;
    o.n_paths = 1000;
    const McEstimate a = mc_first_passage(m, SimGrid(32, 1.0), 0.1, 0.6, o);
    o.workers = 4;
    const McEstimate b = mc_first_passage(m, SimGrid(32, 1.0), 0.1, 0.6, o);
    CHECK(a.value == b.value);
}

TEST_CASE("dynkin check at s = 0 is exactly zero") {
    const ModelConfig m{fixtures::hawkes_a(), fixtures::hawkes_jump()};
    const AlphaConstants c = alpha_constants(m);
    McRunOptions o;
    o.n_paths = 200;
    const DynkinReport r = dynkin_martingale_check(m, SimGrid(64, 2.0), c, 0.5, 1.0, {0.0, 1.0}, o);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].deviation == 0.0);
    CHECK(r.points[0].se == 0.0);
    CHECK(r.u0 == doctest::Approx(std::exp(-c.alpha1 * 0.5 - c.alpha2 * 0.5)).epsilon(1e-15));
    CHECK(r.points[1].se > 0.0);
    CHECK_THROWS_AS(dynkin_martingale_check(m, SimGrid(64, 2.0), c, 0.5, 1.0, {3.0}, o), ConfigError);
}

TEST_CASE("dynkin check on a frozen deterministic state") {
    // No noise, no drift and alpha = 0: u stays put along every path.
    CoxParams p = fixtures::cox_a();
    p.mu = 0.0;
    p.sigma1 = 0.0;
    p.sigma2 = 0.0;
    p.lambda0 = p.theta;
    const ModelConfig m{p, {}};
    AlphaConstants c;
    c.model = ModelKind::cox;
    c.alpha1 = 2.0;
    c.alpha2 = 1.0;
    c.alpha = 0.0;
    McRunOptions o;
    o.n_paths = 64;
    const DynkinReport r = dynkin_martingale_check(m, SimGrid(16, 1.0), c, 1.0, 2.0, {0.0, 0.5, 1.0}, o);
    CHECK(r.max_deviation == 0.0);
    CHECK(r.max_z == 0.0);
}
