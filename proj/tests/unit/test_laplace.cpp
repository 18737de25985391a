#include "lookback/errors.hpp"
#include "lookback/laplace.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lookback;
using cld = std::complex<long double>;

namespace {

const LaplaceMethod kMethods[] = {LaplaceMethod::gaver_stehfest, LaplaceMethod::talbot};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("analytic transform pairs invert to 1e-6 with both methods") {
    for (LaplaceMethod m : kMethods) {
        for (double t : {0.5, 1.0, 2.0}) {
            CAPTURE(to_string(m));
            CAPTURE(t);
            CHECK(rel_err(inverse_laplace([](cld u) { return 1.0L / u; }, t, m), 1.0) <= 1e-6);
            CHECK(rel_err(inverse_laplace([](cld u) { return 1.0L / (u + 1.0L); }, t, m), std::exp(-t)) <= 1e-6);
            CHECK(rel_err(inverse_laplace([](cld u) { return 1.0L / (u * u); }, t, m), t) <= 1e-6);
        }
    }
}

TEST_CASE("unit step inverts to one within 1e-8") {
    for (LaplaceMethod m : kMethods) {
        for (double t : {0.01, 0.3, 1.0, 7.0, 50.0}) CHECK(std::abs(unit_step_inverse(t, m) - 1.0) < 1e-8);
    }
}

TEST_CASE("e^{-1} at t = 1") {
    for (LaplaceMethod m : kMethods) {
        CHECK(std::abs(inverse_laplace([](cld u) { return 1.0L / (u + 1.0L); }, 1.0, m) - 0.3678794) < 1e-6);
    }
}

TEST_CASE("sin t from 1/(u^2+1) with Talbot") {
    const double v = inverse_laplace([](cld u) { return 1.0L / (u * u + 1.0L); }, 1.0, LaplaceMethod::talbot);
    CHECK(v == doctest::Approx(std::sin(1.0)).epsilon(1e-9));
}

TEST_CASE("explicit orders are honoured") {
    const auto f = [](cld u) { return 1.0L / (u + 1.0L); };
    const double low = inverse_laplace(f, 2.0, LaplaceMethod::gaver_stehfest, 6);
    const double high = inverse_laplace(f, 2.0, LaplaceMethod::gaver_stehfest, 20);
    CHECK(std::abs(high - std::exp(-2.0)) < std::abs(low - std::exp(-2.0)));
    CHECK_THROWS_AS(inverse_laplace(f, 1.0, LaplaceMethod::gaver_stehfest, 7), ConfigError);
}

TEST_CASE("non-finite transform values raise EvaluationFailed") {
    const auto bad = [](cld) { return cld(std::numeric_limits<long double>::quiet_NaN(), 0.0L); };
    for (LaplaceMethod m : kMethods) CHECK_THROWS_AS(inverse_laplace(bad, 1.0, m), EvaluationFailed);
    const auto pole = [](cld u) { return 1.0L / (u - u); };
    CHECK_THROWS_AS(inverse_laplace(pole, 1.0, LaplaceMethod::gaver_stehfest), EvaluationFailed);
}

TEST_CASE("t must be positive") {
    const auto f = [](cld u) { return 1.0L / u; };
    CHECK_THROWS_AS(inverse_laplace(f, 0.0, LaplaceMethod::talbot), ConfigError);
    CHECK_THROWS_AS(inverse_laplace(f, -1.0, LaplaceMethod::gaver_stehfest), ConfigError);
}

TEST_CASE("method names") {
    CHECK(parse_laplace_method("gaver") == LaplaceMethod::gaver_stehfest);
    CHECK(parse_laplace_method("stehfest") == LaplaceMethod::gaver_stehfest);
    CHECK(parse_laplace_method("talbot") == LaplaceMethod::talbot);
    CHECK_THROWS_AS(parse_laplace_method("euler"), ConfigError);
}
