#include "lookback/laplace.hpp"

#include "lookback/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace lookback {

namespace {

// V_k h! is an integer: sum_j j^{h+1} C(h,j) C(2j,j) C(j,k-j), which fits in
// 128 bits for the orders we allow. Exact integers keep the alternating sum clean.
__int128 binomial(int n, int r) {
    __int128 c = 1;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

// Returns V_k h! (exact in long double up to n = 20) and h! separately.
std::vector<long double> stehfest_weights(int n, long double& h_fact) {
    const int half = n / 2;
    h_fact = 1.0L;
    for (int i = 2; i <= half; ++i) h_fact *= i;
    std::vector<long double> v(n + 1, 0.0L);
    for (int k = 1; k <= n; ++k) {
        __int128 acc = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            __int128 power = 1;
            for (int i = 0; i <= half; ++i) power *= j;
            acc += power * binomial(half, j) * binomial(2 * j, j) * binomial(j, k - j);
        }
        v[k] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * static_cast<long double>(acc);
    }
    return v;
}

std::complex<long double> checked(const LaplaceTransform& f, std::complex<long double> u) {
    const std::complex<long double> value = f(u);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw EvaluationFailed("Laplace transform is not finite at u = (" + std::to_string(u.real()) + ", " +
                               std::to_string(u.imag()) + ")");
    }
    return value;
}

double gaver_stehfest(const LaplaceTransform& f, double t, int n) {
    if (n < 2 || n % 2 != 0 || n > 24) throw ConfigError("Gaver-Stehfest order must be even, between 2 and 24");
    long double h_fact = 1.0L;
    const std::vector<long double> v = stehfest_weights(n, h_fact);
    // Trim a to 58 significant bits so every node k a is exact, then sum the
    // products with error-free transforms: the weights reach 1e12 and cancel.
    int e2 = 0;
    const long double mant = std::frexp(std::numbers::ln2_v<long double> / t, &e2);
    const long double a = std::ldexp(std::round(std::ldexp(mant, 58)), e2 - 58);
    long double sum = 0.0L, comp = 0.0L;
    for (int k = 1; k <= n; ++k) {
        const long double fk = checked(f, {k * a, 0.0L}).real();
        const long double p = v[k] * fk;
        const long double p_err = std::fma(v[k], fk, -p);
        const long double s = sum + p;
        const long double bb = s - sum;
        comp += (sum - (s - bb)) + (p - bb) + p_err;
        sum = s;
    }
    const long double acc = sum + comp;
    return static_cast<double>(a * acc / h_fact);
}

// Fixed Talbot contour (Abate and Valko, 2004).
double talbot(const LaplaceTransform& f, double t, int m) {
    if (m < 2) throw ConfigError("Talbot needs at least 2 nodes");
    using C = std::complex<long double>;
    const long double tt = t;
    const long double r = 2.0L * m / (5.0L * tt);
    long double acc = 0.5L * std::exp(r * tt) * checked(f, {r, 0.0L}).real();
    for (int k = 1; k < m; ++k) {
        const long double theta = k * std::numbers::pi_v<long double> / m;
        const long double cot = 1.0L / std::tan(theta);
        const C s = r * theta * C(cot, 1.0L);
        const long double sigma = theta + (theta * cot - 1.0L) * cot;
        acc += (std::exp(tt * s) * checked(f, s) * C(1.0L, sigma)).real();
    }
    return static_cast<double>(r / m * acc);
}

}  // namespace

LaplaceMethod parse_laplace_method(std::string_view name) {
    if (name == "gaver" || name == "gaver_stehfest" || name == "stehfest") return LaplaceMethod::gaver_stehfest;
    if (name == "talbot") return LaplaceMethod::talbot;
    throw ConfigError("unknown Laplace inversion method '" + std::string(name) + "'");
}

const char* to_string(LaplaceMethod method) {
    return method == LaplaceMethod::talbot ? "talbot" : "gaver_stehfest";
}

double inverse_laplace(const LaplaceTransform& transform, double t, LaplaceMethod method, int order) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("inverse Laplace needs t > 0");
    if (method == LaplaceMethod::talbot) return talbot(transform, t, order > 0 ? order : kDefaultTalbotNodes);
    return gaver_stehfest(transform, t, order > 0 ? order : kDefaultStehfestTerms);
}

double unit_step_inverse(double t, LaplaceMethod method) {
    return inverse_laplace([](std::complex<long double> u) { return 1.0L / u; }, t, method);
}

}  // namespace lookback
