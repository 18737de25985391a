#pragma once

#include <complex>
#include <functional>
#include <string_view>

namespace lookback {

enum class LaplaceMethod { gaver_stehfest, talbot };

// F(u) for complex u. Gaver-Stehfest only evaluates it on the positive real axis.
using LaplaceTransform = std::function<std::complex<long double>(std::complex<long double>)>;

inline constexpr int kDefaultStehfestTerms = 20;
inline constexpr int kDefaultTalbotNodes = 32;

LaplaceMethod parse_laplace_method(std::string_view name);
const char* to_string(LaplaceMethod method);

// f(t) from F. order <= 0 picks the method default. Throws EvaluationFailed
// when F is not finite at a node.
double inverse_laplace(const LaplaceTransform& transform, double t, LaplaceMethod method, int order = 0);

// L^{-1}(1/u)(t)
double unit_step_inverse(double t, LaplaceMethod method = LaplaceMethod::gaver_stehfest);

}  // namespace lookback
