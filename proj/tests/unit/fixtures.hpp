#pragma once

#include "lookback/model.hpp"

#include <cmath>

namespace fixtures {

inline lookback::CoxParams cox_a() {
    lookback::CoxParams p;
    p.mu = 0.05;
    p.sigma1 = 0.2;
    p.kappa = 2.0;
    p.theta = 1.0;
    p.sigma2 = 0.5;
    p.lambda0 = 0.5;
    p.s0 = 1.0;
    p.horizon = 1.0;
    return p;
}

inline lookback::JumpSpec cox_a_jumps() {
    lookback::JumpSpec spec;
    spec.atoms = {{1.0, 1.0}};
    spec.jump = lookback::LinearInMark{0.1};
    return spec;
}

inline lookback::HawkesParams hawkes_a(double horizon = 2.0) {
    lookback::HawkesParams p;
    p.mu = 0.05;
    p.sigma1 = 0.2;
    p.kappa = 1.0;
    p.theta = 0.5;
    p.eta = 0.5;
    p.lambda0 = 0.5;
    p.s0 = 1.0;
    p.horizon = horizon;
    return p;
}

inline lookback::JumpSpec hawkes_jump(double j = 0.3) {
    lookback::JumpSpec spec;
    spec.jump = lookback::ConstJump{j};
    return spec;
}

// X = W: no jumps and mu = sigma1^2 / 2.
inline lookback::ModelConfig wiener(double horizon = 1.0) {
    lookback::CoxParams p;
    p.mu = 0.5;
    p.sigma1 = 1.0;
    p.kappa = 1.0;
    p.theta = 1.0;
    p.sigma2 = 0.5;
    p.lambda0 = 1.0;
    p.horizon = horizon;
    return {p, {}};
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace fixtures
