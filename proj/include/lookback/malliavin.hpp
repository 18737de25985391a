#pragma once

#include "lookback/model.hpp"
#include "lookback/path_sim.hpp"

#include <cstddef>

namespace lookback {

inline constexpr double kLambdaFloor = 1e-12;

// What d1_lambda_cir does when the intensity reaches the floor: raise
// IntensityHitZero, or clamp lambda up to the floor and carry on.
enum class FloorMode { error, clamp };

struct D1Sample {
    double t = 0.0;
    double value = 0.0;
};

struct D2Sample {
    double t = 0.0;
    double z = 0.0;
    double value = 0.0;
};

// C_sigma = kappa theta / 2 - sigma2^2 / 8
double cir_c_sigma(const CoxParams& params);

// D_s lambda_t = sigma2 sqrt(lambda_t) exp(-int_s^t (kappa/2 + C_sigma/lambda_r) dr),
// trapezoid on the grid.
double d1_lambda_cir(const CoxParams& params, const SimPath& path, std::size_t s_idx, std::size_t t_idx,
                     FloorMode floor = FloorMode::error);

// Magnitude of the W-derivative of M_T:
// 1{t <= tau} int_t^tau mu_bar(s) D_t lambda_s ds. The caller owns the sign.
double d1_max_cox(const CoxParams& params, const JumpSpec& spec, const SimPath& path, std::size_t t_idx,
                  FloorMode floor = FloorMode::error);

// W^S-derivative of M_T: sigma1 1{t <= tau}. Same for both models.
double d1_max_price(double sigma1, const SimPath& path, std::size_t t_idx);
double d1_max_hawkes(const HawkesParams& params, const SimPath& path, std::size_t t_idx);

// max{M_t, M_{t,T} + J} - M_T for a Cox jump of size `jump` inserted just after t.
double d2_max_cox(const SimPath& path, std::size_t t_idx, double jump);
double d2_max_cox(const JumpSpec& spec, const SimPath& path, std::size_t t_idx, double z);

// max{M_t, sup Z + K} - M_T from a cascade already computed on `path`.
double d2_from_cascade(const SimPath& path, const PerturbedPath& pert);
double d2_max_hawkes(PathSimulator& sim, const SimPath& path, std::size_t t_idx, double z);

}  // namespace lookback
