#pragma once

#include "lookback/model.hpp"
#include "lookback/path_sim.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace lookback {

// fixed_strike: (e^{M_T} - K)^+. floating_strike: e^{M_T} - S_T. M_T is the
// monitored maximum of ln S.
enum class PayoffKind { fixed_strike, floating_strike };

PayoffKind parse_payoff(std::string_view name);
const char* to_string(PayoffKind payoff);

struct PriceOptions {
    PayoffKind payoff = PayoffKind::fixed_strike;
    double strike = 1.0;
    std::optional<double> rate;  // defaults to mu
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Monitoring monitoring = Monitoring::bridge;
};

struct PriceResult {
    double price = 0.0;
    double se = 0.0;
    PayoffKind payoff = PayoffKind::fixed_strike;
    double strike = 0.0;
    double rate = 0.0;
    std::size_t n_paths = 0;
};

PriceResult price_lookback(const ModelConfig& model, const SimGrid& grid, const PriceOptions& options);

}  // namespace lookback
