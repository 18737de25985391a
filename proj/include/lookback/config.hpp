#pragma once

#include "lookback/clark_ocone.hpp"
#include "lookback/laplace.hpp"
#include "lookback/model.hpp"
#include "lookback/pricing.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lookback {

struct RunConfig {
    ModelConfig model;
    SimGrid grid;
    std::uint64_t seed = 1;

    // [run]
    std::size_t paths = 200;
    std::size_t inner = 256;
    std::size_t ef_paths = 20000;
    unsigned workers = 1;
    IntegrandMode mode = IntegrandMode::nested_mc;
    SignConvention sign = SignConvention::theorem;
    bool clamp = false;
    LaplaceMethod method = LaplaceMethod::gaver_stehfest;
    Monitoring monitoring = Monitoring::bridge;
    double alpha1 = 2.0;
    bool cox_price_term = true;

    // [pricing]
    PayoffKind payoff = PayoffKind::fixed_strike;
    double strike = 1.0;
    std::optional<double> discount_rate;
    std::size_t price_paths = 100000;

    // [first_passage]; thresholds are absolute levels for X and lambda.
    std::vector<double> fp_b;
    std::vector<double> fp_e;
    std::size_t fp_paths = 20000;
    std::vector<double> checkpoints;

    CoOptions co_options() const;
    PriceOptions price_options() const;
    McRunOptions mc_options(std::size_t n_paths) const;

    // Canonical JSON of every effective setting, and its FNV-1a hash.
    std::string canonical_json() const;
    std::string hash() const;
};

// Parses the structured-text config (a TOML subset) or JSON when the text
// starts with '{'. Throws ConfigError on syntax errors, unknown keys and
// invalid parameters.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace lookback
