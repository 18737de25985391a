#include "lookback/pricing.hpp"

#include "lookback/errors.hpp"
#include "lookback/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lookback {

PayoffKind parse_payoff(std::string_view name) {
    if (name == "fixed" || name == "fixed_strike") return PayoffKind::fixed_strike;
    if (name == "floating" || name == "floating_strike") return PayoffKind::floating_strike;
    throw ConfigError("unknown payoff '" + std::string(name) + "'");
}

const char* to_string(PayoffKind payoff) {
    return payoff == PayoffKind::fixed_strike ? "fixed" : "floating";
}

PriceResult price_lookback(const ModelConfig& model, const SimGrid& grid, const PriceOptions& options) {
    if (options.n_paths < 2) throw ConfigError("pricing needs at least two paths");
    PriceResult out;
    out.payoff = options.payoff;
    out.strike = options.strike;
    out.rate = options.rate.value_or(model.mu());
    out.n_paths = options.n_paths;
    const double discount = std::exp(-out.rate * grid.horizon);

    const std::size_t n = options.n_paths;
    std::vector<double> pay(n);
    const StreamId root = root_stream(options.seed, StreamPurpose::pricing);
    SimOptions sim_options;
    sim_options.monitoring = options.monitoring;
    sim_options.record_rejected = false;
    const std::size_t chunk = 256;
    parallel_for((n + chunk - 1) / chunk, std::max(1u, options.workers), [&](std::size_t ci) {
        PathSimulator sim(model, grid, sim_options);
        SimPath path;
        for (std::size_t i = ci * chunk; i < std::min(n, (ci + 1) * chunk); ++i) {
            sim.simulate(root.child(i), path);
            const double top = std::exp(path.log_s_max());
            const double v = options.payoff == PayoffKind::fixed_strike ? std::max(top - options.strike, 0.0)
                                                                        : top - std::exp(path.log_s.back());
            pay[i] = discount * v;
        }
    });
    double sum = 0.0;
    for (double v : pay) sum += v;
    out.price = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : pay) ss += (v - out.price) * (v - out.price);
    out.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return out;
}

}  // namespace lookback
