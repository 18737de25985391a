// Command-line front end. Talks to the library only through the C API.
#include "lookback/lookback.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::optional<std::uint64_t> inner;
    std::optional<std::uint64_t> steps;
    std::optional<unsigned> workers;
    std::optional<std::string> method;
    std::optional<std::string> mode;
    std::optional<std::string> sign;
    std::optional<std::string> monitoring;
    bool clamp = false;
};

using ConfigPtr = std::unique_ptr<lbk_config, decltype(&lbk_config_free)>;

int report(int status) {
    if (status != LBK_OK) std::fprintf(stderr, "error: %s\n", lbk_last_error());
    return status;
}

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
    cmd->add_option("--config", c.config, "config file (TOML subset or JSON)")->required();
    if (needs_out) cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--paths", c.paths, "outer / Monte Carlo path count");
    cmd->add_option("--inner", c.inner, "inner continuations per node");
    cmd->add_option("--steps", c.steps, "grid steps");
    cmd->add_option("--workers", c.workers, "worker threads (results do not depend on it)");
    cmd->add_option("--method", c.method, "inverse Laplace method")->check(CLI::IsMember({"gaver", "talbot"}));
    cmd->add_option("--mode", c.mode, "integrand mode")->check(CLI::IsMember({"closed", "nested", "both"}));
    cmd->add_option("--sign", c.sign, "sign of the intensity-noise term")->check(CLI::IsMember({"theorem", "raw"}));
    cmd->add_option("--monitoring", c.monitoring, "max monitoring")->check(CLI::IsMember({"bridge", "discrete"}));
    cmd->add_flag("--clamp", c.clamp, "clamp the intensity at the floor instead of failing");
}

// Loads the config and applies flag overrides; returns a status code.
int open_config(const Common& c, ConfigPtr& cfg) {
    lbk_config* raw = nullptr;
    int st = lbk_config_load(c.config.c_str(), &raw);
    if (st != LBK_OK) return st;
    cfg.reset(raw);
    if (c.seed && (st = lbk_config_set_seed(raw, *c.seed))) return st;
    if (c.paths && (st = lbk_config_set_paths(raw, *c.paths))) return st;
    if (c.inner && (st = lbk_config_set_inner(raw, *c.inner))) return st;
    if (c.steps && (st = lbk_config_set_steps(raw, *c.steps))) return st;
    if (c.workers && (st = lbk_config_set_workers(raw, *c.workers))) return st;
    if (c.method && (st = lbk_config_set_method(raw, c.method->c_str()))) return st;
    if (c.mode && (st = lbk_config_set_mode(raw, c.mode->c_str()))) return st;
    if (c.sign && (st = lbk_config_set_sign(raw, c.sign->c_str()))) return st;
    if (c.monitoring && (st = lbk_config_set_monitoring(raw, c.monitoring->c_str()))) return st;
    if (c.clamp && (st = lbk_config_set_clamp(raw, 1))) return st;
    std::size_t n = 0;
    lbk_config_warnings(raw, &n);
    for (std::size_t i = 0; i < n; ++i) std::fprintf(stderr, "warning: %s\n", lbk_config_warning(raw, i));
    return LBK_OK;
}

void print_hash(const lbk_config* cfg) {
    char hash[17];
    lbk_config_hash(cfg, hash);
    std::printf("config_hash = %s\n", hash);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lookback running-maximum toolkit: simulation, Clark-Ocone checks, exit-time tails, pricing"};
    app.require_subcommand(1);

    Common c;
    auto* simulate = app.add_subcommand("simulate", "simulate one path and write path.csv / events.csv");
    add_common(simulate, c, true);
    std::uint64_t path_id = 0;
    simulate->add_option("--path-id", path_id, "outer path index");

    auto* price = app.add_subcommand("price", "Monte Carlo lookback price");
    add_common(price, c, false);
    std::optional<std::string> payoff;
    std::optional<double> strike, rate;
    price->add_option("--payoff", payoff, "fixed | floating")->check(CLI::IsMember({"fixed", "floating"}));
    price->add_option("--strike", strike, "strike for the fixed-strike call");
    price->add_option("--rate", rate, "discount rate (default: mu)");

    auto* verify = app.add_subcommand("verify-clark-ocone", "reconstruct M_T from its integrands on fresh paths");
    add_common(verify, c, true);

    auto* passage = app.add_subcommand("first-passage", "closed-form tails next to the Monte Carlo oracle");
    add_common(passage, c, true);

    auto* hedge = app.add_subcommand("hedge", "integrands along one realised path");
    add_common(hedge, c, true);
    hedge->add_option("--path-id", path_id, "outer path index");

    auto* constants = app.add_subcommand("constants", "exit-time constants alpha1, alpha2, alpha3, alpha");
    add_common(constants, c, false);

    auto* invert = app.add_subcommand("invert-laplace", "numerically invert a test transform");
    std::string fn;
    double t = 1.0;
    std::string inv_method = "gaver";
    int order = 0;
    invert->add_option("--fn", fn, "one_over_s | one_over_s_plus_1 | one_over_s2")->required();
    invert->add_option("--t", t, "time")->required();
    invert->add_option("--method", inv_method, "gaver | talbot")->check(CLI::IsMember({"gaver", "talbot"}));
    invert->add_option("--order", order, "terms (Gaver-Stehfest) or nodes (Talbot); 0 = default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : LBK_ERR_ARGUMENT;
    }

    if (invert->parsed()) {
        double v = 0.0;
        const int st = lbk_invert_laplace(fn.c_str(), t, inv_method.c_str(), order, &v);
        if (st != LBK_OK) return report(st);
        std::printf("%.12g\n", v);
        return 0;
    }

    ConfigPtr cfg(nullptr, &lbk_config_free);
    int st = open_config(c, cfg);
    if (st != LBK_OK) return report(st);

    if (constants->parsed()) {
        lbk_constants k;
        if ((st = lbk_constants_compute(cfg.get(), &k))) return report(st);
        std::printf("model = %s\n", k.model == 0 ? "cox" : "hawkes");
        std::printf("alpha1 = %.9g\nalpha2 = %.9g\n", k.alpha1, k.alpha2);
        if (k.model == 1) std::printf("alpha3 = %.9g\n", k.alpha3);
        std::printf("alpha = %.9g\nidentity_residual = %.3g\n", k.alpha, k.identity_residual);
        return 0;
    }
    if (simulate->parsed()) {
        lbk_simulate_summary s;
        if ((st = lbk_simulate(cfg.get(), c.out.c_str(), path_id, &s))) return report(st);
        print_hash(cfg.get());
        std::printf("M_T = %.9g\nX_T = %.9g\nlambda_T = %.9g\nevents = %llu\n", s.max_value, s.final_x,
                    s.final_lambda, static_cast<unsigned long long>(s.events));
        return 0;
    }
    if (price->parsed()) {
        if (payoff || strike) {
            const char* kind = payoff ? payoff->c_str() : "fixed";
            if ((st = lbk_config_set_payoff(cfg.get(), kind, strike.value_or(std::nan(""))))) return report(st);
        }
        if (rate && (st = lbk_config_set_discount_rate(cfg.get(), *rate))) return report(st);
        lbk_price_result r;
        if ((st = lbk_price(cfg.get(), &r))) return report(st);
        print_hash(cfg.get());
        std::printf("price = %.9g\nse = %.3g\nrate = %.9g\npaths = %llu\n", r.price, r.se, r.rate,
                    static_cast<unsigned long long>(r.n_paths));
        return 0;
    }
    if (verify->parsed()) {
        lbk_co_summary s;
        if ((st = lbk_verify_clark_ocone(cfg.get(), c.out.c_str(), &s))) return report(st);
        print_hash(cfg.get());
        std::printf("ef_hat = %.9g (se %.3g)\nresid_mean = %.6g (se %.3g)\nresid_var = %.6g\n", s.ef_hat, s.ef_se,
                    s.resid_mean, s.resid_se, s.resid_var);
        std::printf("resid_var_other_sign = %.6g\ncorr = %.6f\n", s.resid_var_alt, s.corr);
        return 0;
    }
    if (passage->parsed()) {
        std::uint64_t rows = 0;
        if ((st = lbk_first_passage(cfg.get(), c.out.c_str(), &rows))) return report(st);
        print_hash(cfg.get());
        std::printf("rows = %llu\n", static_cast<unsigned long long>(rows));
        return 0;
    }
    if (hedge->parsed()) {
        std::uint64_t rows = 0;
        if ((st = lbk_hedge(cfg.get(), c.out.c_str(), path_id, &rows))) return report(st);
        print_hash(cfg.get());
        std::printf("rows = %llu\n", static_cast<unsigned long long>(rows));
        return 0;
    }
    return 0;
}
