#include "lookback/lookback.h"

#include "lookback/clark_ocone.hpp"
#include "lookback/config.hpp"
#include "lookback/errors.hpp"
#include "lookback/first_passage.hpp"
#include "lookback/io.hpp"
#include "lookback/laplace.hpp"
#include "lookback/pricing.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

struct lbk_config {
    lookback::RunConfig run;
    std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Maps the exception families onto status codes.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return LBK_OK;
    } catch (const lookback::ConfigError& e) {
        return fail(LBK_ERR_CONFIG, e.what());
    } catch (const lookback::NumericError& e) {
        return fail(LBK_ERR_NUMERIC, e.what());
    } catch (const lookback::IoError& e) {
        return fail(LBK_ERR_IO, e.what());
    } catch (const lookback::Error& e) {
        return fail(LBK_ERR_INTERNAL, e.what());
    } catch (const std::exception& e) {
        return fail(LBK_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(LBK_ERR_INTERNAL, "unknown error");
    }
}

#define LBK_REQUIRE(cond, what) \
    if (!(cond)) return fail(LBK_ERR_ARGUMENT, what)

int adopt(lookback::RunConfig run, lbk_config** out) {
    auto* cfg = new lbk_config{std::move(run), {}};
    cfg->warnings = cfg->run.model.validate().warnings;
    *out = cfg;
    return LBK_OK;
}

void write_guarded_dir(const char* out_dir) {
    lookback::ensure_directory(out_dir);
}

}  // namespace

extern "C" {

const char* lbk_last_error(void) {
    return g_last_error.c_str();
}

int lbk_config_load(const char* path, lbk_config** out) {
    LBK_REQUIRE(path && out, "null argument");
    *out = nullptr;
    return guarded([&] { adopt(lookback::load_config(path), out); });
}

int lbk_config_parse(const char* text, lbk_config** out) {
    LBK_REQUIRE(text && out, "null argument");
    *out = nullptr;
    return guarded([&] { adopt(lookback::parse_config(text), out); });
}

void lbk_config_free(lbk_config* cfg) {
    delete cfg;
}

int lbk_config_set_seed(lbk_config* cfg, uint64_t seed) {
    LBK_REQUIRE(cfg, "null config");
    cfg->run.seed = seed;
    return LBK_OK;
}

int lbk_config_set_paths(lbk_config* cfg, uint64_t paths) {
    LBK_REQUIRE(cfg, "null config");
    LBK_REQUIRE(paths > 0, "paths must be positive");
    cfg->run.paths = paths;
    cfg->run.price_paths = paths;
    cfg->run.fp_paths = paths;
    return LBK_OK;
}

int lbk_config_set_inner(lbk_config* cfg, uint64_t inner) {
    LBK_REQUIRE(cfg, "null config");
    LBK_REQUIRE(inner > 0, "inner must be positive");
    cfg->run.inner = inner;
    return LBK_OK;
}

int lbk_config_set_workers(lbk_config* cfg, unsigned workers) {
    LBK_REQUIRE(cfg, "null config");
    cfg->run.workers = workers == 0 ? 1 : workers;
    return LBK_OK;
}

int lbk_config_set_steps(lbk_config* cfg, uint64_t n_steps) {
    LBK_REQUIRE(cfg, "null config");
    return guarded([&] { cfg->run.grid = lookback::SimGrid(n_steps, cfg->run.grid.horizon); });
}

int lbk_config_set_method(lbk_config* cfg, const char* method) {
    LBK_REQUIRE(cfg && method, "null argument");
    return guarded([&] { cfg->run.method = lookback::parse_laplace_method(method); });
}

int lbk_config_set_mode(lbk_config* cfg, const char* mode) {
    LBK_REQUIRE(cfg && mode, "null argument");
    return guarded([&] { cfg->run.mode = lookback::parse_integrand_mode(mode); });
}

int lbk_config_set_sign(lbk_config* cfg, const char* sign) {
    LBK_REQUIRE(cfg && sign, "null argument");
    return guarded([&] { cfg->run.sign = lookback::parse_sign_convention(sign); });
}

int lbk_config_set_clamp(lbk_config* cfg, int clamp) {
    LBK_REQUIRE(cfg, "null config");
    cfg->run.clamp = clamp != 0;
    return LBK_OK;
}

int lbk_config_set_monitoring(lbk_config* cfg, const char* monitoring) {
    LBK_REQUIRE(cfg && monitoring, "null argument");
    const std::string m = monitoring;
    if (m == "bridge") {
        cfg->run.monitoring = lookback::Monitoring::bridge;
    } else if (m == "discrete") {
        cfg->run.monitoring = lookback::Monitoring::discrete;
    } else {
        return fail(LBK_ERR_CONFIG, "unknown monitoring '" + m + "'");
    }
    return LBK_OK;
}

int lbk_config_set_payoff(lbk_config* cfg, const char* payoff, double strike) {
    LBK_REQUIRE(cfg && payoff, "null argument");
    return guarded([&] {
        cfg->run.payoff = lookback::parse_payoff(payoff);
        if (!std::isnan(strike)) cfg->run.strike = strike;
    });
}

int lbk_config_set_discount_rate(lbk_config* cfg, double rate) {
    LBK_REQUIRE(cfg, "null config");
    cfg->run.discount_rate = rate;
    return LBK_OK;
}

int lbk_config_hash(const lbk_config* cfg, char out[17]) {
    LBK_REQUIRE(cfg && out, "null argument");
    const std::string h = cfg->run.hash();
    std::memcpy(out, h.c_str(), 17);
    return LBK_OK;
}

int lbk_config_echo(const lbk_config* cfg, char* buf, size_t cap, size_t* needed) {
    LBK_REQUIRE(cfg, "null config");
    const std::string echo = cfg->run.canonical_json();
    if (needed) *needed = echo.size() + 1;
    if (buf && cap > 0) {
        const size_t n = std::min(cap - 1, echo.size());
        std::memcpy(buf, echo.data(), n);
        buf[n] = '\0';
    }
    return LBK_OK;
}

int lbk_config_warnings(const lbk_config* cfg, size_t* count) {
    LBK_REQUIRE(cfg && count, "null argument");
    *count = cfg->warnings.size();
    return LBK_OK;
}

const char* lbk_config_warning(const lbk_config* cfg, size_t index) {
    if (!cfg || index >= cfg->warnings.size()) return nullptr;
    return cfg->warnings[index].c_str();
}

int lbk_constants_compute(const lbk_config* cfg, lbk_constants* out) {
    LBK_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        const auto& model = cfg->run.model;
        const lookback::AlphaConstants c = lookback::alpha_constants(model, cfg->run.alpha1);
        out->alpha1 = c.alpha1;
        out->alpha2 = c.alpha2;
        out->alpha3 = c.alpha3;
        out->alpha = c.alpha;
        out->model = model.kind() == lookback::ModelKind::cox ? 0 : 1;
        out->identity_residual = model.kind() == lookback::ModelKind::cox
                                     ? lookback::cox_identity_residual(c, model.cox())
                                     : lookback::hawkes_identity_residual(c, model.kappa());
    });
}

int lbk_invert_laplace(const char* fn, double t, const char* method, int order, double* out) {
    LBK_REQUIRE(fn && out, "null argument");
    using C = std::complex<long double>;
    const std::string name = fn;
    lookback::LaplaceTransform f;
    if (name == "one_over_s") {
        f = [](C u) { return 1.0L / u; };
    } else if (name == "one_over_s_plus_1") {
        f = [](C u) { return 1.0L / (u + 1.0L); };
    } else if (name == "one_over_s2") {
        f = [](C u) { return 1.0L / (u * u); };
    } else {
        return fail(LBK_ERR_CONFIG, "unknown transform '" + name + "'");
    }
    return guarded([&] {
        const auto m = lookback::parse_laplace_method(method ? method : "gaver");
        *out = lookback::inverse_laplace(f, t, m, order);
    });
}

int lbk_simulate(const lbk_config* cfg, const char* out_dir, uint64_t path_id, lbk_simulate_summary* out) {
    LBK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        const auto& run = cfg->run;
        lookback::SimOptions options;
        options.monitoring = run.monitoring;
        lookback::PathSimulator sim(run.model, run.grid, options);
        const lookback::SimPath path =
            sim.simulate(lookback::root_stream(run.seed, lookback::StreamPurpose::outer_path).child(path_id));
        write_guarded_dir(out_dir);
        const std::string hash = run.hash();
        lookback::write_path_csv(lookback::join_path(out_dir, "path.csv"), path, hash);
        lookback::write_events_csv(lookback::join_path(out_dir, "events.csv"), path, hash);
        if (out) {
            out->max_value = path.max_value();
            out->final_x = path.x.back();
            out->final_lambda = path.lambda.back();
            uint64_t accepted = 0;
            for (const auto& ev : path.events) accepted += ev.accepted;
            out->events = accepted;
        }
    });
}

int lbk_price(const lbk_config* cfg, lbk_price_result* out) {
    LBK_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        const auto r = lookback::price_lookback(cfg->run.model, cfg->run.grid, cfg->run.price_options());
        out->price = r.price;
        out->se = r.se;
        out->rate = r.rate;
        out->n_paths = r.n_paths;
    });
}

int lbk_verify_clark_ocone(const lbk_config* cfg, const char* out_dir, lbk_co_summary* out) {
    LBK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        const auto& run = cfg->run;
        const lookback::ClarkOconeReport rep = lookback::reconstruct(run.model, run.grid, run.co_options());
        write_guarded_dir(out_dir);
        const std::string hash = run.hash();
        {
            lookback::CsvWriter csv(lookback::join_path(out_dir, "clark_ocone.csv"),
                                    {"path_id", "F", "F_hat", "residual"}, hash);
            for (const auto& row : rep.rows) {
                csv.field(row.path_id).field(row.f).field(row.f_hat).field(row.residual);
                csv.end_row();
            }
        }
        auto stream = [](lookback::StreamId id) { return nlohmann::json{{"key", id.key}, {"lane", id.lane}}; };
        nlohmann::json summary = {
            {"config_hash", hash},
            {"config", nlohmann::json::parse(run.canonical_json())},
            {"ef_hat", rep.ef.value},
            {"se", rep.ef.se},
            {"resid_mean", rep.resid_mean},
            {"resid_se", rep.resid_se},
            {"resid_var", rep.resid_var},
            {"resid_var_other_sign", rep.resid_var_alt},
            {"corr", rep.corr},
            {"psi_discrepancy", rep.psi_discrepancy},
            {"sign", lookback::to_string(rep.sign)},
            {"mode", lookback::to_string(rep.mode)},
            {"n_paths", rep.n_paths},
            {"n_inner", rep.n_inner},
            {"n_steps", rep.n_steps},
            {"streams", {{"ef", stream(rep.ef_stream)}, {"outer", stream(rep.outer_stream)}, {"inner", stream(rep.inner_stream)}}},
        };
        lookback::write_text_file(lookback::join_path(out_dir, "clark_ocone_summary.json"), summary.dump(2) + "\n");
        if (out) {
            out->ef_hat = rep.ef.value;
            out->ef_se = rep.ef.se;
            out->resid_mean = rep.resid_mean;
            out->resid_se = rep.resid_se;
            out->resid_var = rep.resid_var;
            out->resid_var_alt = rep.resid_var_alt;
            out->corr = rep.corr;
            out->psi_discrepancy = rep.psi_discrepancy;
            out->n_paths = rep.n_paths;
        }
    });
}

int lbk_first_passage(const lbk_config* cfg, const char* out_dir, uint64_t* rows) {
    LBK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        const auto& run = cfg->run;
        const auto& model = run.model;
        lookback::PathSimulator probe(model, run.grid);
        const lookback::PathState s0 = probe.initial_state();
        std::vector<double> bs = run.fp_b, es = run.fp_e;
        if (bs.empty()) bs = {s0.x + 0.25, s0.x + 0.5, s0.x + 1.0};
        if (es.empty()) es = {model.lambda0()};

        bool have_closed = true;
        lookback::AlphaConstants c;
        try {
            c = lookback::alpha_constants(model, run.alpha1);
        } catch (const lookback::NumericError&) {
            have_closed = false;
        }
        lookback::TailOptions tail;
        tail.method = run.method;

        write_guarded_dir(out_dir);
        lookback::CsvWriter csv(lookback::join_path(out_dir, "first_passage.csv"),
                                {"threshold_b", "threshold_e", "closed_form", "mc_estimate", "mc_se", "clamped"},
                                run.hash());
        uint64_t count = 0;
        for (double b : bs) {
            for (double e : es) {
                lookback::ExitTimeQuery q;
                q.horizon = run.grid.horizon;
                q.b = b;
                q.e = e;
                q.x_t = s0.x;
                q.lambda_t = s0.lambda;
                q.m_t = s0.x;
                std::string closed = "", clamped = "";
                if (have_closed) {
                    const lookback::TailValue v = model.kind() == lookback::ModelKind::cox
                                                      ? lookback::bar_F_cox(q, c, tail)
                                                      : lookback::tail_supX_hawkes(q, c, tail);
                    closed = lookback::format_double(v.value);
                    clamped = v.clamped ? "1" : "0";
                }
                const auto mc = lookback::mc_first_passage(model, run.grid, b, e, run.mc_options(run.fp_paths));
                csv.field(b).field(e).field(std::string_view(closed)).field(mc.value).field(mc.se);
                csv.field(std::string_view(clamped));
                csv.end_row();
                ++count;
            }
        }
        if (rows) *rows = count;
    });
}

int lbk_hedge(const lbk_config* cfg, const char* out_dir, uint64_t path_id, uint64_t* rows) {
    LBK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        const auto& run = cfg->run;
        const auto table = lookback::hedge_table(run.model, run.grid, run.co_options(), path_id);
        write_guarded_dir(out_dir);
        lookback::CsvWriter csv(lookback::join_path(out_dir, "hedge.csv"),
                                {"t", "phi", "psi_weighted", "phi_intensity"}, run.hash());
        for (const auto& r : table) {
            csv.field(r.t).field(r.phi).field(r.psi_weighted).field(r.phi_intensity);
            csv.end_row();
        }
        if (rows) *rows = table.size();
    });
}

}  // extern "C"
