#include "lookback/config.hpp"

#include "lookback/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace lookback {

using nlohmann::json;

namespace {

// Reads the subset of TOML the config files use: bare or dotted keys, [table]
// headers, strings, numbers, booleans, (nested, multi-line) arrays and inline
// tables. Everything lands in one json object.
class TomlReader {
public:
    explicit TomlReader(std::string_view text) : s_(text) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        for (;;) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                skip_space();
                const auto path = key_path();
                skip_space();
                expect(']');
                table = &descend(root, path, true);
            } else {
                const auto path = key_path();
                skip_space();
                expect('=');
                skip_space();
                json value = parse_value();
                json& parent = descend(*table, {path.begin(), path.end() - 1}, false);
                if (parent.contains(path.back())) fail("duplicate key '" + path.back() + "'");
                parent[path.back()] = std::move(value);
            }
            skip_space();
            if (!eof() && peek() == '#') skip_comment();
            if (!eof() && peek() != '\n' && peek() != '\r') fail("expected end of line");
        }
        return root;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
        throw ConfigError("config line " + std::to_string(line) + ": " + what);
    }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_blank_lines() {
        for (;;) {
            skip_space();
            if (eof()) return;
            if (peek() == '#') {
                skip_comment();
            } else if (peek() == '\n' || peek() == '\r') {
                ++pos_;
            } else {
                return;
            }
        }
    }

    // Whitespace, newlines and comments, as allowed inside arrays.
    void skip_all() {
        for (;;) {
            skip_space();
            if (eof()) return;
            if (peek() == '#') {
                skip_comment();
            } else if (peek() == '\n' || peek() == '\r') {
                ++pos_;
            } else {
                return;
            }
        }
    }

    std::string key() {
        if (!eof() && peek() == '"') return string_value();
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (start == pos_) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> path{key()};
        for (;;) {
            skip_space();
            if (eof() || peek() != '.') return path;
            ++pos_;
            skip_space();
            path.push_back(key());
        }
    }

    json& descend(json& from, const std::vector<std::string>& path, bool header) {
        json* cur = &from;
        for (const auto& k : path) {
            json& next = (*cur)[k];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) fail("key '" + k + "' is not a table");
            cur = &next;
        }
        (void)header;
        return *cur;
    }

    std::string string_value() {
        expect('"');
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof()) fail("unterminated string");
            const char e = s_[pos_++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail("unsupported escape");
            }
        }
    }

    json number_value() {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_')) {
            ++pos_;
        }
        std::string tok(s_.substr(start, pos_ - start));
        std::erase(tok, '_');
        if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
        if (tok == "-inf") return -std::numeric_limits<double>::infinity();
        const bool integral = tok.find_first_of(".eE") == std::string::npos;
        const char* b = tok.data() + (!tok.empty() && tok[0] == '+' ? 1 : 0);
        const char* e = tok.data() + tok.size();
        if (integral) {
            if (!tok.empty() && tok[0] == '-') {
                std::int64_t v = 0;
                const auto r = std::from_chars(b, e, v);
                if (r.ec == std::errc() && r.ptr == e) return v;
            } else {
                std::uint64_t v = 0;
                const auto r = std::from_chars(b, e, v);
                if (r.ec == std::errc() && r.ptr == e) return v;
            }
        }
        double v = 0.0;
        const auto r = std::from_chars(b, e, v);
        if (r.ec != std::errc() || r.ptr != e) fail("bad number '" + tok + "'");
        return v;
    }

    json parse_value() {
        if (eof()) fail("expected a value");
        const char c = peek();
        if (c == '"') return string_value();
        if (c == '[') {
            ++pos_;
            json arr = json::array();
            for (;;) {
                skip_all();
                if (!eof() && peek() == ']') {
                    ++pos_;
                    return arr;
                }
                arr.push_back(parse_value());
                skip_all();
                if (!eof() && peek() == ',') {
                    ++pos_;
                    continue;
                }
                skip_all();
                expect(']');
                return arr;
            }
        }
        if (c == '{') {
            ++pos_;
            json obj = json::object();
            skip_space();
            if (!eof() && peek() == '}') {
                ++pos_;
                return obj;
            }
            for (;;) {
                skip_space();
                const auto path = key_path();
                skip_space();
                expect('=');
                skip_space();
                json& parent = descend(obj, {path.begin(), path.end() - 1}, false);
                parent[path.back()] = parse_value();
                skip_space();
                if (!eof() && peek() == ',') {
                    ++pos_;
                    continue;
                }
                expect('}');
                return obj;
            }
        }
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number_value();
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// Pulls typed values out of the parsed document and remembers which keys were
// read, so leftovers can be reported as unknown.
class Fields {
public:
    explicit Fields(const json& doc) : doc_(doc) {}

    const json* find(const std::string& dotted) {
        const json* cur = &doc_;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = dotted.find('.', start);
            const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!cur->is_object() || !cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        used_.insert(dotted);
        return cur;
    }

    double number(const std::string& key, double fallback, bool required = false) {
        const json* v = find(key);
        if (!v) {
            if (required) throw ConfigError("missing required key '" + key + "'");
            return fallback;
        }
        if (!v->is_number()) throw ConfigError("key '" + key + "' must be a number");
        return v->get<double>();
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_unsigned()) {
            if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return v->get<std::uint64_t>();
            throw ConfigError("key '" + key + "' must be a nonnegative integer");
        }
        return v->get<std::uint64_t>();
    }

    std::string text(const std::string& key, const std::string& fallback, bool required = false) {
        const json* v = find(key);
        if (!v) {
            if (required) throw ConfigError("missing required key '" + key + "'");
            return fallback;
        }
        if (!v->is_string()) throw ConfigError("key '" + key + "' must be a string");
        return v->get<std::string>();
    }

    bool flag(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError("key '" + key + "' must be true or false");
        return v->get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json* v = find(key);
        if (!v) return {};
        std::vector<double> out;
        if (v->is_number()) return {v->get<double>()};
        if (!v->is_array()) throw ConfigError("key '" + key + "' must be an array of numbers");
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError("key '" + key + "' must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    void reject_unknown() const {
        std::vector<std::string> unknown;
        walk(doc_, "", unknown);
        if (!unknown.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : unknown) msg += " " + k;
            throw ConfigError(msg);
        }
    }

private:
    void walk(const json& node, const std::string& prefix, std::vector<std::string>& unknown) const {
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (used_.count(key)) continue;
            if (it->is_object()) {
                walk(*it, key, unknown);
            } else {
                unknown.push_back(key);
            }
        }
    }

    const json& doc_;
    std::set<std::string> used_;
};

JumpSpec read_jumps(Fields& f, ModelKind kind) {
    JumpSpec spec;
    if (const json* atoms = f.find("nu_atoms")) {
        if (kind == ModelKind::hawkes) throw ConfigError("nu_atoms is only used by the cox model");
        if (!atoms->is_array()) throw ConfigError("nu_atoms must be an array of [z, w] pairs");
        for (const auto& a : *atoms) {
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
                throw ConfigError("nu_atoms entries must be [z, w] pairs");
            }
            spec.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
        }
    }
    if (f.find("jump")) {
        const std::string kindname = f.text("jump.kind", "const");
        const double value = f.number("jump.value", 0.0);
        if (kindname == "const") {
            spec.jump = ConstJump{value};
        } else if (kindname == "linear_in_mark" || kindname == "linear") {
            spec.jump = LinearInMark{value};
        } else if (kindname == "time_affine" || kindname == "time") {
            spec.jump = TimeAffineJump{value, f.number("jump.slope", 0.0)};
        } else {
            throw ConfigError("unknown jump.kind '" + kindname + "'");
        }
    }
    return spec;
}

Monitoring parse_monitoring(const std::string& name) {
    if (name == "bridge") return Monitoring::bridge;
    if (name == "discrete") return Monitoring::discrete;
    throw ConfigError("unknown monitoring '" + name + "'");
}

json jump_json(const JumpSpec& spec) {
    return std::visit(
        [](const auto& fn) -> json {
            using T = std::decay_t<decltype(fn)>;
            if constexpr (std::is_same_v<T, ConstJump>) {
                return {{"kind", "const"}, {"value", fn.value}};
            } else if constexpr (std::is_same_v<T, LinearInMark>) {
                return {{"kind", "linear_in_mark"}, {"value", fn.slope}};
            } else {
                return {{"kind", "time_affine"}, {"value", fn.value}, {"slope", fn.slope}};
            }
        },
        spec.jump);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

RunConfig parse_config(std::string_view text) {
    std::size_t first = 0;
    while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    json doc;
    if (first < text.size() && text[first] == '{') {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config JSON: ") + e.what());
        }
    } else {
        doc = TomlReader(text).parse();
    }
    if (!doc.is_object()) throw ConfigError("config must be a table");

    Fields f(doc);
    RunConfig rc;
    const std::string model = f.text("model", "", true);
    double horizon = f.number("T", 1.0, !doc.contains("horizon"));
    if (doc.contains("horizon")) horizon = f.number("horizon", horizon);
    if (model == "cox") {
        CoxParams p;
        p.mu = f.number("mu", p.mu, true);
        p.sigma1 = f.number("sigma1", p.sigma1, true);
        p.kappa = f.number("kappa", p.kappa, true);
        p.theta = f.number("theta", p.theta, true);
        p.sigma2 = f.number("sigma2", p.sigma2, true);
        p.lambda0 = f.number("lambda0", p.lambda0, true);
        p.s0 = f.number("s0", 1.0);
        p.horizon = horizon;
        rc.model.params = p;
    } else if (model == "hawkes") {
        HawkesParams p;
        p.mu = f.number("mu", p.mu, true);
        p.sigma1 = f.number("sigma1", p.sigma1, true);
        p.kappa = f.number("kappa", p.kappa, true);
        p.theta = f.number("theta", p.theta, true);
        p.eta = f.number("eta", p.eta, true);
        p.lambda0 = f.number("lambda0", p.lambda0, true);
        p.s0 = f.number("s0", 1.0);
        p.horizon = horizon;
        rc.model.params = p;
    } else {
        throw ConfigError("model must be \"cox\" or \"hawkes\"");
    }
    rc.model.jumps = read_jumps(f, rc.model.kind());
    require_valid(rc.model.validate());

    rc.grid = SimGrid(f.count("grid.n_steps", 256), horizon);
    rc.seed = f.count("rng.seed", 1);

    rc.paths = f.count("run.paths", rc.paths);
    rc.inner = f.count("run.inner", rc.inner);
    rc.ef_paths = f.count("run.ef_paths", rc.ef_paths);
    rc.workers = static_cast<unsigned>(f.count("run.workers", rc.workers));
    rc.mode = parse_integrand_mode(f.text("run.mode", to_string(rc.mode)));
    rc.sign = parse_sign_convention(f.text("run.sign", to_string(rc.sign)));
    rc.clamp = f.flag("run.clamp", rc.clamp);
    rc.method = parse_laplace_method(f.text("run.method", "gaver"));
    rc.monitoring = parse_monitoring(f.text("run.monitoring", "bridge"));
    rc.alpha1 = f.number("run.alpha1", rc.alpha1);
    rc.cox_price_term = f.flag("run.cox_price_term", rc.cox_price_term);

    rc.payoff = parse_payoff(f.text("pricing.payoff", "fixed"));
    rc.strike = f.number("pricing.strike", rc.strike);
    if (f.find("pricing.discount_rate")) rc.discount_rate = f.number("pricing.discount_rate", 0.0);
    rc.price_paths = f.count("pricing.paths", rc.price_paths);

    rc.fp_b = f.numbers("first_passage.b");
    rc.fp_e = f.numbers("first_passage.e");
    rc.fp_paths = f.count("first_passage.paths", rc.fp_paths);
    rc.checkpoints = f.numbers("first_passage.checkpoints");

    f.reject_unknown();
    if (rc.workers == 0) rc.workers = 1;
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

CoOptions RunConfig::co_options() const {
    CoOptions o;
    o.n_paths = paths;
    o.n_inner = inner;
    o.ef_paths = ef_paths;
    o.seed = seed;
    o.workers = workers;
    o.mode = mode;
    o.sign = sign;
    o.floor = clamp ? FloorMode::clamp : FloorMode::error;
    o.monitoring = monitoring;
    o.cox_price_term = cox_price_term;
    o.cox_alpha1 = alpha1;
    o.tail.method = method;
    return o;
}

PriceOptions RunConfig::price_options() const {
    PriceOptions o;
    o.payoff = payoff;
    o.strike = strike;
    o.rate = discount_rate;
    o.n_paths = price_paths;
    o.seed = seed;
    o.workers = workers;
    o.monitoring = monitoring;
    return o;
}

McRunOptions RunConfig::mc_options(std::size_t n_paths) const {
    McRunOptions o;
    o.n_paths = n_paths;
    o.seed = seed;
    o.workers = workers;
    o.monitoring = monitoring;
    return o;
}

std::string RunConfig::canonical_json() const {
    json j;
    j["model"] = to_string(model.kind());
    j["mu"] = model.mu();
    j["sigma1"] = model.sigma1();
    j["kappa"] = model.kappa();
    j["theta"] = model.theta();
    if (model.kind() == ModelKind::cox) {
        j["sigma2"] = model.cox().sigma2;
    } else {
        j["eta"] = model.hawkes().eta;
    }
    j["lambda0"] = model.lambda0();
    j["s0"] = model.s0();
    j["T"] = model.horizon();
    json atoms = json::array();
    for (const auto& a : model.jumps.atoms) atoms.push_back({a.z, a.w});
    j["nu_atoms"] = atoms;
    j["jump"] = jump_json(model.jumps);
    j["grid"] = {{"n_steps", grid.n_steps}};
    j["rng"] = {{"seed", seed}};
    // Worker count is deliberately absent: it never changes results.
    j["run"] = {{"paths", paths},
                {"inner", inner},
                {"ef_paths", ef_paths},
                {"mode", to_string(mode)},
                {"sign", to_string(sign)},
                {"clamp", clamp},
                {"method", to_string(method)},
                {"monitoring", monitoring == Monitoring::bridge ? "bridge" : "discrete"},
                {"alpha1", alpha1},
                {"cox_price_term", cox_price_term}};
    json pricing = {{"payoff", to_string(payoff)}, {"strike", strike}, {"paths", price_paths}};
    if (discount_rate) pricing["discount_rate"] = *discount_rate;
    j["pricing"] = pricing;
    // JSON has no infinities; spell them out so +inf and -inf hash apart.
    const auto levels = [](const std::vector<double>& v) {
        json out = json::array();
        for (double x : v) {
            if (std::isfinite(x)) {
                out.push_back(x);
            } else {
                out.push_back(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
            }
        }
        return out;
    };
    j["first_passage"] = {
        {"b", levels(fp_b)}, {"e", levels(fp_e)}, {"paths", fp_paths}, {"checkpoints", checkpoints}};
    return j.dump();
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json())));
    return buf;
}

}  // namespace lookback
