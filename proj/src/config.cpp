#include "gerw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gerw {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// '#' starts a comment unless it sits inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            in_str = !in_str;
        else if (line[i] == '#' && !in_str)
            return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

struct RawValue {
    int line = 0;
    bool is_array = false;
    bool is_string = false;              // element type
    std::vector<std::string> items;      // scalar = one item
};

double parse_double_token(const std::string& t, int line, const std::string& field) {
    double v{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(line, field, "expected a finite number, got '" + t + "'");
    return v;
}

std::uint64_t parse_u64_token(const std::string& t, int line, const std::string& field) {
    std::uint64_t v{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || t[0] == '-' || ec != std::errc{} || p != t.data() + t.size())
        throw ConfigError(line, field, "expected a nonnegative integer, got '" + t + "'");
    return v;
}

// One scalar token: quoted string or bare number.  Numbers are validated at
// schema-lookup time, when the field name is known.
void parse_scalar(const std::string& text, int line, RawValue& out) {
    if (!text.empty() && text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ConfigError(line, "", "unterminated string");
        std::string inner = text.substr(1, text.size() - 2);
        if (inner.find('"') != std::string::npos || inner.find('\\') != std::string::npos)
            throw ConfigError(line, "", "quotes and backslashes are not allowed inside strings");
        out.is_string = true;
        out.items.push_back(inner);
        return;
    }
    if (text.empty()) throw ConfigError(line, "", "missing value");
    out.is_string = false;
    out.items.push_back(text);
}

RawValue parse_value(const std::string& text, int line) {
    RawValue v;
    v.line = line;
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']')
            throw ConfigError(line, "", "array must open and close on one line");
        v.is_array = true;
        std::string inner = text.substr(1, text.size() - 2);
        // split on top-level commas, respecting quotes
        std::vector<std::string> parts;
        bool in_str = false;
        std::string cur;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty() || parts.empty()) parts.push_back(cur);
        if (parts.size() == 1 && trim(parts[0]).empty()) return v; // empty array
        bool first = true, str_type = false;
        for (const std::string& part : parts) {
            std::string p = trim(part);
            if (p.empty()) throw ConfigError(line, "", "empty array element");
            RawValue elem;
            parse_scalar(p, line, elem);
            if (first) {
                str_type = elem.is_string;
                first = false;
            } else if (elem.is_string != str_type) {
                throw ConfigError(line, "", "array mixes strings and numbers");
            }
            v.items.push_back(elem.items[0]);
        }
        v.is_string = str_type;
        return v;
    }
    parse_scalar(text, line, v);
    return v;
}

using Key = std::pair<std::string, std::string>;

// Every key the schema knows, per section; anything else is rejected with
// its line number.  Keys valid for the section but unused by the chosen
// family kind are rejected separately after construction.
const std::map<std::string, std::set<std::string>> kSchema = {
    {"alpha", {"kind", "alpha", "kappa", "theta", "values"}},
    {"eps", {"kind", "eps", "rho", "eta", "beta", "values"}},
    {"run", {"q", "horizon", "checkpoints", "ensemble", "seed", "actions", "out", "threads"}},
    {"tolerances",
     {"lln", "l2", "l2_ratio", "clt_delta", "rate", "lil_slack_lo", "lil_slack_hi",
      "drift_horizon_ratio"}},
    {"phase",
     {"theta", "alpha", "kappa_min", "kappa_max", "kappa_step", "eta_min", "eta_max",
      "eta_step"}},
};

struct Reader {
    std::map<Key, RawValue> raw;
    std::set<Key> used;
    std::set<std::string> sections_seen;

    const RawValue* find(const std::string& sec, const std::string& key) {
        auto it = raw.find({sec, key});
        if (it == raw.end()) return nullptr;
        used.insert({sec, key});
        return &it->second;
    }
    const RawValue& need(const std::string& sec, const std::string& key) {
        const RawValue* v = find(sec, key);
        if (!v) throw ConfigError(0, key, "[" + sec + "] is missing required key '" + key + "'");
        return *v;
    }

    const RawValue& scalar(const std::string& sec, const std::string& key, bool want_string) {
        const RawValue& v = need(sec, key);
        if (v.is_array)
            throw ConfigError(v.line, key, "'" + key + "' must be a single value");
        if (v.is_string != want_string)
            throw ConfigError(v.line, key,
                              std::string("'") + key + "' must be a " +
                                  (want_string ? "string" : "number"));
        return v;
    }
    double get_double(const std::string& sec, const std::string& key) {
        const RawValue& v = scalar(sec, key, false);
        return parse_double_token(v.items[0], v.line, key);
    }
    std::uint64_t get_u64(const std::string& sec, const std::string& key) {
        const RawValue& v = scalar(sec, key, false);
        return parse_u64_token(v.items[0], v.line, key);
    }
    std::string get_string(const std::string& sec, const std::string& key) {
        return scalar(sec, key, true).items[0];
    }
    std::vector<double> get_double_array(const std::string& sec, const std::string& key) {
        const RawValue& v = need(sec, key);
        if (!v.is_array || (v.is_string && !v.items.empty()))
            throw ConfigError(v.line, key, "'" + key + "' must be an array of numbers");
        std::vector<double> out;
        for (const std::string& t : v.items) out.push_back(parse_double_token(t, v.line, key));
        return out;
    }
    std::vector<std::uint64_t> get_u64_array(const std::string& sec, const std::string& key) {
        const RawValue& v = need(sec, key);
        if (!v.is_array || (v.is_string && !v.items.empty()))
            throw ConfigError(v.line, key, "'" + key + "' must be an array of integers");
        std::vector<std::uint64_t> out;
        for (const std::string& t : v.items) out.push_back(parse_u64_token(t, v.line, key));
        return out;
    }
    std::vector<std::string> get_string_array(const std::string& sec, const std::string& key) {
        const RawValue& v = need(sec, key);
        if (!v.is_array || (!v.is_string && !v.items.empty()))
            throw ConfigError(v.line, key, "'" + key + "' must be an array of strings");
        return v.items;
    }

    bool has(const std::string& sec, const std::string& key) const {
        return raw.count({sec, key}) != 0;
    }
    int line_of(const std::string& sec, const std::string& key) const {
        auto it = raw.find({sec, key});
        return it == raw.end() ? 0 : it->second.line;
    }

    // Everything parsed must have been consumed by the schema walk.
    void finish() const {
        for (const auto& [key, value] : raw) {
            if (used.count(key)) continue;
            const auto& [sec, name] = key;
            auto schema_it = kSchema.find(sec);
            if (schema_it != kSchema.end() && schema_it->second.count(name))
                throw ConfigError(value.line, name,
                                  "key '" + name + "' in [" + sec +
                                      "] is not used by this configuration");
            throw ConfigError(value.line, name, "unknown key '" + name + "' in [" + sec + "]");
        }
    }
};

Reader tokenize(const std::string& text) {
    Reader r;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[' && body.find('=') == std::string::npos) {
            if (body.back() != ']')
                throw ConfigError(lineno, "", "malformed section header");
            section = trim(body.substr(1, body.size() - 2));
            if (!kSchema.count(section))
                throw ConfigError(lineno, "", "unknown section [" + section + "]");
            if (!r.sections_seen.insert(section).second)
                throw ConfigError(lineno, "", "duplicate section [" + section + "]");
            continue;
        }
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "", "expected 'key = value' or a [section] header");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError(lineno, key, "invalid key name");
        if (section.empty())
            throw ConfigError(lineno, key, "key appears before any [section] header");
        if (!kSchema.at(section).count(key))
            throw ConfigError(lineno, key, "unknown key '" + key + "' in [" + section + "]");
        RawValue rv = parse_value(value, lineno);
        if (!r.raw.emplace(Key{section, key}, std::move(rv)).second)
            throw ConfigError(lineno, key, "duplicate key '" + key + "' in [" + section + "]");
    }
    for (const char* sec : {"alpha", "eps", "run"})
        if (!r.sections_seen.count(sec))
            throw ConfigError(0, "", std::string("missing required section [") + sec + "]");
    return r;
}

AlphaFamily build_alpha(Reader& r) {
    std::string kind = r.get_string("alpha", "kind");
    int kline = r.line_of("alpha", "kind");
    try {
        if (kind == "constant") return AlphaFamily::constant(r.get_double("alpha", "alpha"));
        if (kind == "log-corrected")
            return AlphaFamily::log_corrected(r.get_double("alpha", "alpha"),
                                              r.get_double("alpha", "kappa"),
                                              r.get_double("alpha", "theta"));
        if (kind == "approach-one")
            return AlphaFamily::approach_one(r.get_double("alpha", "kappa"),
                                             r.get_double("alpha", "theta"));
        if (kind == "table") return AlphaFamily::table(r.get_double_array("alpha", "values"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(kline, "alpha", e.what());
    }
    throw ConfigError(kline, "kind", "unknown alpha kind '" + kind + "'");
}

EpsFamily build_eps(Reader& r) {
    std::string kind = r.get_string("eps", "kind");
    int kline = r.line_of("eps", "kind");
    try {
        if (kind == "constant") return EpsFamily::constant(r.get_double("eps", "eps"));
        if (kind == "power-law") return EpsFamily::power_law(r.get_double("eps", "rho"));
        if (kind == "log-over-power")
            return EpsFamily::log_over_power(r.get_double("eps", "eta"),
                                             r.get_double("eps", "beta"));
        if (kind == "inverse-log-power")
            return EpsFamily::inverse_log_power(r.get_double("eps", "eta"));
        if (kind == "one-minus-power-law")
            return EpsFamily::one_minus_power_law(r.get_double("eps", "rho"));
        if (kind == "one-minus-log-over-power")
            return EpsFamily::one_minus_log_over_power(r.get_double("eps", "eta"),
                                                       r.get_double("eps", "beta"));
        if (kind == "one-minus-inverse-log-power")
            return EpsFamily::one_minus_inverse_log_power(r.get_double("eps", "eta"));
        if (kind == "table") return EpsFamily::table(r.get_double_array("eps", "values"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(kline, "eps", e.what());
    }
    throw ConfigError(kline, "kind", "unknown eps kind '" + kind + "'");
}

void check_clean_string(const std::string& s, int line, const std::string& field) {
    for (char c : s)
        if (c == '"' || c == '\\' || std::iscntrl(static_cast<unsigned char>(c)))
            throw ConfigError(line, field, "string contains characters that cannot round-trip");
}

std::vector<double> sweep(double lo, double hi, double step) {
    std::vector<double> out;
    // half-step tolerance so that hi itself is always included
    for (double x = lo; x <= hi + 0.5 * step; x += step) out.push_back(std::min(x, hi));
    if (!out.empty() && out.back() < hi - 1e-12 * std::max(1.0, std::abs(hi)))
        out.push_back(hi);
    return out;
}

std::string fmt_num(double x) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

} // namespace

ConfigError::ConfigError(int line_, std::string field_, const std::string& message)
    : std::runtime_error([&] {
          std::string s = "config error";
          if (line_ > 0) s += " at line " + std::to_string(line_);
          if (!field_.empty()) s += ", field '" + field_ + "'";
          return s + ": " + message;
      }()),
      line(line_),
      field(std::move(field_)) {}

std::vector<double> PhaseGrid::kappa_values() const { return sweep(kappa_min, kappa_max, kappa_step); }
std::vector<double> PhaseGrid::eta_values() const { return sweep(eta_min, eta_max, eta_step); }

ExperimentConfig parse_config(const std::string& text) {
    Reader r = tokenize(text);
    ExperimentConfig cfg;
    cfg.alpha = build_alpha(r);
    cfg.eps = build_eps(r);

    cfg.q = r.get_double("run", "q");
    if (!(cfg.q >= 0.0 && cfg.q <= 1.0))
        throw ConfigError(r.line_of("run", "q"), "q", "q must lie in [0,1]");

    cfg.horizon = r.get_u64("run", "horizon");
    if (cfg.horizon == 0)
        throw ConfigError(r.line_of("run", "horizon"), "horizon", "horizon must be at least 1");

    cfg.checkpoints = r.get_u64_array("run", "checkpoints");
    {
        int line = r.line_of("run", "checkpoints");
        if (cfg.checkpoints.empty())
            throw ConfigError(line, "checkpoints", "checkpoints must be nonempty");
        for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
            if (cfg.checkpoints[i] < 1 || cfg.checkpoints[i] > cfg.horizon)
                throw ConfigError(line, "checkpoints",
                                  "checkpoints must lie in [1, horizon]");
            if (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1])
                throw ConfigError(line, "checkpoints",
                                  "checkpoints must be strictly increasing");
        }
    }

    cfg.ensemble = r.get_u64("run", "ensemble");
    if (cfg.ensemble == 0)
        throw ConfigError(r.line_of("run", "ensemble"), "ensemble",
                          "ensemble size must be at least 1");
    cfg.seed = r.get_u64("run", "seed");

    if (r.has("run", "actions")) {
        cfg.actions = r.get_string_array("run", "actions");
        int line = r.line_of("run", "actions");
        std::set<std::string> seen;
        for (const std::string& a : cfg.actions) {
            if (std::find(std::begin(kActionNames), std::end(kActionNames), a) ==
                std::end(kActionNames))
                throw ConfigError(line, "actions", "unknown action '" + a + "'");
            if (!seen.insert(a).second)
                throw ConfigError(line, "actions", "duplicate action '" + a + "'");
        }
    }
    if (r.has("run", "out")) {
        cfg.out = r.get_string("run", "out");
        int line = r.line_of("run", "out");
        if (cfg.out.empty()) throw ConfigError(line, "out", "output directory must be nonempty");
        check_clean_string(cfg.out, line, "out");
    }
    if (r.has("run", "threads")) {
        std::uint64_t t = r.get_u64("run", "threads");
        if (t > 65536)
            throw ConfigError(r.line_of("run", "threads"), "threads", "threads out of range");
        cfg.threads = static_cast<unsigned>(t);
    }

    auto tol_field = [&](const char* key, double& slot, auto&& check, const char* what) {
        if (!r.has("tolerances", key)) return;
        double v = r.get_double("tolerances", key);
        if (!check(v)) throw ConfigError(r.line_of("tolerances", key), key, what);
        slot = v;
    };
    tol_field("lln", cfg.tol.lln, [](double v) { return v > 0; }, "must be positive");
    tol_field("l2", cfg.tol.l2, [](double v) { return v > 0; }, "must be positive");
    tol_field("l2_ratio", cfg.tol.l2_ratio, [](double v) { return v > 0; }, "must be positive");
    tol_field("clt_delta", cfg.tol.clt_delta, [](double v) { return v > 0 && v < 1; },
              "must lie in (0,1)");
    tol_field("rate", cfg.tol.rate, [](double v) { return v > 0; }, "must be positive");
    tol_field("lil_slack_lo", cfg.tol.lil_slack_lo, [](double v) { return v >= 0 && v < 1; },
              "must lie in [0,1)");
    tol_field("lil_slack_hi", cfg.tol.lil_slack_hi, [](double v) { return v >= 0; },
              "must be nonnegative");
    tol_field("drift_horizon_ratio", cfg.tol.drift_horizon_ratio,
              [](double v) { return v >= 1; }, "must be at least 1");

    if (r.sections_seen.count("phase")) {
        PhaseGrid& g = cfg.phase;
        g.present = true;
        g.theta = r.get_double("phase", "theta");
        if (!(g.theta > 0))
            throw ConfigError(r.line_of("phase", "theta"), "theta", "theta must be positive");
        g.alpha = r.get_double("phase", "alpha");
        if (!(g.alpha >= 0 && g.alpha < 1))
            throw ConfigError(r.line_of("phase", "alpha"), "alpha", "alpha must lie in [0,1)");
        g.kappa_min = r.get_double("phase", "kappa_min");
        g.kappa_max = r.get_double("phase", "kappa_max");
        g.kappa_step = r.get_double("phase", "kappa_step");
        g.eta_min = r.get_double("phase", "eta_min");
        g.eta_max = r.get_double("phase", "eta_max");
        g.eta_step = r.get_double("phase", "eta_step");
        if (!(g.kappa_step > 0))
            throw ConfigError(r.line_of("phase", "kappa_step"), "kappa_step",
                              "step must be positive");
        if (!(g.eta_step > 0))
            throw ConfigError(r.line_of("phase", "eta_step"), "eta_step", "step must be positive");
        if (g.kappa_max < g.kappa_min)
            throw ConfigError(r.line_of("phase", "kappa_max"), "kappa_max",
                              "kappa_max must be at least kappa_min");
        if (g.eta_max < g.eta_min)
            throw ConfigError(r.line_of("phase", "eta_max"), "eta_max",
                              "eta_max must be at least eta_min");
    }

    r.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, "", "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    out << "[alpha]\n";
    switch (alpha.kind) {
    case AlphaKind::Constant:
        out << "kind = \"constant\"\nalpha = " << fmt_num(alpha.alpha) << "\n";
        break;
    case AlphaKind::LogCorrected:
        out << "kind = \"log-corrected\"\nalpha = " << fmt_num(alpha.alpha)
            << "\nkappa = " << fmt_num(alpha.kappa) << "\ntheta = " << fmt_num(alpha.theta)
            << "\n";
        break;
    case AlphaKind::ApproachOne:
        out << "kind = \"approach-one\"\nkappa = " << fmt_num(alpha.kappa)
            << "\ntheta = " << fmt_num(alpha.theta) << "\n";
        break;
    case AlphaKind::Table: {
        out << "kind = \"table\"\nvalues = [";
        for (std::size_t i = 0; i < alpha.values.size(); ++i)
            out << (i ? ", " : "") << fmt_num(alpha.values[i]);
        out << "]\n";
        break;
    }
    }
    out << "\n[eps]\n";
    switch (eps.kind) {
    case EpsKind::Constant:
        out << "kind = \"constant\"\neps = " << fmt_num(eps.eps) << "\n";
        break;
    case EpsKind::PowerLaw:
        out << "kind = \"power-law\"\nrho = " << fmt_num(eps.rho) << "\n";
        break;
    case EpsKind::LogOverPower:
        out << "kind = \"log-over-power\"\neta = " << fmt_num(eps.eta)
            << "\nbeta = " << fmt_num(eps.beta) << "\n";
        break;
    case EpsKind::InverseLogPower:
        out << "kind = \"inverse-log-power\"\neta = " << fmt_num(eps.eta) << "\n";
        break;
    case EpsKind::OneMinusPowerLaw:
        out << "kind = \"one-minus-power-law\"\nrho = " << fmt_num(eps.rho) << "\n";
        break;
    case EpsKind::OneMinusLogOverPower:
        out << "kind = \"one-minus-log-over-power\"\neta = " << fmt_num(eps.eta)
            << "\nbeta = " << fmt_num(eps.beta) << "\n";
        break;
    case EpsKind::OneMinusInverseLogPower:
        out << "kind = \"one-minus-inverse-log-power\"\neta = " << fmt_num(eps.eta) << "\n";
        break;
    case EpsKind::Table: {
        out << "kind = \"table\"\nvalues = [";
        for (std::size_t i = 0; i < eps.values.size(); ++i)
            out << (i ? ", " : "") << fmt_num(eps.values[i]);
        out << "]\n";
        break;
    }
    }
    out << "\n[run]\nq = " << fmt_num(q) << "\nhorizon = " << horizon << "\ncheckpoints = [";
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        out << (i ? ", " : "") << checkpoints[i];
    out << "]\nensemble = " << ensemble << "\nseed = " << seed << "\nactions = [";
    for (std::size_t i = 0; i < actions.size(); ++i)
        out << (i ? ", " : "") << '"' << actions[i] << '"';
    out << "]\nout = \"" << this->out << "\"\nthreads = " << threads << "\n";
    out << "\n[tolerances]\nlln = " << fmt_num(tol.lln) << "\nl2 = " << fmt_num(tol.l2)
        << "\nl2_ratio = " << fmt_num(tol.l2_ratio) << "\nclt_delta = " << fmt_num(tol.clt_delta)
        << "\nrate = " << fmt_num(tol.rate) << "\nlil_slack_lo = " << fmt_num(tol.lil_slack_lo)
        << "\nlil_slack_hi = " << fmt_num(tol.lil_slack_hi)
        << "\ndrift_horizon_ratio = " << fmt_num(tol.drift_horizon_ratio) << "\n";
    if (phase.present) {
        out << "\n[phase]\ntheta = " << fmt_num(phase.theta)
            << "\nalpha = " << fmt_num(phase.alpha)
            << "\nkappa_min = " << fmt_num(phase.kappa_min)
            << "\nkappa_max = " << fmt_num(phase.kappa_max)
            << "\nkappa_step = " << fmt_num(phase.kappa_step)
            << "\neta_min = " << fmt_num(phase.eta_min)
            << "\neta_max = " << fmt_num(phase.eta_max)
            << "\neta_step = " << fmt_num(phase.eta_step) << "\n";
    }
    return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace gerw
