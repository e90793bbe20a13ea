#include "sfv/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sfv/error.hpp"

namespace sfv {

const ConfigValue* ConfigValue::find(std::string_view key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    ConfigTable parse() {
        ConfigTable out;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            const std::size_t line = line_;
            std::string key = parse_key();
            skip_inline_space();
            expect('=', key);
            skip_inline_space();
            ConfigValue v = parse_value(key);
            skip_inline_space();
            if (!eof() && peek() == '#') skip_comment();
            if (!eof() && peek() != '\n' && peek() != '\r') fail("unexpected text after value", key);
            v.line = line;
            bool replaced = false;
            for (auto& [k, old] : out) {
                if (k == key) {
                    old = v;
                    replaced = true;
                }
            }
            if (!replaced) out.emplace_back(std::move(key), std::move(v));
        }
        return out;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() {
        const char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    [[noreturn]] void fail(const std::string& what, const std::string& field) const {
        throw ConfigError("line " + std::to_string(line_) + (field.empty() ? "" : " (" + field + ")") + ": " + what,
                          line_, field);
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') get();
    }
    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) get();
    }
    void skip_blank_lines() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }
    // inside brackets/braces newlines and comments are whitespace
    void skip_any_space() { skip_blank_lines(); }

    void expect(char c, const std::string& field) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'", field);
        get();
    }

    static bool key_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    }

    std::string parse_key() {
        std::string key;
        while (!eof() && key_char(peek())) key += get();
        if (key.empty()) fail("expected a key", "");
        return key;
    }

    ConfigValue parse_value(const std::string& field) {
        if (eof()) fail("missing value", field);
        const char c = peek();
        if (c == '"') return parse_string(field);
        if (c == '[') return parse_array(field);
        if (c == '{') return parse_table(field);
        return parse_scalar(field);
    }

    ConfigValue parse_string(const std::string& field) {
        get();
        ConfigValue v;
        v.kind = ConfigValue::Kind::string;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string", field);
            const char c = get();
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated string", field);
                const char e = get();
                v.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                v.text += c;
            }
        }
        return v;
    }

    ConfigValue parse_array(const std::string& field) {
        get();
        ConfigValue v;
        v.kind = ConfigValue::Kind::array;
        skip_any_space();
        if (!eof() && peek() == ']') {
            get();
            return v;
        }
        while (true) {
            skip_any_space();
            v.items.push_back(parse_value(field));
            skip_any_space();
            if (eof()) fail("unterminated array", field);
            const char c = get();
            if (c == ']') break;
            if (c != ',') fail("expected ',' or ']' in array", field);
            skip_any_space();
            if (!eof() && peek() == ']') {
                get();
                break;
            }
        }
        return v;
    }

    ConfigValue parse_table(const std::string& field) {
        get();
        ConfigValue v;
        v.kind = ConfigValue::Kind::table;
        skip_any_space();
        if (!eof() && peek() == '}') {
            get();
            return v;
        }
        while (true) {
            skip_any_space();
            std::string key = parse_key();
            const std::string sub = field + "." + key;
            skip_inline_space();
            expect('=', sub);
            skip_inline_space();
            v.fields.emplace_back(key, parse_value(sub));
            skip_any_space();
            if (eof()) fail("unterminated inline table", field);
            const char c = get();
            if (c == '}') break;
            if (c != ',') fail("expected ',' or '}' in inline table", field);
        }
        return v;
    }

    ConfigValue parse_scalar(const std::string& field) {
        std::string tok;
        while (!eof()) {
            const char c = peek();
            if (c == ',' || c == ']' || c == '}' || c == '#' || c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
            tok += get();
        }
        ConfigValue v;
        v.text = tok;
        if (tok == "true" || tok == "false") {
            v.kind = ConfigValue::Kind::boolean;
            v.boolean = tok == "true";
            return v;
        }
        std::string clean;
        for (char c : tok) {
            if (c != '_') clean += c;
        }
        if (!clean.empty() && clean[0] == '+') clean.erase(0, 1);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), x);
        if (clean.empty() || ec != std::errc() || ptr != clean.data() + clean.size()) {
            fail("cannot parse value '" + tok + "'", field);
        }
        v.kind = ConfigValue::Kind::number;
        v.number = x;
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

[[noreturn]] void bad(const ConfigValue& v, const std::string& field, const std::string& what) {
    throw ConfigError("line " + std::to_string(v.line) + " (" + field + "): " + what, v.line, field);
}

double as_number(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::number) bad(v, field, "expected a number");
    return v.number;
}

std::uint64_t as_count(const ConfigValue& v, const std::string& field) {
    const double x = as_number(v, field);
    if (!(x >= 0.0) || x != std::floor(x) || x > 9.0e15) bad(v, field, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(x);
}

std::string as_string(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::string) bad(v, field, "expected a string");
    return v.text;
}

bool as_bool(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::boolean) bad(v, field, "expected true or false");
    return v.boolean;
}

std::vector<double> as_numbers(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::array) bad(v, field, "expected an array");
    std::vector<double> out;
    for (const auto& item : v.items) {
        ConfigValue tmp = item;
        tmp.line = v.line;
        out.push_back(as_number(tmp, field));
    }
    return out;
}

Sinusoid as_sinusoid(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::table) bad(v, field, "expected an inline table { amp, m, phase }");
    Sinusoid s{};
    for (const auto& [k, raw] : v.fields) {
        ConfigValue item = raw;
        item.line = v.line;
        const std::string f = field + "." + k;
        if (k == "amp") {
            s.amp = as_number(item, f);
        } else if (k == "m") {
            const auto m = as_count(item, f);
            if (m < 1) bad(item, f, "frequency must be >= 1");
            s.m = static_cast<int>(m);
        } else if (k == "phase") {
            const auto p = as_string(item, f);
            if (p == "sin") {
                s.phase = Phase::sin;
            } else if (p == "cos") {
                s.phase = Phase::cos;
            } else {
                bad(item, f, "phase must be \"sin\" or \"cos\"");
            }
        } else {
            bad(item, f, "unknown field");
        }
    }
    if (!std::isfinite(s.amp)) bad(v, field, "amplitude must be finite");
    return s;
}

std::string sinusoid_text(const Sinusoid& s) {
    return "{ amp = " + format_double(s.amp) + ", m = " + std::to_string(s.m) + ", phase = \"" +
           (s.phase == Phase::sin ? "sin" : "cos") + "\" }";
}

std::string list_text(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_double(xs[i]);
    return out + "]";
}

}  // namespace

ConfigTable parse_config(std::string_view text) { return Parser(text).parse(); }

RunConfig::RunConfig() {
    for (int k = 8; k >= 1; --k) dt_grid.push_back(std::ldexp(1.0, -k));
}

double RunConfig::alpha() const { return flux.alpha ? *flux.alpha : std::pow(nu, 1.5); }

std::vector<double> RunConfig::regime_alphas() const {
    if (regimes) return *regimes;
    const double a = std::pow(nu, 1.5);
    return {0.0, 0.01 * a, a, 100.0 * a};
}

FluxModel RunConfig::flux_model(double a) const {
    if (flux.kind == "burgers") return burgers(a);
    return polynomial_flux(flux.coeffs, flux.roots, "polynomial");
}

void RunConfig::validate() const {
    auto need = [](bool ok, const char* field, const std::string& what) {
        if (!ok) throw ConfigError(std::string(field) + ": " + what, 0, field);
    };
    need(n_cells >= 2, "n_cells", "must be >= 2");
    need(nu > 0.0 && std::isfinite(nu), "nu", "must be positive");
    need(dt > 0.0 && std::isfinite(dt), "dt", "must be positive");
    need(t_final >= 0.0 && std::isfinite(t_final), "t_final", "must be >= 0");
    need(flux.kind == "burgers" || flux.kind == "polynomial", "flux.kind", "must be \"burgers\" or \"polynomial\"");
    need(!flux.alpha || *flux.alpha >= 0.0, "flux.alpha", "must be >= 0");
    need(stride >= 1, "stride", "must be >= 1");
    need(replicas >= 2, "replicas", "must be >= 2");
    need(!burn_in || *burn_in >= 0.0, "burn_in", "must be >= 0");
    need(z > 0.0, "z", "must be positive");
    need(record_dt > 0.0, "record_dt", "must be positive");
    need(dt_ref > 0.0, "dt_ref", "must be positive");
    for (double d : dt_grid) need(d > 0.0, "dt_grid", "entries must be positive");
    if (regimes) {
        for (double a : *regimes) need(a >= 0.0, "regimes", "alpha values must be >= 0");
    }
    for (auto n : n_grid) need(n >= 2, "n_grid", "entries must be >= 2");
    need(refine_ratio >= 1, "refine_ratio", "must be >= 1");
    need(refine_dt > 0.0, "refine_dt", "must be positive");
    need(refine_t > 0.0, "refine_t", "must be positive");
    need(refine_replicas >= 2, "refine_replicas", "must be >= 2");
    for (const auto& m : noise.modes) need(m.m >= 1, "noise", "mode frequency must be >= 1");
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    os << "n_cells = " << n_cells << "\n";
    os << "nu = " << format_double(nu) << "\n";
    os << "dt = " << format_double(dt) << "\n";
    os << "t_final = " << format_double(t_final) << "\n";
    os << "seed = " << seed << "\n";
    if (flux.kind == "burgers") {
        os << "flux = { kind = \"burgers\", alpha = " << format_double(alpha()) << " }\n";
    } else {
        os << "flux = { kind = \"polynomial\", coeffs = " << list_text(flux.coeffs);
        if (flux.roots) os << ", roots = " << list_text(*flux.roots);
        os << " }\n";
    }
    os << "noise = [";
    for (std::size_t i = 0; i < noise.modes.size(); ++i) os << (i ? ", " : "") << sinusoid_text(noise.modes[i]);
    os << "]\n";
    os << "u0 = " << (u0 ? sinusoid_text(*u0) : std::string("\"zero\"")) << "\n";
    os << "stride = " << stride << "\n";
    os << "replicas = " << replicas << "\n";
    os << "burn_in = " << (burn_in ? format_double(*burn_in) : std::string("\"default\"")) << "\n";
    os << "z = " << format_double(z) << "\n";
    os << "record_dt = " << format_double(record_dt) << "\n";
    os << "regimes = " << list_text(regime_alphas()) << "\n";
    os << "dt_grid = " << list_text(dt_grid) << "\n";
    os << "dt_ref = " << format_double(dt_ref) << "\n";
    std::vector<double> ns(n_grid.begin(), n_grid.end());
    os << "n_grid = " << list_text(ns) << "\n";
    os << "couple_paths = " << (couple_paths ? "true" : "false") << "\n";
    os << "monte_carlo = " << (monte_carlo ? "true" : "false") << "\n";
    os << "refine_ratio = " << refine_ratio << "\n";
    os << "refine_dt = " << format_double(refine_dt) << "\n";
    os << "refine_t = " << format_double(refine_t) << "\n";
    os << "refine_replicas = " << refine_replicas << "\n";
    return os.str();
}

void apply_config(RunConfig& cfg, const ConfigTable& table) {
    for (const auto& [key, v] : table) {
        if (key == "n_cells") {
            cfg.n_cells = as_count(v, key);
        } else if (key == "nu") {
            cfg.nu = as_number(v, key);
        } else if (key == "dt") {
            cfg.dt = as_number(v, key);
        } else if (key == "t_final" || key == "T") {
            cfg.t_final = as_number(v, key);
        } else if (key == "seed") {
            cfg.seed = as_count(v, key);
        } else if (key == "alpha") {
            cfg.flux.alpha = as_number(v, key);
        } else if (key == "flux") {
            if (v.kind != ConfigValue::Kind::table) bad(v, key, "expected an inline table");
            FluxSpec f;
            for (const auto& [k, raw] : v.fields) {
                ConfigValue item = raw;
                item.line = v.line;
                const std::string field = "flux." + k;
                if (k == "kind") {
                    f.kind = as_string(item, field);
                    if (f.kind != "burgers" && f.kind != "polynomial") bad(item, field, "unknown flux kind");
                } else if (k == "alpha") {
                    f.alpha = as_number(item, field);
                } else if (k == "coeffs") {
                    f.coeffs = as_numbers(item, field);
                } else if (k == "roots") {
                    f.roots = as_numbers(item, field);
                } else {
                    bad(item, field, "unknown field");
                }
            }
            cfg.flux = f;
        } else if (key == "noise") {
            if (v.kind != ConfigValue::Kind::array) bad(v, key, "expected an array of inline tables");
            NoiseModel nm;
            nm.seed = cfg.noise.seed;
            for (const auto& item : v.items) {
                ConfigValue tmp = item;
                tmp.line = v.line;
                nm.modes.push_back(as_sinusoid(tmp, key));
            }
            cfg.noise = nm;
        } else if (key == "u0") {
            if (v.kind == ConfigValue::Kind::string && v.text == "zero") {
                cfg.u0.reset();
            } else {
                cfg.u0 = as_sinusoid(v, key);
            }
        } else if (key == "stride") {
            cfg.stride = as_count(v, key);
        } else if (key == "replicas" || key == "M") {
            cfg.replicas = as_count(v, key);
        } else if (key == "burn_in") {
            if (v.kind == ConfigValue::Kind::string && v.text == "default") {
                cfg.burn_in.reset();
            } else {
                cfg.burn_in = as_number(v, key);
            }
        } else if (key == "z") {
            cfg.z = as_number(v, key);
        } else if (key == "record_dt") {
            cfg.record_dt = as_number(v, key);
        } else if (key == "regimes") {
            cfg.regimes = as_numbers(v, key);
        } else if (key == "dt_grid") {
            cfg.dt_grid = as_numbers(v, key);
        } else if (key == "dt_ref") {
            cfg.dt_ref = as_number(v, key);
        } else if (key == "n_grid") {
            cfg.n_grid.clear();
            for (double x : as_numbers(v, key)) {
                if (!(x >= 2.0) || x != std::floor(x)) bad(v, key, "entries must be integers >= 2");
                cfg.n_grid.push_back(static_cast<std::size_t>(x));
            }
        } else if (key == "couple_paths") {
            cfg.couple_paths = as_bool(v, key);
        } else if (key == "monte_carlo") {
            cfg.monte_carlo = as_bool(v, key);
        } else if (key == "refine_ratio") {
            cfg.refine_ratio = as_count(v, key);
        } else if (key == "refine_dt") {
            cfg.refine_dt = as_number(v, key);
        } else if (key == "refine_t") {
            cfg.refine_t = as_number(v, key);
        } else if (key == "refine_replicas") {
            cfg.refine_replicas = as_count(v, key);
        } else {
            bad(v, key, "unknown key");
        }
    }
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
    if (assignment.find('=') == std::string_view::npos) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    apply_config(cfg, parse_config(assignment));
}

}  // namespace sfv
