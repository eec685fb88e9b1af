#pragma once

// Run configuration: `key = value` text files with `#` comments.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/entropy.hpp"
#include "lpvm/phase_space.hpp"

namespace lpvm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `name` or `name(a, b, ...)` with numeric arguments.
struct FunctionSpec {
    std::string name;
    std::vector<double> args;
    bool operator==(const FunctionSpec&) const = default;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_string(const FunctionSpec& s) {
    if (s.args.empty()) return s.name;
    std::string out = s.name + "(";
    for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out += ", ";
        out += format_double(s.args[i]);
    }
    return out + ")";
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("'" + t + "' is not a number");
    }
    if (used != t.size() || !std::isfinite(v))
        throw std::invalid_argument("'" + t + "' is not a finite number");
    return v;
}

inline int parse_int(const std::string& text) {
    const double v = parse_number(text);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw std::invalid_argument("'" + trim(text) + "' is not an integer");
    return static_cast<int>(v);
}

inline FunctionSpec parse_function(const std::string& text) {
    const std::string t = trim(text);
    FunctionSpec s;
    const auto open = t.find('(');
    if (open == std::string::npos) {
        s.name = t;
    } else {
        if (t.back() != ')') throw std::invalid_argument("missing ')' in '" + t + "'");
        s.name = trim(t.substr(0, open));
        const std::string inner = t.substr(open + 1, t.size() - open - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) s.args.push_back(parse_number(item));
    }
    if (s.name.empty()) throw std::invalid_argument("empty function name");
    return s;
}

inline void expect_args(const FunctionSpec& s, std::size_t n) {
    if (s.args.size() != n)
        throw std::invalid_argument(s.name + " takes " + std::to_string(n) + " argument(s)");
}

}  // namespace detail

/// Initial distribution families.
inline void validate_f0_spec(const FunctionSpec& s) {
    if (s.name == "zero" || s.name == "equilibrium") detail::expect_args(s, 0);
    else if (s.name == "uniform_maxwellian") detail::expect_args(s, 1);
    else if (s.name == "modulated_maxwellian") detail::expect_args(s, 3);
    else if (s.name == "two_stream") detail::expect_args(s, 4);
    else throw std::invalid_argument("unknown f0 family '" + s.name + "'");
}

inline void validate_next_spec(const FunctionSpec& s) {
    if (s.name == "zero") detail::expect_args(s, 0);
    else if (s.name == "uniform") detail::expect_args(s, 1);
    else if (s.name == "cosine") detail::expect_args(s, 3);
    else throw std::invalid_argument("unknown n_ext family '" + s.name + "'");
}

inline void validate_wave_spec(const FunctionSpec& s) {
    if (s.name == "zero") detail::expect_args(s, 0);
    else if (s.name == "sin" || s.name == "cos") detail::expect_args(s, 2);
    else throw std::invalid_argument("unknown wave profile '" + s.name + "' (zero, sin, cos)");
}

inline EntropyGenerator make_generator(const std::string& spec) {
    if (spec == "maxwellian") return maxwellian_generator();
    if (spec.rfind("power:", 0) == 0) return power_generator(detail::parse_number(spec.substr(6)));
    throw std::invalid_argument("sigma must be 'maxwellian' or 'power:q'");
}

struct RunConfig {
    Model model = Model::QR;
    double L = 0.0;
    double p_max = 0.0;
    int nx = 0;
    int np = 0;
    int nt_per_window = 0;
    double window_length = 0.0;
    double t_end = 0.0;
    double tol_fp = 0.0;
    int max_iters = 0;
    FunctionSpec f0;
    FunctionSpec n_ext;
    FunctionSpec A0;
    FunctionSpec Adot0;
    std::string sigma;
    std::string output_dir;
    int snapshot_stride = 8;

    bool operator==(const RunConfig&) const = default;

    double dt() const { return window_length / nt_per_window; }
    PhaseGrid grid() const { return PhaseGrid(L, nx, p_max, np); }
    int windows() const { return static_cast<int>(std::lround(t_end / window_length)); }
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "model", "L",     "p_max",  "nx", "np", "nt_per_window", "window_length", "t_end",
        "tol_fp", "max_iters", "f0", "n_ext", "A0", "Adot0", "sigma", "output_dir",
        "snapshot_stride"};
    return keys;
}

/// Parses and validates a configuration; every key except snapshot_stride
/// is required and unknown or repeated keys are errors.
inline RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::pair<std::string, int>> kv;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        bool known = false;
        for (const auto& k : config_keys()) known = known || k == key;
        if (!known)
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = {value, lineno};
    }

    RunConfig c;
    auto field = [&](const std::string& key, auto&& apply) {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            if (key == "snapshot_stride") return;
            throw ConfigError("missing key '" + key + "'");
        }
        try {
            apply(it->second.first);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("line " + std::to_string(it->second.second) + ": key '" + key +
                              "': " + e.what());
        }
    };
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
        return v;
    };

    field("model", [&](const std::string& v) {
        if (v == "nr") c.model = Model::NR;
        else if (v == "qr") c.model = Model::QR;
        else if (v == "fr") throw std::invalid_argument("FR evolution unsupported; see docs");
        else throw std::invalid_argument("model must be nr or qr");
    });
    field("L", [&](const std::string& v) { c.L = positive(detail::parse_number(v), "L"); });
    field("p_max", [&](const std::string& v) { c.p_max = positive(detail::parse_number(v), "p_max"); });
    field("nx", [&](const std::string& v) {
        c.nx = detail::parse_int(v);
        if (c.nx < 8) throw std::invalid_argument("nx must be >= 8");
    });
    field("np", [&](const std::string& v) {
        c.np = detail::parse_int(v);
        if (c.np % 2 == 0) throw std::invalid_argument("np must be odd");
        if (c.np < 9) throw std::invalid_argument("np must be >= 9");
    });
    field("nt_per_window", [&](const std::string& v) {
        c.nt_per_window = detail::parse_int(v);
        if (c.nt_per_window < 1) throw std::invalid_argument("nt_per_window must be >= 1");
    });
    field("window_length", [&](const std::string& v) {
        c.window_length = positive(detail::parse_number(v), "window_length");
    });
    field("t_end", [&](const std::string& v) {
        c.t_end = positive(detail::parse_number(v), "t_end");
        const double k = c.t_end / c.window_length;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k) || std::round(k) < 1)
            throw std::invalid_argument("t_end must be a whole number of windows");
    });
    field("tol_fp", [&](const std::string& v) { c.tol_fp = positive(detail::parse_number(v), "tol_fp"); });
    field("max_iters", [&](const std::string& v) {
        c.max_iters = detail::parse_int(v);
        if (c.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    });
    field("f0", [&](const std::string& v) {
        c.f0 = detail::parse_function(v);
        validate_f0_spec(c.f0);
    });
    field("n_ext", [&](const std::string& v) {
        c.n_ext = detail::parse_function(v);
        validate_next_spec(c.n_ext);
    });
    field("A0", [&](const std::string& v) {
        c.A0 = detail::parse_function(v);
        validate_wave_spec(c.A0);
    });
    field("Adot0", [&](const std::string& v) {
        c.Adot0 = detail::parse_function(v);
        validate_wave_spec(c.Adot0);
    });
    field("sigma", [&](const std::string& v) {
        make_generator(v);
        c.sigma = v;
    });
    field("output_dir", [&](const std::string& v) {
        if (v.empty()) throw std::invalid_argument("output_dir must not be empty");
        c.output_dir = v;
    });
    field("snapshot_stride", [&](const std::string& v) {
        c.snapshot_stride = detail::parse_int(v);
        if (c.snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
    });
    return c;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    std::string s;
    auto put = [&](const char* k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
    put("model", to_string(c.model));
    put("L", format_double(c.L));
    put("p_max", format_double(c.p_max));
    put("nx", std::to_string(c.nx));
    put("np", std::to_string(c.np));
    put("nt_per_window", std::to_string(c.nt_per_window));
    put("window_length", format_double(c.window_length));
    put("t_end", format_double(c.t_end));
    put("tol_fp", format_double(c.tol_fp));
    put("max_iters", std::to_string(c.max_iters));
    put("f0", to_string(c.f0));
    put("n_ext", to_string(c.n_ext));
    put("A0", to_string(c.A0));
    put("Adot0", to_string(c.Adot0));
    put("sigma", c.sigma);
    put("output_dir", c.output_dir);
    put("snapshot_stride", std::to_string(c.snapshot_stride));
    return s;
}

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lpvm
