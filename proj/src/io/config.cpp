#include "mqsbt/io/config.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/io/manifest.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mqsbt::io {

namespace {

enum class Check { None, Positive, NonNegative, AtLeastOne, Probability };

struct Key {
    std::string name;
    Check check;
    // Parses and stores the value; returns false on a malformed value.
    std::function<bool(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool parse_int(const std::string& s, int& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "on" || s == "1") return out = true, true;
    if (s == "false" || s == "off" || s == "0") return out = false, true;
    return false;
}

template <class Get>
Key real_key(const std::string& name, Check c, Get ref) {
    return {name, c,
            [ref](RunConfig& cfg, const std::string& v) { return parse_double(v, ref(cfg)); },
            [ref](const RunConfig& cfg) { return format_double(ref(cfg)); }};
}

template <class Get>
Key int_key(const std::string& name, Check c, Get ref) {
    return {name, c,
            [ref](RunConfig& cfg, const std::string& v) { return parse_int(v, ref(cfg)); },
            [ref](const RunConfig& cfg) { return std::to_string(ref(cfg)); }};
}

const std::vector<Key>& table() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(real_key("geometry.c1", Check::Positive, [](auto& c) -> auto& { return c.geometry.c1; }));
        k.push_back(real_key("geometry.c2", Check::Positive, [](auto& c) -> auto& { return c.geometry.c2; }));
        k.push_back(real_key("geometry.c3", Check::Positive, [](auto& c) -> auto& { return c.geometry.c3; }));
        k.push_back(real_key("geometry.r1", Check::Positive, [](auto& c) -> auto& { return c.geometry.r1; }));
        k.push_back(real_key("geometry.r2", Check::Positive, [](auto& c) -> auto& { return c.geometry.r2; }));
        k.push_back(real_key("geometry.r3", Check::Positive, [](auto& c) -> auto& { return c.geometry.r3; }));
        k.push_back(real_key("geometry.r4", Check::Positive, [](auto& c) -> auto& { return c.geometry.r4; }));
        k.push_back(real_key("geometry.z1", Check::None, [](auto& c) -> auto& { return c.geometry.z1; }));
        k.push_back(real_key("geometry.z2", Check::None, [](auto& c) -> auto& { return c.geometry.z2; }));
        k.push_back(real_key("geometry.z3", Check::None, [](auto& c) -> auto& { return c.geometry.z3; }));
        k.push_back(real_key("geometry.z4", Check::None, [](auto& c) -> auto& { return c.geometry.z4; }));
        k.push_back(int_key("geometry.resolution", Check::AtLeastOne, [](auto& c) -> auto& { return c.geometry.resolution; }));
        k.push_back({"geometry.shells", Check::None,
                     [](RunConfig& c, const std::string& v) { return parse_bool(v, c.geometry.shells); },
                     [](const RunConfig& c) { return std::string(c.geometry.shells ? "true" : "false"); }});
        k.push_back(real_key("material.sigma_iron", Check::Positive, [](auto& c) -> auto& { return c.material.sigma1; }));
        k.push_back(real_key("material.nu_iron", Check::Positive, [](auto& c) -> auto& { return c.material.nu_iron; }));
        k.push_back(real_key("material.nu_air", Check::Positive, [](auto& c) -> auto& { return c.material.nu_air; }));
        k.push_back(real_key("material.R", Check::Positive, [](auto& c) -> auto& { return c.material.R(0, 0); }));
        k.push_back(real_key("winding.turns", Check::Positive, [](auto& c) -> auto& { return c.turns; }));
        k.push_back(real_key("winding.area", Check::Positive, [](auto& c) -> auto& { return c.area; }));
        k.push_back(real_key("mor.tol_adi", Check::Probability, [](auto& c) -> auto& { return c.mor.tol_adi; }));
        k.push_back(int_key("mor.maxit", Check::AtLeastOne, [](auto& c) -> auto& { return c.mor.maxit; }));
        k.push_back(real_key("mor.eps_shift", Check::Probability, [](auto& c) -> auto& { return c.mor.eps_shift; }));
        k.push_back({"mor.shift_method", Check::None,
                     [](RunConfig& c, const std::string& v) {
                         if (v == "wachspress") c.mor.shift_method = bt::ShiftMethod::Wachspress;
                         else if (v == "logspace") c.mor.shift_method = bt::ShiftMethod::Logspace;
                         else return false;
                         return true;
                     },
                     [](const RunConfig& c) { return std::string(bt::shift_method_name(c.mor.shift_method)); }});
        k.push_back(int_key("mor.shift_count", Check::NonNegative, [](auto& c) -> auto& { return c.mor.shift_count; }));
        k.push_back(int_key("mor.ell", Check::NonNegative, [](auto& c) -> auto& { return c.mor.ell; }));
        k.push_back(real_key("mor.tol_hsv", Check::Positive, [](auto& c) -> auto& { return c.mor.tol_hsv; }));
        k.push_back(int_key("mor.n0", Check::None, [](auto& c) -> auto& { return c.mor.n0; }));
        k.push_back(real_key("analysis.omega_min", Check::Positive, [](auto& c) -> auto& { return c.analysis.omega_min; }));
        k.push_back(real_key("analysis.omega_max", Check::Positive, [](auto& c) -> auto& { return c.analysis.omega_max; }));
        k.push_back(int_key("analysis.omega_points", Check::AtLeastOne, [](auto& c) -> auto& { return c.analysis.omega_points; }));
        k.push_back(real_key("analysis.t_final", Check::Positive, [](auto& c) -> auto& { return c.analysis.t_final; }));
        k.push_back(int_key("analysis.steps", Check::AtLeastOne, [](auto& c) -> auto& { return c.analysis.steps; }));
        k.push_back(real_key("analysis.amplitude", Check::Positive, [](auto& c) -> auto& { return c.analysis.amplitude; }));
        k.push_back(real_key("analysis.frequency", Check::Positive, [](auto& c) -> auto& { return c.analysis.frequency; }));
        k.push_back(int_key("analysis.passivity_samples", Check::AtLeastOne, [](auto& c) -> auto& { return c.analysis.passivity_samples; }));
        k.push_back({"output.dir", Check::None,
                     [](RunConfig& c, const std::string& v) { return !v.empty() && (c.output_dir = v, true); },
                     [](const RunConfig& c) { return c.output_dir; }});
        k.push_back(int_key("oracle.cap", Check::NonNegative, [](auto& c) -> auto& { return c.oracle_cap; }));
        return k;
    }();
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool passes(Check c, const std::string& value) {
    if (c == Check::None) return true;
    double v = 0.0;
    if (!parse_double(value, v)) return true;  // non-numeric keys carry no check
    switch (c) {
        case Check::Positive: return v > 0.0;
        case Check::NonNegative: return v >= 0.0;
        case Check::AtLeastOne: return v >= 1.0;
        case Check::Probability: return v > 0.0 && v < 1.0;
        case Check::None: break;
    }
    return true;
}

const char* check_text(Check c) {
    switch (c) {
        case Check::Positive: return "must be positive";
        case Check::NonNegative: return "must be non-negative";
        case Check::AtLeastOne: return "must be at least 1";
        case Check::Probability: return "must lie in (0, 1)";
        case Check::None: break;
    }
    return "";
}

}  // namespace

std::vector<fem::WindingSpec> RunConfig::windings() const {
    fem::WindingSpec w;
    w.turns = turns;
    w.area = area;
    w.r3 = geometry.r3;
    w.r4 = geometry.r4;
    w.z3 = geometry.z3;
    w.z4 = geometry.z4;
    return {w};
}

std::string RunConfig::echo() const {
    std::ostringstream o;
    for (const auto& k : table()) o << k.name << " = " << k.get(*this) << "\n";
    return o.str();
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : table()) out.push_back(k.name);
    return out;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("missing key");
        if (value.empty()) fail("missing value for '" + key + "'");
        const Key* k = nullptr;
        for (const auto& cand : table())
            if (cand.name == key) k = &cand;
        if (!k) fail("unknown key '" + key + "'");
        if (!seen.insert(key).second) fail("repeated key '" + key + "'");
        if (!k->set(cfg, value)) fail("invalid value '" + value + "' for '" + key + "'");
        if (!passes(k->check, value)) fail("'" + key + "' " + check_text(k->check) + ", got " + value);
    }
    try {
        validate(cfg);
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void validate(const RunConfig& cfg) {
    mesh::validate(cfg.geometry);
    fem::validate(cfg.material);
    for (const auto& w : cfg.windings()) fem::validate(w);
    if (!(cfg.analysis.omega_min < cfg.analysis.omega_max))
        throw ValidationError("analysis.omega_min must be below analysis.omega_max");
    if (cfg.mor.shift_method == bt::ShiftMethod::Logspace && cfg.mor.shift_count == 0)
        throw ValidationError("mor.shift_method = logspace needs mor.shift_count > 0");
    if (cfg.mor.n0 < -1) throw ValidationError("mor.n0 must be -1 (derived) or a count");
}

}  // namespace mqsbt::io
