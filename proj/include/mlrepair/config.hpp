#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mlrepair/ingredients.hpp"

namespace mlrepair {

enum class Variant { Arja, ArjaV, ArjaM, ArjaB, ArjaS, ArjaR, Kali };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Arja: return "arja";
        case Variant::ArjaV: return "arja_v";
        case Variant::ArjaM: return "arja_m";
        case Variant::ArjaB: return "arja_b";
        case Variant::ArjaS: return "arja_s";
        case Variant::ArjaR: return "arja_r";
        case Variant::Kali: return "kali";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(const std::string& s) {
    for (Variant v : {Variant::Arja, Variant::ArjaV, Variant::ArjaM, Variant::ArjaB,
                      Variant::ArjaS, Variant::ArjaR, Variant::Kali})
        if (s == variant_name(v)) return v;
    return std::nullopt;
}

inline ScreeningFlags screening_for(Variant v) {
    ScreeningFlags f;
    f.match_vars = v == Variant::ArjaV || v == Variant::ArjaB;
    f.match_funcs = v == Variant::ArjaM || v == Variant::ArjaB;
    return f;
}

inline const char* mode_name(IngredientMode m) {
    switch (m) {
        case IngredientMode::File: return "file";
        case IngredientMode::Package: return "package";
        case IngredientMode::Application: return "application";
    }
    return "?";
}

inline std::optional<IngredientMode> parse_mode(const std::string& s) {
    for (IngredientMode m : {IngredientMode::File, IngredientMode::Package,
                             IngredientMode::Application})
        if (s == mode_name(m)) return m;
    return std::nullopt;
}

struct SearchConfig {
    int population = 40;
    int generations = 50;
    double gamma_min = 0.1;
    int n_max = 40;
    double mu = 0.06;
    double weight = 0.5;
    double p_c = 1.0;
    double p_m = 0.0;     // 0 means 1/n, resolved once n is known
    int n_e = 0;          // 0 disables the simultaneous-edit cap
    int sample_size = 0;  // 0 evaluates the full retained positive set
    uint64_t rng_seed = 1;
    int64_t step_limit = 100000;
    IngredientMode mode = IngredientMode::File;
    Variant variant = Variant::Arja;
    RuleToggles rules;
};

inline bool parse_bool_flag(const std::string& v, bool& out) {
    if (v == "1" || v == "true" || v == "on") {
        out = true;
        return true;
    }
    if (v == "0" || v == "false" || v == "off") {
        out = false;
        return true;
    }
    return false;
}

// One key=value assignment; unknown keys and malformed values report back so
// callers can complain with context.
inline bool apply_config_entry(SearchConfig& cfg, const std::string& key, const std::string& value,
                               std::string& err) {
    auto as_int = [&](int& out) {
        std::istringstream in(value);
        long long v = 0;
        if (!(in >> v) || !in.eof() || v < 0) return false;
        out = static_cast<int>(v);
        return true;
    };
    auto as_double = [&](double& out) {
        std::istringstream in(value);
        double v = 0;
        if (!(in >> v) || !in.eof() || v < 0) return false;
        out = v;
        return true;
    };
    bool ok = true;
    if (key == "population")
        ok = as_int(cfg.population) && cfg.population > 0;
    else if (key == "generations")
        ok = as_int(cfg.generations) && cfg.generations > 0;
    else if (key == "gamma_min")
        ok = as_double(cfg.gamma_min);
    else if (key == "n_max")
        ok = as_int(cfg.n_max) && cfg.n_max > 0;
    else if (key == "mu")
        ok = as_double(cfg.mu);
    else if (key == "weight")
        ok = as_double(cfg.weight);
    else if (key == "p_c")
        ok = as_double(cfg.p_c);
    else if (key == "p_m")
        ok = as_double(cfg.p_m);
    else if (key == "n_e")
        ok = as_int(cfg.n_e);
    else if (key == "sample_size")
        ok = as_int(cfg.sample_size);
    else if (key == "seed") {
        std::istringstream in(value);
        ok = static_cast<bool>(in >> cfg.rng_seed) && in.eof();
    } else if (key == "step_limit") {
        std::istringstream in(value);
        ok = static_cast<bool>(in >> cfg.step_limit) && in.eof() && cfg.step_limit > 0;
    } else if (key == "mode") {
        auto m = parse_mode(value);
        ok = m.has_value();
        if (m) cfg.mode = *m;
    } else if (key == "variant") {
        auto v = parse_variant(value);
        ok = v.has_value();
        if (v) cfg.variant = *v;
    } else if (key == "operation_rules")
        ok = parse_bool_flag(value, cfg.rules.operation_rules);
    else if (key == "ingredient_rules")
        ok = parse_bool_flag(value, cfg.rules.ingredient_rules);
    else if (key == "decode_rules")
        ok = parse_bool_flag(value, cfg.rules.decode_rules);
    else {
        err = "unknown configuration key '" + key + "'";
        return false;
    }
    if (!ok) err = "bad value '" + value + "' for key '" + key + "'";
    return ok;
}

// Config files are plain text: one key=value per line, '#' comments.
inline bool apply_config_text(SearchConfig& cfg, const std::string& text, std::string& err) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string entry = line.substr(first, last - first + 1);
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
            err = "line " + std::to_string(lineno) + ": expected key=value";
            return false;
        }
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (!apply_config_entry(cfg, trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)), err)) {
            err = "line " + std::to_string(lineno) + ": " + err;
            return false;
        }
    }
    return true;
}

}  // namespace mlrepair
