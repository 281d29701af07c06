#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paw/engine.hpp"
#include "paw/errors.hpp"
#include "paw/model.hpp"

namespace paw {

using nlohmann::json;

/// Discrete-limit solver knobs.
struct SolveOptions {
    std::size_t J = 100'000;
    double h = 0.01;
    double t_max = 50.0;
    std::size_t c_window_lo = 1'000;  // tail-constant fit window
    std::size_t c_window_hi = 10'000;
};

/// Comparison / estimator knobs.
struct AnalysisOptions {
    double tail_fraction = 0.01;
    std::size_t compare_j_max = 10;
    std::vector<double> compare_t = {0.5, 1.0, 2.0, 5.0, 10.0};
    std::optional<double> sup_tolerance;  // compare exits nonzero when exceeded
    std::size_t doubling_lo = 1'000;
    std::size_t doubling_hi = 10'000;
    double slope_lo = 20.0;
    double slope_hi = 40.0;
};

/// Everything a CLI invocation needs: the model plus tool options.
struct FullConfig {
    ModelConfig model;
    RunOptions run;
    std::uint32_t replicas = 1;
    bool dump_weights = false;
    SolveOptions solve;
    AnalysisOptions analysis;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + context);
    }
}

inline WeightLaw parse_law(const json& j, const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be an object");
    if (!j.contains("family")) throw ConfigError(context + ": missing \"family\"");
    const std::string family = j.at("family").get<std::string>();
    if (family == "discrete_pmf") {
        check_keys(j, {"family", "pmf"}, context);
        std::vector<std::pair<std::int64_t, double>> atoms;
        for (const auto& entry : j.at("pmf")) {
            if (!entry.is_array() || entry.size() != 2)
                throw ConfigError(context + ": pmf entries must be [value, probability]");
            atoms.emplace_back(entry[0].get<std::int64_t>(), entry[1].get<double>());
        }
        return WeightLaw::discrete(std::move(atoms));
    }
    if (family == "exponential") {
        check_keys(j, {"family", "rate"}, context);
        return WeightLaw::exponential(j.at("rate").get<double>());
    }
    if (family == "gamma") {
        check_keys(j, {"family", "shape", "scale"}, context);
        return WeightLaw::gamma(j.at("shape").get<double>(), j.at("scale").get<double>());
    }
    if (family == "uniform") {
        check_keys(j, {"family", "lo", "hi"}, context);
        return WeightLaw::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    }
    if (family == "constant") {
        check_keys(j, {"family", "value"}, context);
        return WeightLaw::constant(j.at("value").get<double>());
    }
    throw ConfigError(context + ": unknown family \"" + family + "\"");
}

inline json law_to_json(const WeightLaw& w) {
    json j;
    switch (w.family) {
        case WeightLaw::Family::DiscretePmf: {
            j["family"] = "discrete_pmf";
            json pmf = json::array();
            for (const auto& [v, p] : w.pmf) pmf.push_back({v, p});
            j["pmf"] = pmf;
            break;
        }
        case WeightLaw::Family::Exponential:
            j["family"] = "exponential";
            j["rate"] = w.rate;
            break;
        case WeightLaw::Family::Gamma:
            j["family"] = "gamma";
            j["shape"] = w.shape;
            j["scale"] = w.scale;
            break;
        case WeightLaw::Family::Uniform:
            j["family"] = "uniform";
            j["lo"] = w.lo;
            j["hi"] = w.hi;
            break;
        case WeightLaw::Family::Constant:
            j["family"] = "constant";
            j["value"] = w.value;
            break;
    }
    return j;
}

}  // namespace detail

inline FullConfig parse_config(const json& j) {
    detail::check_keys(j,
                       {"mode", "seed", "n_steps", "x_law", "nu_law", "bonus", "run", "solve",
                        "analysis"},
                       "config");
    for (const char* required : {"mode", "seed", "n_steps", "x_law", "nu_law", "bonus"})
        if (!j.contains(required))
            throw ConfigError(std::string("config: missing \"") + required + "\"");

    FullConfig cfg;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "discrete")
        cfg.model.mode = Mode::Discrete;
    else if (mode == "continuous")
        cfg.model.mode = Mode::Continuous;
    else
        throw ConfigError("config: mode must be \"discrete\" or \"continuous\"");
    cfg.model.seed = j.at("seed").get<std::uint64_t>();
    cfg.model.n_steps = j.at("n_steps").get<std::uint64_t>();
    cfg.model.x_law = detail::parse_law(j.at("x_law"), "x_law");

    {
        const json& nu = j.at("nu_law");
        detail::check_keys(nu, {"pmf", "truncation"}, "nu_law");
        std::vector<std::pair<std::uint32_t, double>> atoms;
        for (const auto& entry : nu.at("pmf")) {
            if (!entry.is_array() || entry.size() != 2)
                throw ConfigError("nu_law: pmf entries must be [k, probability]");
            atoms.emplace_back(entry[0].get<std::uint32_t>(), entry[1].get<double>());
        }
        Truncation trunc = Truncation::Min;
        if (nu.contains("truncation")) {
            const std::string t = nu.at("truncation").get<std::string>();
            if (t == "min")
                trunc = Truncation::Min;
            else if (t == "conditional")
                trunc = Truncation::Conditional;
            else
                throw ConfigError("nu_law: truncation must be \"min\" or \"conditional\"");
        }
        cfg.model.nu_law = AuthorCountLaw::from_pmf(std::move(atoms), trunc);
    }

    {
        const json& b = j.at("bonus");
        if (!b.contains("scheme")) throw ConfigError("bonus: missing \"scheme\"");
        const std::string scheme = b.at("scheme").get<std::string>();
        if (scheme == "equal_split") {
            detail::check_keys(b, {"scheme", "z_law"}, "bonus");
            cfg.model.bonus = BonusScheme::equal_split(detail::parse_law(b.at("z_law"), "z_law"));
        } else if (scheme == "full_bonus") {
            detail::check_keys(b, {"scheme", "y_law"}, "bonus");
            cfg.model.bonus = BonusScheme::full_bonus(detail::parse_law(b.at("y_law"), "y_law"));
        } else if (scheme == "exchangeable_iid") {
            detail::check_keys(b, {"scheme", "y_law"}, "bonus");
            cfg.model.bonus =
                BonusScheme::exchangeable_iid(detail::parse_law(b.at("y_law"), "y_law"));
        } else {
            throw ConfigError("bonus: unknown scheme \"" + scheme + "\"");
        }
    }

    if (j.contains("run")) {
        const json& r = j.at("run");
        detail::check_keys(
            r, {"checkpoints", "snapshot_j_max", "t_grid", "max_steps", "replicas",
                "dump_weights"},
            "run");
        if (r.contains("checkpoints"))
            cfg.run.checkpoints = r.at("checkpoints").get<std::vector<std::uint64_t>>();
        if (r.contains("snapshot_j_max"))
            cfg.run.snapshot_j_max = r.at("snapshot_j_max").get<std::size_t>();
        if (r.contains("t_grid")) cfg.run.t_grid = r.at("t_grid").get<std::vector<double>>();
        if (r.contains("max_steps")) cfg.run.max_steps = r.at("max_steps").get<std::uint64_t>();
        if (r.contains("replicas")) cfg.replicas = r.at("replicas").get<std::uint32_t>();
        if (r.contains("dump_weights")) cfg.dump_weights = r.at("dump_weights").get<bool>();
    }

    if (j.contains("solve")) {
        const json& s = j.at("solve");
        detail::check_keys(s, {"J", "h", "t_max", "c_window"}, "solve");
        if (s.contains("J")) cfg.solve.J = s.at("J").get<std::size_t>();
        if (s.contains("h")) cfg.solve.h = s.at("h").get<double>();
        if (s.contains("t_max")) cfg.solve.t_max = s.at("t_max").get<double>();
        if (s.contains("c_window")) {
            const auto w = s.at("c_window").get<std::vector<std::size_t>>();
            if (w.size() != 2) throw ConfigError("solve: c_window must be [lo, hi]");
            cfg.solve.c_window_lo = w[0];
            cfg.solve.c_window_hi = w[1];
        }
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        detail::check_keys(a,
                           {"tail_fraction", "compare_j_max", "compare_t", "sup_tolerance",
                            "doubling_window", "slope_window"},
                           "analysis");
        if (a.contains("tail_fraction"))
            cfg.analysis.tail_fraction = a.at("tail_fraction").get<double>();
        if (a.contains("compare_j_max"))
            cfg.analysis.compare_j_max = a.at("compare_j_max").get<std::size_t>();
        if (a.contains("compare_t"))
            cfg.analysis.compare_t = a.at("compare_t").get<std::vector<double>>();
        if (a.contains("sup_tolerance"))
            cfg.analysis.sup_tolerance = a.at("sup_tolerance").get<double>();
        if (a.contains("doubling_window")) {
            const auto w = a.at("doubling_window").get<std::vector<std::size_t>>();
            if (w.size() != 2) throw ConfigError("analysis: doubling_window must be [lo, hi]");
            cfg.analysis.doubling_lo = w[0];
            cfg.analysis.doubling_hi = w[1];
        }
        if (a.contains("slope_window")) {
            const auto w = a.at("slope_window").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("analysis: slope_window must be [lo, hi]");
            cfg.analysis.slope_lo = w[0];
            cfg.analysis.slope_hi = w[1];
        }
    }
    return cfg;
}

inline FullConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

/// Canonical serialization (nlohmann objects are key-sorted, so the dump
/// is stable) used for provenance hashing and round trips.
inline json to_json(const FullConfig& cfg) {
    json j;
    j["mode"] = cfg.model.mode == Mode::Discrete ? "discrete" : "continuous";
    j["seed"] = cfg.model.seed;
    j["n_steps"] = cfg.model.n_steps;
    j["x_law"] = detail::law_to_json(cfg.model.x_law);
    {
        json nu;
        json pmf = json::array();
        for (const auto& [k, p] : cfg.model.nu_law.pmf) pmf.push_back({k, p});
        nu["pmf"] = pmf;
        nu["truncation"] =
            cfg.model.nu_law.truncation == Truncation::Min ? "min" : "conditional";
        j["nu_law"] = nu;
    }
    {
        json b;
        b["scheme"] = scheme_name(cfg.model.bonus.scheme);
        b[cfg.model.bonus.scheme == Scheme::EqualSplit ? "z_law" : "y_law"] =
            detail::law_to_json(cfg.model.bonus.law);
        j["bonus"] = b;
    }
    {
        json r;
        if (!cfg.run.checkpoints.empty()) r["checkpoints"] = cfg.run.checkpoints;
        r["snapshot_j_max"] = cfg.run.snapshot_j_max;
        r["t_grid"] = cfg.run.t_grid;
        r["max_steps"] = cfg.run.max_steps;
        r["replicas"] = cfg.replicas;
        r["dump_weights"] = cfg.dump_weights;
        j["run"] = r;
    }
    {
        json s;
        s["J"] = cfg.solve.J;
        s["h"] = cfg.solve.h;
        s["t_max"] = cfg.solve.t_max;
        s["c_window"] = {cfg.solve.c_window_lo, cfg.solve.c_window_hi};
        j["solve"] = s;
    }
    {
        json a;
        a["tail_fraction"] = cfg.analysis.tail_fraction;
        a["compare_j_max"] = cfg.analysis.compare_j_max;
        a["compare_t"] = cfg.analysis.compare_t;
        if (cfg.analysis.sup_tolerance) a["sup_tolerance"] = *cfg.analysis.sup_tolerance;
        a["doubling_window"] = {cfg.analysis.doubling_lo, cfg.analysis.doubling_hi};
        a["slope_window"] = {cfg.analysis.slope_lo, cfg.analysis.slope_hi};
        j["analysis"] = a;
    }
    return j;
}

/// FNV-1a over the canonical dump; stable across runs of the same build.
inline std::string config_hash(const FullConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace paw
