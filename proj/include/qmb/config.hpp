// Experiment configuration: strict JSON ingestion (unknown keys are
// rejected, physical invariants are checked with the offending field
// named), defaults with recorded provenance, and sweep expansion.
#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qmb/csv.hpp"
#include "qmb/dynamics.hpp"
#include "qmb/errors.hpp"
#include "qmb/thermo.hpp"

namespace qmb {

using json = nlohmann::json;

enum class Task { Volume, NmMeasure, Threshold, PowerLawFit, Work, RateError, CompareMe };

inline const char* to_string(Task t) {
    switch (t) {
        case Task::Volume: return "volume";
        case Task::NmMeasure: return "nm-measure";
        case Task::Threshold: return "threshold";
        case Task::PowerLawFit: return "fit-powerlaw";
        case Task::Work: return "work";
        case Task::RateError: return "rate-error";
        case Task::CompareMe: return "compare-me";
    }
    return "?";
}

inline Task task_from_string(const std::string& s) {
    for (Task t : {Task::Volume, Task::NmMeasure, Task::Threshold, Task::PowerLawFit,
                   Task::Work, Task::RateError, Task::CompareMe})
        if (s == to_string(t)) return t;
    throw ConfigError("unknown task \"" + s + "\"");
}

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct VolumeSpec {
    double t_horizon = 0.0;  // 0 = 15 / kappa_bar
    double rise_tol = kRiseTol;
};

struct ThresholdSpec {
    double resolution = 0.01;
    double bracket_lo = 0.01;
    double bracket_hi = 100.0;
    double t_horizon = 0.0;  // 0 = onset window 2 / kappa_bar
    double rise_tol = kRiseTol;
};

struct FitSpec {
    std::vector<double> temperatures;               // thresholds computed here
    std::vector<std::pair<double, double>> points;  // or supplied directly
    ThresholdSpec threshold;
};

struct WorkSpec {
    DriveKind drive = DriveKind::DressedEpsilon1;
    double t_end = 0.0;  // 0 = max(20 drive periods, 15 / kappa_bar)
};

struct GridSpec {
    std::vector<double> values;
};

struct RateErrorSpec {
    GridSpec j;            // in units of omega1
    GridSpec beta_omega1;  // rescaled inverse temperature
};

struct UnitsSpec {
    double omega2_ghz = 0.0;
    bool angular = false;
};

struct ExperimentConfig {
    ModelParams model;
    MasterEquationKind equation = MasterEquationKind::LocalLindblad;
    Task task = Task::Volume;
    IntegratorSettings integrator;
    std::optional<SweepSpec> sweep;
    VolumeSpec volume;
    ThresholdSpec threshold;
    FitSpec fit;
    WorkSpec work;
    RateErrorSpec rate_error;
    double compare_t_end = 0.0;  // 0 = 10 / kappa_bar
    UnitsSpec units;
    std::string output_path = "out";
    int workers = 0;  // 0 = hardware concurrency

    std::vector<std::string> defaulted;  // provenance of every applied default
    std::vector<std::string> warnings;

    int resolved_workers() const {
        if (workers > 0) return workers;
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 1;
    }
};

namespace detail {

class StrictObject {
public:
    StrictObject(const json& j, std::string scope, std::vector<std::string>* defaulted)
        : j_(j), scope_(std::move(scope)), defaulted_(defaulted) {
        if (!j_.is_object())
            throw ConfigError(scope_.empty() ? "config must be a JSON object"
                                             : scope_ + " must be a JSON object");
    }

    ~StrictObject() = default;

    bool has(const std::string& key) {
        seen_.push_back(key);
        return j_.contains(key);
    }

    double number(const std::string& key) {
        require(key);
        return as_number(j_.at(key), name(key));
    }

    double number_or(const std::string& key, double fallback) {
        if (!has(key)) {
            note_default(key);
            return fallback;
        }
        return as_number(j_.at(key), name(key));
    }

    int integer_or(const std::string& key, int fallback) {
        if (!has(key)) {
            note_default(key);
            return fallback;
        }
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ConfigError(name(key) + " must be an integer");
        return v.get<int>();
    }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) {
            note_default(key);
            return fallback;
        }
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(name(key) + " must be a boolean");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        require(key);
        return as_string(j_.at(key), name(key));
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            note_default(key);
            return fallback;
        }
        return as_string(j_.at(key), name(key));
    }

    std::vector<double> number_array(const std::string& key) {
        require(key);
        const json& v = j_.at(key);
        if (!v.is_array() || v.empty())
            throw ConfigError(name(key) + " must be a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(as_number(e, name(key)));
        return out;
    }

    const json* object_or_null(const std::string& key) {
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    /// Call after all keys have been consumed; rejects anything unknown.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            bool known = false;
            for (const auto& s : seen_)
                if (s == key) { known = true; break; }
            if (!known)
                throw ConfigError("unknown key \"" + name(key) + "\" (strict mode)");
        }
    }

    std::string name(const std::string& key) const {
        return scope_.empty() ? key : scope_ + "." + key;
    }

private:
    void require(const std::string& key) {
        if (!has(key)) throw ConfigError("missing required field \"" + name(key) + "\"");
    }

    void note_default(const std::string& key) {
        if (defaulted_) defaulted_->push_back(name(key));
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where + " must be a number");
        return v.get<double>();
    }

    static std::string as_string(const json& v, const std::string& where) {
        if (!v.is_string()) throw ConfigError(where + " must be a string");
        return v.get<std::string>();
    }

    const json& j_;
    std::string scope_;
    std::vector<std::string>* defaulted_;
    std::vector<std::string> seen_;
};

inline GridSpec parse_grid(const json& j, const std::string& scope,
                           std::vector<std::string>* defaulted) {
    StrictObject o(j, scope, defaulted);
    GridSpec g;
    if (o.has("values")) {
        g.values = o.number_array("values");
    } else {
        const double from = o.number("from");
        const double to = o.number("to");
        const int count = o.integer_or("count", 2);
        const std::string scale = o.string_or("scale", "linear");
        if (count < 2) throw ConfigError(scope + ".count must be >= 2");
        if (scale != "linear" && scale != "log")
            throw ConfigError(scope + ".scale must be \"linear\" or \"log\"");
        if (scale == "log" && !(from > 0 && to > 0))
            throw ConfigError(scope + ": log scale requires positive bounds");
        for (int i = 0; i < count; ++i) {
            const double f = static_cast<double>(i) / (count - 1);
            g.values.push_back(scale == "linear"
                                   ? from + f * (to - from)
                                   : std::exp(std::log(from) + f * (std::log(to) - std::log(from))));
        }
    }
    o.finish();
    return g;
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const json& j) {
    ExperimentConfig cfg;
    detail::StrictObject o(j, "", &cfg.defaulted);

    cfg.model.omega1 = o.number("omega1");
    cfg.model.omega2 = o.number("omega2");
    cfg.model.J = o.number("J");
    cfg.model.kappa_bar = o.number("kappa_bar");
    cfg.model.beta = o.number("beta");
    cfg.model.lambda0 = o.number_or("lambda0", 0.0);
    cfg.model.omega_d = o.number_or("omega_d", 0.0);
    cfg.task = task_from_string(o.string("task"));

    const std::string eq = o.string_or("equation", "local");
    if (eq == "local") cfg.equation = MasterEquationKind::LocalLindblad;
    else if (eq == "nonlocal") cfg.equation = MasterEquationKind::NonlocalSecular;
    else throw ConfigError("equation must be \"local\" or \"nonlocal\"");

    cfg.output_path = o.string_or("output_path", "out");
    cfg.workers = o.integer_or("workers", 0);
    if (cfg.workers < 0) throw ConfigError("workers must be >= 0");

    if (const json* ij = o.object_or_null("integrator")) {
        detail::StrictObject io(*ij, "integrator", &cfg.defaulted);
        cfg.integrator.rel_tol = io.number_or("rel_tol", cfg.integrator.rel_tol);
        cfg.integrator.abs_tol = io.number_or("abs_tol", cfg.integrator.abs_tol);
        cfg.integrator.max_step = io.number_or("max_step", cfg.integrator.max_step);
        cfg.integrator.sample_dt = io.number_or("sample_dt", cfg.integrator.sample_dt);
        io.finish();
    } else {
        cfg.defaulted.push_back("integrator");
    }

    if (const json* sj = o.object_or_null("sweep")) {
        detail::StrictObject so(*sj, "sweep", &cfg.defaulted);
        SweepSpec sweep;
        sweep.parameter = so.string("parameter");
        if (so.has("values")) {
            sweep.values = so.number_array("values");
        } else {
            json grid = *sj;
            grid.erase("parameter");
            sweep.values = detail::parse_grid(grid, "sweep", &cfg.defaulted).values;
            so.has("from"); so.has("to"); so.has("count"); so.has("scale");
        }
        so.finish();
        static const std::vector<std::string> kModelFields = {
            "omega1", "omega2", "J", "kappa_bar", "beta", "lambda0", "omega_d"};
        bool ok = false;
        for (const auto& f : kModelFields) ok = ok || f == sweep.parameter;
        if (!ok)
            throw ConfigError("sweep.parameter \"" + sweep.parameter +
                              "\" does not name a model parameter");
        if (sweep.values.empty()) throw ConfigError("sweep.values must be non-empty");
        cfg.sweep = sweep;
    }

    if (const json* vj = o.object_or_null("volume")) {
        detail::StrictObject vo(*vj, "volume", &cfg.defaulted);
        cfg.volume.t_horizon = vo.number_or("t_horizon", 0.0);
        cfg.volume.rise_tol = vo.number_or("rise_tol", cfg.volume.rise_tol);
        vo.finish();
    }
    if (const json* tj = o.object_or_null("threshold")) {
        detail::StrictObject to(*tj, "threshold", &cfg.defaulted);
        cfg.threshold.resolution = to.number_or("resolution", cfg.threshold.resolution);
        if (to.has("bracket")) {
            const auto br = to.number_array("bracket");
            if (br.size() != 2) throw ConfigError("threshold.bracket must have 2 entries");
            cfg.threshold.bracket_lo = br[0];
            cfg.threshold.bracket_hi = br[1];
        }
        cfg.threshold.t_horizon = to.number_or("t_horizon", 0.0);
        to.finish();
    }
    if (const json* fj = o.object_or_null("fit")) {
        detail::StrictObject fo(*fj, "fit", &cfg.defaulted);
        if (fo.has("temperatures")) cfg.fit.temperatures = fo.number_array("temperatures");
        if (fo.has("points")) {
            const json& pts = fj->at("points");
            if (!pts.is_array()) throw ConfigError("fit.points must be an array of [x, y] pairs");
            for (const auto& e : pts) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                    throw ConfigError("fit.points must be an array of [x, y] pairs");
                cfg.fit.points.emplace_back(e[0].get<double>(), e[1].get<double>());
            }
        }
        if (const json* tj = fo.object_or_null("threshold")) {
            detail::StrictObject to(*tj, "fit.threshold", &cfg.defaulted);
            cfg.fit.threshold.resolution = to.number_or("resolution", cfg.fit.threshold.resolution);
            if (to.has("bracket")) {
                const auto br = to.number_array("bracket");
                if (br.size() != 2) throw ConfigError("fit.threshold.bracket must have 2 entries");
                cfg.fit.threshold.bracket_lo = br[0];
                cfg.fit.threshold.bracket_hi = br[1];
            }
            cfg.fit.threshold.t_horizon = to.number_or("t_horizon", 0.0);
            to.finish();
        }
        fo.finish();
    }
    if (const json* wj = o.object_or_null("work")) {
        detail::StrictObject wo(*wj, "work", &cfg.defaulted);
        const std::string drive = wo.string_or("drive", "dressed");
        if (drive == "dressed") cfg.work.drive = DriveKind::DressedEpsilon1;
        else if (drive == "bare") cfg.work.drive = DriveKind::BareOmega1;
        else throw ConfigError("work.drive must be \"dressed\" or \"bare\"");
        cfg.work.t_end = wo.number_or("t_end", 0.0);
        wo.finish();
    }
    if (const json* rj = o.object_or_null("rate_error")) {
        detail::StrictObject ro(*rj, "rate_error", &cfg.defaulted);
        if (const json* jj = ro.object_or_null("j"))
            cfg.rate_error.j = detail::parse_grid(*jj, "rate_error.j", &cfg.defaulted);
        if (const json* bj = ro.object_or_null("beta_omega1"))
            cfg.rate_error.beta_omega1 =
                detail::parse_grid(*bj, "rate_error.beta_omega1", &cfg.defaulted);
        ro.finish();
    }
    if (const json* cj = o.object_or_null("compare")) {
        detail::StrictObject co(*cj, "compare", &cfg.defaulted);
        cfg.compare_t_end = co.number_or("t_end", 0.0);
        co.finish();
    }
    if (const json* uj = o.object_or_null("units")) {
        detail::StrictObject uo(*uj, "units", &cfg.defaulted);
        cfg.units.omega2_ghz = uo.number_or("omega2_ghz", 0.0);
        cfg.units.angular = uo.boolean_or("angular", false);
        uo.finish();
    }
    o.finish();

    try {
        cfg.model.validate();
        cfg.integrator.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.warnings = cfg.model.warnings();

    // Task-specific requirements, checked before any computation starts.
    if (cfg.task == Task::Work && cfg.model.lambda0 <= 0)
        throw ConfigError("work task requires lambda0 > 0");
    if ((cfg.task == Task::Volume || cfg.task == Task::NmMeasure ||
         cfg.task == Task::Threshold) &&
        cfg.model.lambda0 != 0)
        throw ConfigError("lambda0 must be 0 for the volume analysis tasks");
    if (cfg.task == Task::PowerLawFit && cfg.fit.temperatures.empty() &&
        cfg.fit.points.size() < 3)
        throw ConfigError("fit-powerlaw requires fit.temperatures or >= 3 fit.points");
    if (cfg.task == Task::RateError &&
        (cfg.rate_error.j.values.empty() || cfg.rate_error.beta_omega1.values.empty()))
        throw ConfigError("rate-error requires rate_error.j and rate_error.beta_omega1 grids");
    if ((cfg.task == Task::RateError || cfg.task == Task::PowerLawFit) && cfg.sweep)
        throw ConfigError(std::string("task ") + to_string(cfg.task) +
                          " does not support a sweep axis");
    return cfg;
}

/// Accepts either a filesystem path or an inline JSON document (detected by
/// a leading '{').
inline ExperimentConfig parse_config(const std::string& path_or_text) {
    std::string text;
    const auto first = path_or_text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && path_or_text[first] == '{') {
        text = path_or_text;
    } else {
        std::ifstream in(path_or_text);
        if (!in) throw IoError("cannot read config file: " + path_or_text);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

/// Fully resolved configuration, suitable for re-running the experiment.
inline json resolved_config_json(const ExperimentConfig& cfg) {
    json j;
    j["omega1"] = cfg.model.omega1;
    j["omega2"] = cfg.model.omega2;
    j["J"] = cfg.model.J;
    j["kappa_bar"] = cfg.model.kappa_bar;
    j["beta"] = cfg.model.beta;
    j["lambda0"] = cfg.model.lambda0;
    j["omega_d"] = cfg.model.omega_d;
    j["task"] = to_string(cfg.task);
    j["equation"] = to_string(cfg.equation);
    j["output_path"] = cfg.output_path;
    j["workers"] = cfg.workers;
    j["integrator"] = {{"rel_tol", cfg.integrator.rel_tol},
                       {"abs_tol", cfg.integrator.abs_tol},
                       {"max_step", cfg.integrator.max_step},
                       {"sample_dt", cfg.integrator.sample_dt}};
    if (cfg.sweep)
        j["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    switch (cfg.task) {
        case Task::Volume:
        case Task::NmMeasure:
            j["volume"] = {{"t_horizon", cfg.volume.t_horizon},
                           {"rise_tol", cfg.volume.rise_tol}};
            break;
        case Task::Threshold:
            j["threshold"] = {{"resolution", cfg.threshold.resolution},
                              {"bracket", {cfg.threshold.bracket_lo, cfg.threshold.bracket_hi}},
                              {"t_horizon", cfg.threshold.t_horizon}};
            break;
        case Task::PowerLawFit: {
            json f;
            if (!cfg.fit.temperatures.empty()) f["temperatures"] = cfg.fit.temperatures;
            if (!cfg.fit.points.empty()) {
                json pts = json::array();
                for (const auto& [x, y] : cfg.fit.points) pts.push_back({x, y});
                f["points"] = pts;
            }
            f["threshold"] = {{"resolution", cfg.fit.threshold.resolution},
                              {"bracket",
                               {cfg.fit.threshold.bracket_lo, cfg.fit.threshold.bracket_hi}},
                              {"t_horizon", cfg.fit.threshold.t_horizon}};
            j["fit"] = f;
            break;
        }
        case Task::Work:
            j["work"] = {{"drive", to_string(cfg.work.drive)}, {"t_end", cfg.work.t_end}};
            break;
        case Task::RateError:
            j["rate_error"] = {{"j", {{"values", cfg.rate_error.j.values}}},
                               {"beta_omega1", {{"values", cfg.rate_error.beta_omega1.values}}}};
            break;
        case Task::CompareMe:
            j["compare"] = {{"t_end", cfg.compare_t_end}};
            break;
    }
    if (cfg.units.omega2_ghz > 0)
        j["units"] = {{"omega2_ghz", cfg.units.omega2_ghz}, {"angular", cfg.units.angular}};
    return j;
}

/// One child configuration per sweep value, in declaration order.
inline std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep) return {cfg};
    std::vector<ExperimentConfig> out;
    out.reserve(cfg.sweep->values.size());
    for (const double v : cfg.sweep->values) {
        ExperimentConfig child = cfg;
        child.sweep.reset();
        ModelParams& m = child.model;
        const std::string& f = cfg.sweep->parameter;
        if (f == "omega1") m.omega1 = v;
        else if (f == "omega2") m.omega2 = v;
        else if (f == "J") m.J = v;
        else if (f == "kappa_bar") m.kappa_bar = v;
        else if (f == "beta") m.beta = v;
        else if (f == "lambda0") m.lambda0 = v;
        else if (f == "omega_d") m.omega_d = v;
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("sweep value ") + format_double(v) +
                              " invalid: " + e.what());
        }
        out.push_back(std::move(child));
    }
    return out;
}

}  // namespace qmb
