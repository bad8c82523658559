// Experiment orchestration: dispatches a validated configuration to the
// physics modules, fans sweep points out over a bounded worker pool, and
// serialises results as CSV plus a JSON metadata sidecar. Sweep points are
// pure functions of their child configuration and are written back into
// index-addressed slots, so the output is byte-identical for any worker
// count.
#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qmb/config.hpp"
#include "qmb/csv.hpp"
#include "qmb/errors.hpp"
#include "qmb/nonmarkov.hpp"
#include "qmb/thermo.hpp"
#include "qmb/units.hpp"
#include "qmb/version.hpp"

namespace qmb {

template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct TaskOutput {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json extra;  // per-run scalars for the metadata sidecar
};

struct RateErrorMap {
    std::vector<double> j_values;
    std::vector<double> beta_omega1_values;
    Eigen::MatrixXd err_eps1;  // j index x beta index
    Eigen::MatrixXd err_eps2;
};

/// Relative error of replacing the dressed-gap decay rates gamma(eps_i) by
/// the bare TQ rate gamma(omega2), on a (J, beta*omega1) grid.
inline RateErrorMap run_rate_error(const ExperimentConfig& cfg) {
    RateErrorMap map;
    map.j_values = cfg.rate_error.j.values;
    map.beta_omega1_values = cfg.rate_error.beta_omega1.values;
    const auto nj = static_cast<Eigen::Index>(map.j_values.size());
    const auto nb = static_cast<Eigen::Index>(map.beta_omega1_values.size());
    map.err_eps1.resize(nj, nb);
    map.err_eps2.resize(nj, nb);
    for (Eigen::Index a = 0; a < nj; ++a) {
        ModelParams p = cfg.model;
        p.J = map.j_values[a];
        const EigenSystem es = eigensystem(p);
        for (Eigen::Index b = 0; b < nb; ++b) {
            p.beta = map.beta_omega1_values[b] / p.omega1;
            const double base = ohmic_rates(p.omega2, p).down;
            map.err_eps1(a, b) = std::abs(ohmic_rates(es.eps1, p).down - base) / base;
            map.err_eps2(a, b) = std::abs(ohmic_rates(es.eps2, p).down - base) / base;
        }
    }
    return map;
}

namespace detail {

inline double volume_horizon(const ExperimentConfig& cfg) {
    if (cfg.volume.t_horizon > 0) return cfg.volume.t_horizon;
    if (cfg.model.kappa_bar <= 0)
        throw ConfigError("volume.t_horizon must be set when kappa_bar = 0");
    return 15.0 / cfg.model.kappa_bar;
}

inline TaskOutput run_volume_single(const ExperimentConfig& cfg) {
    const double horizon = volume_horizon(cfg);
    const auto maps = tomography(cfg.model, cfg.equation, horizon, cfg.integrator);
    const VolumeSeries vs = volume_series(maps, cfg.volume.rise_tol);
    TaskOutput out;
    out.columns = {"t", "kappa_t", "volume"};
    out.rows.reserve(vs.vol.size());
    for (std::size_t k = 0; k < vs.vol.size(); ++k)
        out.rows.push_back({vs.times[k], vs.times[k] * cfg.model.kappa_bar, vs.vol[k]});
    out.extra = {{"t_horizon", horizon},
                 {"nm_measure", nm_measure(vs)},
                 {"has_temporary_increase", has_temporary_increase(vs)},
                 {"rise_tol", vs.rise_tol},
                 {"segments", vs.segments.size()}};
    return out;
}

inline TaskOutput run_nm_single(const ExperimentConfig& cfg) {
    const double horizon = volume_horizon(cfg);
    const auto maps = tomography(cfg.model, cfg.equation, horizon, cfg.integrator);
    const VolumeSeries vs = volume_series(maps, cfg.volume.rise_tol);
    const double n = nm_measure(vs);
    TaskOutput out;
    out.columns = {"j_over_kappa_bar", "omega2_beta", "delta_over_kappa_bar", "nm_measure"};
    out.rows.push_back({cfg.model.J / cfg.model.kappa_bar, cfg.model.omega2 * cfg.model.beta,
                        cfg.model.detuning() / cfg.model.kappa_bar, n});
    out.extra = {{"nm_measure", n}, {"t_horizon", horizon}};
    return out;
}

inline TaskOutput run_threshold_single(const ExperimentConfig& cfg) {
    const double temperature = cfg.model.omega2 * cfg.model.beta;
    const double detuning = cfg.model.detuning() / cfg.model.kappa_bar;
    const ThresholdResult th = find_threshold(
        cfg.model, temperature, detuning, cfg.threshold.resolution, cfg.threshold.t_horizon,
        cfg.equation, cfg.integrator, cfg.threshold.bracket_lo, cfg.threshold.bracket_hi);
    TaskOutput out;
    out.columns = {"omega2_beta", "delta_over_kappa_bar", "j_over_kappa_th", "bracket_lo",
                   "bracket_hi"};
    std::vector<double> row = {temperature, detuning, th.j_over_kappa_th, th.bracket_lo,
                               th.bracket_hi};
    if (cfg.units.omega2_ghz > 0) {
        const UnitsReport u =
            physical_units_report(cfg.model, cfg.units.omega2_ghz, cfg.units.angular);
        out.columns.push_back("j_th_mhz");
        out.columns.push_back("temperature_kelvin");
        row.push_back(th.j_over_kappa_th * u.kappa_bar_mhz);
        row.push_back(u.temperature_kelvin);
    }
    out.rows.push_back(row);
    out.extra = {{"j_over_kappa_th", th.j_over_kappa_th},
                 {"bracket", {th.bracket_lo, th.bracket_hi}},
                 {"resolution", cfg.threshold.resolution}};
    return out;
}

inline TaskOutput run_work_single(const ExperimentConfig& cfg) {
    ModelParams p = cfg.model;
    const double omega_d = drive_frequency(p, cfg.work.drive);
    double t_end = cfg.work.t_end;
    if (t_end <= 0) {
        const double periods = 20.0 * 2.0 * M_PI / omega_d;
        t_end = p.kappa_bar > 0 ? std::max(periods, 15.0 / p.kappa_bar) : periods;
    }
    const Mat4 rho0 = initial_state(gibbs_qubit(p.omega1, p.beta), p);
    const WorkSeries ws = average_work(p, cfg.equation, rho0, t_end, cfg.work.drive,
                                       cfg.integrator);
    TaskOutput out;
    out.columns = {"t", "kappa_t", "power", "work"};
    out.rows.reserve(ws.times.size());
    for (std::size_t k = 0; k < ws.times.size(); ++k)
        out.rows.push_back(
            {ws.times[k], ws.times[k] * p.kappa_bar, ws.power[k], ws.work[k]});
    out.extra = {{"omega_d", omega_d},
                 {"drive", to_string(cfg.work.drive)},
                 {"t_end", t_end},
                 {"final_work", ws.work.back()}};
    if (ws.times.back() >= 5.0 * 2.0 * M_PI / omega_d)
        out.extra["suppression_index"] = oscillation_suppression_index(ws);
    return out;
}

inline TaskOutput run_compare_single(const ExperimentConfig& cfg) {
    double t_end = cfg.compare_t_end;
    if (t_end <= 0) {
        if (cfg.model.kappa_bar <= 0)
            throw ConfigError("compare.t_end must be set when kappa_bar = 0");
        t_end = 10.0 / cfg.model.kappa_bar;
    }
    // Doubly thermal product preparation: the discrepancy between the two
    // equations is then set by the decay-rate replacement, not by the
    // coarse-graining of the fast J-exchange transient of coherent seeds.
    const Mat4 rho0 = initial_state(gibbs_qubit(cfg.model.omega1, cfg.model.beta), cfg.model);
    const Trajectory local = propagate(cfg.model, MasterEquationKind::LocalLindblad, rho0,
                                       t_end, cfg.integrator);
    const Trajectory nonlocal = propagate(cfg.model, MasterEquationKind::NonlocalSecular,
                                          rho0, t_end, cfg.integrator);
    TaskOutput out;
    out.columns = {"t", "kappa_t", "trace_distance"};
    double worst = 0.0;
    for (std::size_t k = 0; k < local.times.size(); ++k) {
        const double d = trace_distance_2x2(partial_trace_over_tq(local.states[k]),
                                            partial_trace_over_tq(nonlocal.states[k]));
        worst = std::max(worst, d);
        out.rows.push_back({local.times[k], local.times[k] * cfg.model.kappa_bar, d});
    }
    out.extra = {{"max_trace_distance", worst},
                 {"secular_ratio", secular_validity(cfg.model).ratio},
                 {"t_end", t_end}};
    return out;
}

inline TaskOutput run_rate_error_single(const ExperimentConfig& cfg) {
    const RateErrorMap map = run_rate_error(cfg);
    TaskOutput out;
    out.columns = {"J", "j_over_kappa_bar", "beta_omega1", "err_eps1", "err_eps2"};
    for (std::size_t a = 0; a < map.j_values.size(); ++a)
        for (std::size_t b = 0; b < map.beta_omega1_values.size(); ++b)
            out.rows.push_back({map.j_values[a], map.j_values[a] / cfg.model.kappa_bar,
                                map.beta_omega1_values[b],
                                map.err_eps1(static_cast<Eigen::Index>(a),
                                             static_cast<Eigen::Index>(b)),
                                map.err_eps2(static_cast<Eigen::Index>(a),
                                             static_cast<Eigen::Index>(b))});
    out.extra = {{"grid", {{"j_points", map.j_values.size()},
                           {"beta_points", map.beta_omega1_values.size()}}}};
    return out;
}

inline TaskOutput run_fit_single(const ExperimentConfig& cfg) {
    std::vector<std::pair<double, double>> points = cfg.fit.points;
    if (!cfg.fit.temperatures.empty()) {
        std::vector<std::pair<double, double>> computed(cfg.fit.temperatures.size());
        parallel_for(cfg.fit.temperatures.size(), cfg.resolved_workers(), [&](std::size_t i) {
            const double temp = cfg.fit.temperatures[i];
            const ThresholdResult th = find_threshold(
                cfg.model, temp, 0.0, cfg.fit.threshold.resolution,
                cfg.fit.threshold.t_horizon, cfg.equation, cfg.integrator,
                cfg.fit.threshold.bracket_lo, cfg.fit.threshold.bracket_hi);
            computed[i] = {temp, th.j_over_kappa_th};
        });
        points.insert(points.end(), computed.begin(), computed.end());
    }
    const PowerLawFit fit = fit_power_law(points);
    TaskOutput out;
    out.columns = {"omega2_beta", "j_over_kappa_th"};
    for (const auto& [x, y] : points) out.rows.push_back({x, y});
    out.extra = {{"A_fit", fit.a_fit}, {"B_fit", fit.b_fit}, {"residual", fit.residual}};
    return out;
}

inline TaskOutput run_single(const ExperimentConfig& cfg) {
    switch (cfg.task) {
        case Task::Volume: return run_volume_single(cfg);
        case Task::NmMeasure: return run_nm_single(cfg);
        case Task::Threshold: return run_threshold_single(cfg);
        case Task::PowerLawFit: return run_fit_single(cfg);
        case Task::Work: return run_work_single(cfg);
        case Task::RateError: return run_rate_error_single(cfg);
        case Task::CompareMe: return run_compare_single(cfg);
    }
    throw ConfigError("unhandled task");
}

}  // namespace detail

struct TaskResult {
    std::string csv_path;
    std::string meta_path;
    std::size_t rows = 0;
};

/// Run the configured task (expanding a sweep if present), write
/// <task>.csv and <task>.meta.json under cfg.output_path, and return the
/// file locations. Numerical failures surface as NumericError, filesystem
/// problems as IoError.
inline TaskResult run_task(const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();

    std::vector<ExperimentConfig> children;
    try {
        children = expand_sweep(cfg);
    } catch (const ConfigError&) {
        throw;
    }

    std::vector<TaskOutput> outputs(children.size());
    try {
        // Sweep points fan out; a single run keeps the pool for its own
        // internal parallelism (fit-powerlaw thresholds).
        if (children.size() > 1) {
            parallel_for(children.size(), cfg.resolved_workers(),
                         [&](std::size_t i) { outputs[i] = detail::run_single(children[i]); });
        } else {
            outputs[0] = detail::run_single(children[0]);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericError(e.what());
    }

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_path, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_path);

    const std::string base = (fs::path(cfg.output_path) / to_string(cfg.task)).string();
    TaskResult result;
    result.csv_path = base + ".csv";
    result.meta_path = base + ".meta.json";

    std::vector<std::string> columns = outputs[0].columns;
    if (cfg.sweep) columns.insert(columns.begin(), cfg.sweep->parameter);
    CsvWriter csv(result.csv_path, columns);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        for (const auto& row : outputs[i].rows) {
            if (cfg.sweep) {
                std::vector<double> full = {cfg.sweep->values[i]};
                full.insert(full.end(), row.begin(), row.end());
                csv.write_row(full);
                ++result.rows;
            } else {
                csv.write_row(row);
                ++result.rows;
            }
        }
    }
    csv.close();

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    json meta;
    meta["version"] = kVersion;
    meta["config"] = resolved_config_json(cfg);
    meta["defaulted_fields"] = cfg.defaulted;
    meta["warnings"] = cfg.warnings;
    meta["wall_time_seconds"] = wall;
    meta["rows"] = result.rows;
    if (cfg.sweep) {
        json runs = json::array();
        for (std::size_t i = 0; i < outputs.size(); ++i)
            runs.push_back({{"value", cfg.sweep->values[i]}, {"result", outputs[i].extra}});
        meta["sweep_runs"] = runs;
    } else {
        meta["result"] = outputs[0].extra;
    }
    if (cfg.units.omega2_ghz > 0) {
        const UnitsReport u =
            physical_units_report(cfg.model, cfg.units.omega2_ghz, cfg.units.angular);
        meta["units"] = {{"angular", u.angular},
                         {"omega2_ghz", u.omega2_ghz},
                         {"j_mhz", u.j_mhz},
                         {"kappa_bar_mhz", u.kappa_bar_mhz},
                         {"delta_mhz", u.delta_mhz},
                         {"lambda0_mhz", u.lambda0_mhz},
                         {"temperature_kelvin", u.temperature_kelvin}};
    }
    std::ofstream mo(result.meta_path);
    if (!mo) throw IoError("cannot write metadata file " + result.meta_path);
    mo << meta.dump(2) << '\n';
    if (!mo) throw IoError("metadata write failed for " + result.meta_path);
    return result;
}

}  // namespace qmb
