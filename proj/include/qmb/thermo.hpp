// Average-work thermodynamics of the driven CQ. Only the drive term of the
// Hamiltonian carries explicit time dependence, so the power operator is
//   P(t) = dH/dt = lambda0 omega_d cos(omega_d t) sigma_x^(1),
// and the average work is the running time integral of its expectation.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qmb/dynamics.hpp"

namespace qmb {

enum class DriveKind { BareOmega1, DressedEpsilon1 };

inline const char* to_string(DriveKind k) {
    return k == DriveKind::BareOmega1 ? "bare" : "dressed";
}

/// Driving frequency: the bare CQ frequency omega1, or the lower dressed
/// transition eps1 = sqrt(omega2^2 + J^2) - J of the resonant coupled pair.
inline double drive_frequency(const ModelParams& p, DriveKind kind) {
    p.validate();
    if (kind == DriveKind::BareOmega1) return p.omega1;
    return std::sqrt(p.omega2 * p.omega2 + p.J * p.J) - p.J;
}

/// <P(t)> = lambda0 omega_d cos(omega_d t) tr(rho sigma_x^(1)).
inline double power_expectation(const ModelParams& p, const Mat4& rho, double t) {
    if (p.lambda0 == 0) return 0.0;
    const double sx = (on_cq(pauli(Pauli::X)) * rho).trace().real();
    return p.lambda0 * p.omega_d * std::cos(p.omega_d * t) * sx;
}

struct WorkSeries {
    std::vector<double> times;
    std::vector<double> power;  // <P(t)>
    std::vector<double> work;   // <W(t)>, work[0] = 0
    DriveKind drive_kind = DriveKind::DressedEpsilon1;
    Trajectory trajectory;      // underlying propagation, kept for analysis
};

// Cumulative integral of uniformly sampled data by local parabolic
// (Simpson-type) rule: each increment integrates the quadratic through the
// three nearest samples, so the result telescopes consistently.
inline std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
    std::vector<double> w(f.size(), 0.0);
    if (f.size() < 2) return w;
    if (f.size() == 2) {
        w[1] = 0.5 * h * (f[0] + f[1]);
        return w;
    }
    w[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (std::size_t k = 1; k + 1 < f.size(); ++k)
        w[k + 1] = w[k] + h / 12.0 * (-f[k - 1] + 8.0 * f[k] + 5.0 * f[k + 1]);
    return w;
}

/// Propagate the driven master equation and accumulate the average work by
/// quadrature on the sample grid. The drive frequency is fixed by `kind`;
/// the sample spacing additionally resolves the drive period (64 samples
/// per period unless the caller asks for finer).
inline WorkSeries average_work(ModelParams p, MasterEquationKind me_kind, const Mat4& rho0,
                               double t_end, DriveKind kind, IntegratorSettings s = {}) {
    p.omega_d = drive_frequency(p, kind);
    p.validate();
    const double period = 2.0 * M_PI / p.omega_d;
    double dt = s.sample_dt;
    if (dt == 0) dt = p.kappa_bar > 0 ? 0.01 / p.kappa_bar : period / 64.0;
    s.sample_dt = std::min(dt, period / 64.0);

    WorkSeries ws;
    ws.drive_kind = kind;
    ws.trajectory = propagate(p, me_kind, rho0, t_end, s);
    ws.times = ws.trajectory.times;
    ws.power.reserve(ws.times.size());
    for (std::size_t k = 0; k < ws.times.size(); ++k)
        ws.power.push_back(power_expectation(p, ws.trajectory.states[k], ws.times[k]));
    ws.work = cumulative_simpson(ws.power, s.sample_dt);
    return ws;
}

/// Ratio of the peak-to-trough swing of <W> during the last recorded drive
/// period to the swing during the first full period. Values near zero mean
/// the oscillations have been suppressed. The drive period is read off the
/// trajectory metadata.
inline double oscillation_suppression_index(const WorkSeries& ws) {
    if (ws.times.size() < 2) throw std::invalid_argument("suppression index: empty series");
    const double omega_d = ws.trajectory.meta.params.omega_d;
    if (!(omega_d > 0)) throw std::invalid_argument("suppression index: no drive frequency");
    const double period = 2.0 * M_PI / omega_d;
    const double t_end = ws.times.back();
    if (t_end < 5.0 * period)
        throw std::invalid_argument(
            "suppression index: series must span at least 5 drive periods");

    const auto swing = [&](double lo, double hi) {
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (std::size_t k = 0; k < ws.times.size(); ++k) {
            if (ws.times[k] < lo || ws.times[k] > hi) continue;
            mn = std::min(mn, ws.work[k]);
            mx = std::max(mx, ws.work[k]);
        }
        return mx - mn;
    };
    const double first = swing(0.0, period);
    const double last = swing(t_end - period, t_end);
    if (first <= 0)
        throw std::invalid_argument("suppression index: flat first period");
    return last / first;
}

}  // namespace qmb
