// Embedded Dormand-Prince 5(4) integrator with dense output, specialised
// for the small fixed-size complex systems this project integrates. The
// classic fourth-order continuous extension is used to emit samples on a
// uniform grid independently of the adaptive step sequence, so halving the
// tolerances never changes which times are reported.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmb {

struct IntegratorSettings {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;    // 0 = unlimited
    double sample_dt = 0.0;   // 0 = pick a task-appropriate default

    void validate() const {
        if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be > 0");
        if (!(abs_tol > 0)) throw std::invalid_argument("abs_tol must be > 0");
        if (max_step < 0) throw std::invalid_argument("max_step must be >= 0");
        if (sample_dt < 0) throw std::invalid_argument("sample_dt must be >= 0");
    }
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
};

namespace detail {

// Dormand-Prince coefficients (RK5(4)7M) plus the dense-output weights of
// the standard quartic interpolant.
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

}  // namespace detail

/// Integrate dy/dt = rhs(t, y) from t0 to t1, invoking `on_sample(t, y)` at
/// every grid time t = t0 + k*sample_dt that falls inside [t0, t1]
/// (including both endpoints; t1 itself is always emitted last when it is
/// not a grid point). State must be a fixed-size Eigen vector of
/// std::complex<double>.
template <class State, class Rhs, class Sampler>
StepStats integrate_dopri5(Rhs&& rhs, State y, double t0, double t1,
                           const IntegratorSettings& s, double sample_dt,
                           Sampler&& on_sample) {
    using namespace detail;
    s.validate();
    if (!(sample_dt > 0)) throw std::invalid_argument("sample_dt must be > 0");
    if (!(t1 > t0)) throw std::invalid_argument("t1 must exceed t0");

    StepStats stats;
    State k1 = rhs(t0, y), k2, k3, k4, k5, k6, k7, ynew, yerr;

    // Hairer-style starting step guess.
    const auto scaled_norm = [&](const State& v, const State& ref) {
        return std::sqrt((v.array().abs() /
                          (s.abs_tol + s.rel_tol * ref.array().abs()))
                             .square()
                             .mean());
    };
    double h;
    {
        const double d0 = scaled_norm(y, y);
        const double d1n = scaled_norm(k1, y);
        double h0 = (d0 > 1e-5 && d1n > 1e-5) ? 0.01 * d0 / d1n : 1e-6;
        h0 = std::min(h0, t1 - t0);
        State y1 = y + h0 * k1;
        State f1 = rhs(t0 + h0, y1);
        const double d2 = scaled_norm(State(f1 - k1), y) / h0;
        const double dmax = std::max(d1n, d2);
        double h1 = dmax > 1e-15 ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6, h0 * 1e3);
        h = std::min({100.0 * h0, h1, t1 - t0});
    }
    if (s.max_step > 0) h = std::min(h, s.max_step);

    double t = t0;
    long next_sample = 0;
    const auto sample_time = [&](long k) { return t0 + k * sample_dt; };
    // Initial sample.
    on_sample(t0, y);
    ++next_sample;

    const double safety = 0.9, min_scale = 0.2, max_scale = 5.0;
    bool last_rejected = false;

    while (t < t1) {
        if (t1 - t <= 1e-12 * std::max(1.0, std::abs(t1))) break;  // arrived up to roundoff
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error(
                "integrate_dopri5: step size underflow at t = " + std::to_string(t) +
                " (h = " + std::to_string(h) + "); the problem appears too stiff "
                "for the requested tolerances");
        h = std::min(h, t1 - t);

        k2 = rhs(t + c2 * h, State(y + h * (a21 * k1)));
        k3 = rhs(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
        k4 = rhs(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        k5 = rhs(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        k6 = rhs(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = rhs(t + h, ynew);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double err =
            std::sqrt((yerr.array().abs() /
                       (s.abs_tol + s.rel_tol * y.array().abs().max(ynew.array().abs())))
                          .square()
                          .mean());

        if (err <= 1.0) {
            // Dense output over [t, t+h] for all pending grid times.
            const State ydiff = ynew - y;
            const State bspl = h * k1 - ydiff;
            const State r4 = ydiff - h * k7 - bspl;
            const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            while (sample_time(next_sample) <= t + h + 1e-12 * std::abs(t + h) &&
                   sample_time(next_sample) <= t1) {
                const double ts = sample_time(next_sample);
                const double th = (ts - t) / h;
                const State ys =
                    y + th * (ydiff + (1.0 - th) * (bspl + th * (r4 + (1.0 - th) * r5)));
                on_sample(ts, ys);
                ++next_sample;
            }
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            ++stats.accepted;
            double scale = err > 1e-30 ? safety * std::pow(err, -0.2) : max_scale;
            if (last_rejected) scale = std::min(scale, 1.0);
            h *= std::clamp(scale, min_scale, max_scale);
            if (s.max_step > 0) h = std::min(h, s.max_step);
            last_rejected = false;
        } else {
            ++stats.rejected;
            h *= std::clamp(safety * std::pow(err, -0.2), min_scale, 1.0);
            last_rejected = true;
        }
    }
    // Endpoint, when the grid does not land on it.
    if (sample_time(next_sample - 1) < t1 - 1e-12 * std::max(1.0, std::abs(t1)))
        on_sample(t1, y);
    return stats;
}

}  // namespace qmb
