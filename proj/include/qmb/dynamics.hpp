// Master-equation assembly and time evolution of the joint CQ-TQ state.
//
// Two dissipators are supported:
//   * LocalLindblad    - jump operators sigma_-^(2), sigma_+^(2) of the TQ
//                        with rates evaluated at omega2,
//   * NonlocalSecular  - joint-eigenbasis operators L1, L2 (and adjoints)
//                        with rates evaluated at the dressed gaps eps1, eps2.
//
// The time-independent part is prebuilt as a 16x16 superoperator acting on
// vec(rho); the drive commutator is applied per evaluation. At this
// dimension that is both the fastest and the simplest arrangement.
#pragma once

#include <string>
#include <vector>

#include "qmb/integrator.hpp"
#include "qmb/model.hpp"
#include "qmb/qops.hpp"

namespace qmb {

enum class MasterEquationKind { LocalLindblad, NonlocalSecular };

inline const char* to_string(MasterEquationKind k) {
    return k == MasterEquationKind::LocalLindblad ? "local" : "nonlocal";
}

/// Lindblad channel rate * (L rho L^dag - {L^dag L, rho}/2) as a superoperator.
inline SuperOp dissipator_superop(const Mat4& l, double rate) {
    const Mat4 ldl = l.adjoint() * l;
    SuperOp d = sandwich(l, l.adjoint());
    d -= 0.5 * left_mult(ldl);
    d -= 0.5 * right_mult(ldl);
    return rate * d;
}

/// -i[h, .] as a superoperator.
inline SuperOp commutator_superop(const Mat4& h) {
    const cx i(0.0, 1.0);
    return -i * (left_mult(h) - right_mult(h));
}

/// Local dissipator of the TQ, rates at omega2.
inline SuperOp local_dissipator(const ModelParams& p) {
    if (p.kappa_bar == 0) return SuperOp::Zero();
    const RatePair r = ohmic_rates(p.omega2, p);
    return dissipator_superop(on_tq(pauli(Pauli::Minus)), r.down) +
           dissipator_superop(on_tq(pauli(Pauli::Plus)), r.up);
}

/// Non-local secular dissipator over the channels {L1, L1^dag, L2, L2^dag}.
/// Valid only under the secular condition; callers may consult
/// secular_validity() first (propagation records the ratio but does not fail).
inline SuperOp nonlocal_dissipator(const ModelParams& p) {
    if (p.kappa_bar == 0) return SuperOp::Zero();
    const NonlocalOps ops = nonlocal_lindblad_ops(p);
    const EigenSystem es = eigensystem(p);
    const RatePair r1 = ohmic_rates(es.eps1, p);
    const RatePair r2 = ohmic_rates(es.eps2, p);
    return dissipator_superop(ops.l1, r1.down) +
           dissipator_superop(ops.l1.adjoint(), r1.up) +
           dissipator_superop(ops.l2, r2.down) +
           dissipator_superop(ops.l2.adjoint(), r2.up);
}

/// Time-independent generator: -i[H_S, .] + dissipator. The drive is not
/// included here; it enters through rhs()/propagate().
inline SuperOp liouvillian(const ModelParams& p, MasterEquationKind kind) {
    SuperOp l = commutator_superop(build_hs(p));
    l += kind == MasterEquationKind::LocalLindblad ? local_dissipator(p)
                                                   : nonlocal_dissipator(p);
    return l;
}

/// Full right-hand side drho/dt = -i[H_S + H_D(t), rho] + D[rho].
inline Mat4 rhs(const ModelParams& p, MasterEquationKind kind, double t, const Mat4& rho) {
    const SuperOp l = liouvillian(p, kind);
    Vec16 v = l * vec_state(rho);
    if (p.lambda0 != 0) {
        const Mat4 hd = build_hd(p, t);
        const cx i(0.0, 1.0);
        return unvec_state(v) - i * (hd * rho - rho * hd);
    }
    return unvec_state(v);
}

/// Product initial state rho1 (x) Gibbs(omega2, beta) with the TQ
/// thermalised at the bath temperature.
inline Mat4 initial_state(const Mat2& rho1, const ModelParams& p) {
    require_density(rho1, 1e-7, "initial_state");
    return kron(rho1, gibbs_qubit(p.omega2, p.beta));
}

struct TrajectoryMeta {
    ModelParams params;
    MasterEquationKind kind = MasterEquationKind::LocalLindblad;
    IntegratorSettings settings;   // with sample_dt resolved
    StepStats steps;
    // Worst deviations from the density-matrix invariants over all samples.
    double worst_hermiticity = 0.0;
    double worst_trace_dev = 0.0;
    double worst_min_eigenvalue = 0.0;
    double secular_ratio = 0.0;    // only meaningful for NonlocalSecular
};

struct Trajectory {
    std::vector<double> times;   // uniform grid, times[0] = 0
    std::vector<Mat4> states;
    TrajectoryMeta meta;
};

// Sampled states must stay physical: drift up to `report_tol` is recorded
// in the meta block, drift beyond `abort_tol` aborts the run. Nothing is
// ever clipped, since clipping would corrupt the volume analysis downstream.
inline constexpr double kInvariantReportTol = 1e-7;
inline constexpr double kInvariantAbortTol = 1e-5;

/// Integrate the selected master equation from rho0 over [0, t_end],
/// sampling every settings.sample_dt (default 0.01/kappa_bar).
inline Trajectory propagate(const ModelParams& p, MasterEquationKind kind, const Mat4& rho0,
                            double t_end, IntegratorSettings settings = {}) {
    p.validate();
    settings.validate();
    require_density(rho0, 1e-7, "propagate(rho0)");
    if (!(t_end > 0)) throw std::invalid_argument("propagate: t_end must be > 0");
    if (settings.sample_dt == 0)
        settings.sample_dt = p.kappa_bar > 0 ? 0.01 / p.kappa_bar : t_end / 1000.0;

    // Land the final sample exactly on the grid: t1 = n * dt with
    // t_end - dt < t1 <= t_end (up to roundoff).
    const double dt = settings.sample_dt;
    const long n = static_cast<long>(std::floor(t_end / dt * (1.0 + 1e-12)));
    const double t1 = n > 0 ? n * dt : t_end;

    Trajectory traj;
    traj.meta.params = p;
    traj.meta.kind = kind;
    traj.meta.settings = settings;
    if (kind == MasterEquationKind::NonlocalSecular && p.kappa_bar > 0)
        traj.meta.secular_ratio = secular_validity(p).ratio;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);

    const SuperOp l0 = liouvillian(p, kind);
    const bool driven = p.lambda0 != 0;
    const SuperOp kd = driven ? commutator_superop(on_cq(pauli(Pauli::X))) : SuperOp::Zero();

    const auto ode = [&](double t, const Vec16& v) -> Vec16 {
        Vec16 dv = l0 * v;
        if (driven) dv += (p.lambda0 * std::sin(p.omega_d * t)) * (kd * v);
        return dv;
    };

    const auto on_sample = [&](double t, const Vec16& v) {
        const Mat4 state = unvec_state(v);
        const DensityCheck c = check_density(state);
        traj.meta.worst_hermiticity = std::max(traj.meta.worst_hermiticity, c.hermiticity);
        traj.meta.worst_trace_dev = std::max(traj.meta.worst_trace_dev, c.trace_dev);
        traj.meta.worst_min_eigenvalue = std::min(traj.meta.worst_min_eigenvalue, c.min_eigenvalue);
        if (!c.ok(kInvariantAbortTol))
            throw std::runtime_error(
                "propagate: state invariants violated beyond " +
                std::to_string(kInvariantAbortTol) + " at t = " + std::to_string(t) +
                " (hermiticity " + std::to_string(c.hermiticity) + ", trace dev " +
                std::to_string(c.trace_dev) + ", min eig " +
                std::to_string(c.min_eigenvalue) + "); tighten tolerances");
        traj.times.push_back(t);
        traj.states.push_back(state);
    };

    traj.meta.steps =
        integrate_dopri5(ode, vec_state(rho0), 0.0, t1, settings, dt, on_sample);
    return traj;
}

/// Matrix-exponential reference solution for the undriven equation; rejects
/// configurations whose generator is time dependent.
inline Mat4 expm_reference(const ModelParams& p, MasterEquationKind kind, const Mat4& rho0,
                           double t) {
    if (p.lambda0 != 0)
        throw std::invalid_argument(
            "expm_reference: generator is time dependent (lambda0 != 0)");
    return expm_propagate(liouvillian(p, kind), rho0, t);
}

/// Reduced-CQ trace distance, used by the local-vs-nonlocal comparison.
inline double trace_distance_2x2(const Mat2& a, const Mat2& b) {
    const Mat2 d = 0.5 * ((a - b) + (a - b).adjoint());
    Eigen::SelfAdjointEigenSolver<Mat2> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qmb
