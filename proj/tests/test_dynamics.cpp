#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qmb/qmb.hpp"

using namespace qmb;
using Catch::Approx;

namespace {

ModelParams base_params() {
    ModelParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.J = 0.05;
    p.kappa_bar = 0.01;
    p.beta = 0.35;
    return p;
}

ModelParams random_weak(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.omega2 = 0.8 + 0.4 * u(g);
    p.omega1 = p.omega2 + 0.2 * (u(g) - 0.5);
    p.J = 0.1 * p.omega2 * u(g);
    p.kappa_bar = (0.01 + 0.04 * u(g)) * p.omega2;
    p.beta = 0.2 + 2.8 * u(g);
    return p;
}

}  // namespace

TEST_CASE("dissipators annihilate the trace of arbitrary Hermitian inputs") {
    auto g = test::rng(31);
    const ModelParams p = base_params();
    const SuperOp dloc = local_dissipator(p);
    const SuperOp dnon = nonlocal_dissipator(p);
    for (int rep = 0; rep < 25; ++rep) {
        const Mat4 h = test::random_hermitian(g, 4);
        CHECK(std::abs(unvec_state(dloc * vec_state(h)).trace()) < 1e-12);
        CHECK(std::abs(unvec_state(dnon * vec_state(h)).trace()) < 1e-12);
    }
}

TEST_CASE("local dissipator fixes (anything) x Gibbs") {
    auto g = test::rng(32);
    const ModelParams p = base_params();
    const SuperOp d = local_dissipator(p);
    for (int rep = 0; rep < 10; ++rep) {
        const Mat4 rho = kron(test::random_density(g, 2), gibbs_qubit(p.omega2, p.beta));
        CHECK(unvec_state(d * vec_state(rho)).cwiseAbs().maxCoeff() < 1e-12);
    }

    // at zero temperature the TQ relaxes toward its ground state
    ModelParams cold = base_params();
    cold.beta = 50.0;
    const SuperOp dc = local_dissipator(cold);
    const Mat4 mixed = 0.25 * Mat4::Identity();
    const Mat4 drho = unvec_state(dc * vec_state(mixed));
    CHECK((drho * on_tq(pauli(Pauli::Z))).trace().real() < -1e-4);
}

TEST_CASE("nonlocal dissipator fixes the joint Gibbs state") {
    auto g = test::rng(33);
    for (int rep = 0; rep < 10; ++rep) {
        const ModelParams p = random_weak(g);
        const SuperOp d = nonlocal_dissipator(p);
        const Mat4 gibbs = gibbs_joint(p);
        CHECK(unvec_state(d * vec_state(gibbs)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("rhs assembles commutator and dissipator") {
    auto g = test::rng(34);
    const ModelParams p = base_params();

    // Gibbs stationarity under the nonlocal equation (undriven)
    const Mat4 gibbs = gibbs_joint(p);
    CHECK(rhs(p, MasterEquationKind::NonlocalSecular, 0.0, gibbs).cwiseAbs().maxCoeff() <
          1e-12);

    // trace preservation, driven included
    ModelParams drv = p;
    drv.lambda0 = 0.01;
    drv.omega_d = 0.9;
    for (int rep = 0; rep < 10; ++rep) {
        const Mat4 rho = test::random_density(g, 4);
        CHECK(std::abs(rhs(drv, MasterEquationKind::LocalLindblad, 0.7, rho).trace()) < 1e-12);
    }

    // kappa_bar = 0: pure commutator evolution
    ModelParams unit = drv;
    unit.kappa_bar = 0.0;
    const Mat4 rho = test::random_density(g, 4);
    const double t = 1.3;
    const Mat4 h = build_hs(unit) + build_hd(unit, t);
    const cx i(0.0, 1.0);
    const Mat4 expected = -i * (h * rho - rho * h);
    CHECK((rhs(unit, MasterEquationKind::LocalLindblad, t, rho) - expected)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("propagate matches the matrix-exponential oracle") {
    auto g = test::rng(35);
    for (int rep = 0; rep < 6; ++rep) {
        const ModelParams p = random_weak(g);
        const Mat4 rho0 = initial_state(test::random_density(g, 2), p);
        for (MasterEquationKind kind :
             {MasterEquationKind::LocalLindblad, MasterEquationKind::NonlocalSecular}) {
            IntegratorSettings s;
            s.sample_dt = 0.1 / p.kappa_bar;
            const Trajectory traj = propagate(p, kind, rho0, 1.0 / p.kappa_bar, s);
            const SuperOp l = liouvillian(p, kind);
            for (std::size_t k : {std::size_t(1), traj.times.size() / 2, traj.times.size() - 1}) {
                const Mat4 ref = expm_propagate(l, rho0, traj.times[k]);
                CHECK((traj.states[k] - ref).cwiseAbs().maxCoeff() < 1e-8);
            }
        }
    }
}

TEST_CASE("propagate: unitary limit conserves purity") {
    ModelParams p = base_params();
    p.kappa_bar = 0.0;
    p.J = 0.08;
    const Mat4 rho0 = kron(state_of(Vec3(0.3, -0.2, 0.6)), state_of(Vec3(0.1, 0.5, -0.4)));
    IntegratorSettings s;
    s.sample_dt = 0.5;
    const Trajectory traj = propagate(p, MasterEquationKind::LocalLindblad, rho0, 50.0, s);
    const double purity0 = (rho0 * rho0).trace().real();
    for (const auto& st : traj.states)
        CHECK((st * st).trace().real() == Approx(purity0).margin(1e-9));
}

TEST_CASE("propagate reaches stationarity and respects invariants") {
    ModelParams p = base_params();
    p.J = p.kappa_bar;  // J/kappa_bar = 1, resonant
    const Mat4 rho0 = initial_state(state_of(Vec3::UnitX()), p);
    const Trajectory traj =
        propagate(p, MasterEquationKind::LocalLindblad, rho0, 30.0 / p.kappa_bar);
    CHECK(traj.meta.worst_trace_dev < 1e-9);
    CHECK(traj.meta.worst_hermiticity < 1e-9);
    CHECK(traj.meta.worst_min_eigenvalue > -1e-9);
    CHECK(traj.times.front() == 0.0);

    // long-time fixed point: residual of the generator applied to the tail
    const Mat4 tail = traj.states.back();
    CHECK(rhs(p, MasterEquationKind::LocalLindblad, 0.0, tail).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("integrator convergence under tolerance halving") {
    ModelParams p = base_params();
    p.J = 0.1;
    const Mat4 rho0 = initial_state(state_of(Vec3::UnitZ()), p);
    IntegratorSettings coarse;
    coarse.rel_tol = 1e-8;
    coarse.abs_tol = 1e-10;
    coarse.sample_dt = 1.0;
    IntegratorSettings fine = coarse;
    fine.rel_tol = 5e-9;
    const Trajectory a = propagate(p, MasterEquationKind::LocalLindblad, rho0, 200.0, coarse);
    const Trajectory b = propagate(p, MasterEquationKind::LocalLindblad, rho0, 200.0, fine);
    const double obs_a = (a.states.back() * on_cq(pauli(Pauli::Z))).trace().real();
    const double obs_b = (b.states.back() * on_cq(pauli(Pauli::Z))).trace().real();
    CHECK(obs_a == Approx(obs_b).margin(1e-7));
}

TEST_CASE("initial state is CQ (x) thermal TQ") {
    ModelParams p = base_params();
    const Mat2 rho1 = state_of(Vec3(0.2, 0.1, -0.3));

    const Mat4 joint = initial_state(rho1, p);
    CHECK((partial_trace_over_tq(joint) - rho1).cwiseAbs().maxCoeff() < 1e-14);
    const double z = std::exp(-0.175) + std::exp(0.175);
    CHECK(joint(0, 0).real() == Approx(rho1(0, 0).real() * std::exp(-0.175) / z).epsilon(1e-12));

    ModelParams cold = p;
    cold.beta = 1e4;
    const Mat4 jcold = initial_state(rho1, cold);
    // TQ factor collapses to |g><g|
    CHECK(jcold(0, 0).real() == Approx(0.0).margin(1e-12));
    CHECK(jcold(1, 1).real() == Approx(rho1(0, 0).real()).epsilon(1e-9));

    ModelParams hot = p;
    hot.beta = 1e-9;
    const Mat4 jhot = initial_state(rho1, hot);
    CHECK(jhot(0, 0).real() == Approx(0.5 * rho1(0, 0).real()).epsilon(1e-6));
}

TEST_CASE("propagate rejects invalid input") {
    const ModelParams p = base_params();
    const Mat4 rho0 = initial_state(state_of(Vec3::UnitX()), p);
    CHECK_THROWS_AS(propagate(p, MasterEquationKind::LocalLindblad, rho0, -1.0),
                    std::invalid_argument);
    Mat4 bad = rho0;
    bad(0, 0) += 0.5;
    CHECK_THROWS_AS(propagate(p, MasterEquationKind::LocalLindblad, bad, 1.0),
                    std::invalid_argument);
    IntegratorSettings s;
    s.rel_tol = -1;
    CHECK_THROWS_AS(propagate(p, MasterEquationKind::LocalLindblad, rho0, 1.0, s),
                    std::invalid_argument);

    ModelParams driven = p;
    driven.lambda0 = 0.01;
    driven.omega_d = 1.0;
    CHECK_THROWS_AS(expm_reference(driven, MasterEquationKind::LocalLindblad, rho0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("stationary state agrees with the Liouvillian null space") {
    const ModelParams p = base_params();
    const SuperOp l = liouvillian(p, MasterEquationKind::LocalLindblad);

    // null vector by eigendecomposition
    Eigen::ComplexEigenSolver<SuperOp> es(l);
    int k0 = 0;
    double best = 1e300;
    for (int k = 0; k < 16; ++k) {
        if (std::abs(es.eigenvalues()(k)) < best) {
            best = std::abs(es.eigenvalues()(k));
            k0 = k;
        }
    }
    CHECK(best < 1e-12);
    Mat4 ss = unvec_state(es.eigenvectors().col(k0));
    ss /= ss.trace();

    const Mat4 rho0 = initial_state(state_of(Vec3::UnitX()), p);
    const Mat4 late = expm_propagate(l, rho0, 5000.0);
    CHECK(std::abs(late.trace() - cx(1.0)) < 1e-10);
    CHECK((late - ss).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("local and nonlocal propagations stay close at small J") {
    ModelParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.kappa_bar = 0.001;
    p.J = 0.01;
    p.beta = 0.35;
    const Mat4 rho0 = initial_state(gibbs_qubit(p.omega1, p.beta), p);
    IntegratorSettings s;
    s.sample_dt = 0.2 / p.kappa_bar;
    const double t_end = 2.0 / p.kappa_bar;
    const Trajectory a = propagate(p, MasterEquationKind::LocalLindblad, rho0, t_end, s);
    const Trajectory b = propagate(p, MasterEquationKind::NonlocalSecular, rho0, t_end, s);
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        const double d = trace_distance_2x2(partial_trace_over_tq(a.states[k]),
                                            partial_trace_over_tq(b.states[k]));
        CHECK(d < 5e-3);
    }
}
