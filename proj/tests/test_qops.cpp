#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qmb/qmb.hpp"

using namespace qmb;
using Catch::Approx;

namespace {
const cx I(0.0, 1.0);
}

TEST_CASE("pauli matrices in the {e, g} basis") {
    const Mat2 z = pauli(Pauli::Z);
    CHECK(z(0, 0) == cx(1.0));
    CHECK(z(1, 1) == cx(-1.0));
    CHECK(z(0, 1) == cx(0.0));

    // sigma_+ maps |g> to |e>: single 1 in the (e, g) slot.
    const Mat2 plus = pauli(Pauli::Plus);
    CHECK(plus(0, 1) == cx(1.0));
    CHECK(plus.cwiseAbs().sum() == Approx(1.0));

    const Mat2 comm = pauli(Pauli::X) * pauli(Pauli::Y) - pauli(Pauli::Y) * pauli(Pauli::X);
    CHECK((comm - 2.0 * I * pauli(Pauli::Z)).cwiseAbs().maxCoeff() < 1e-15);

    // ladder operators recombine into sigma_x, sigma_y
    const Mat2 x = pauli(Pauli::Plus) + pauli(Pauli::Minus);
    CHECK((x - pauli(Pauli::X)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kron embeds qubit 1 as the left factor") {
    CHECK((kron(Mat2::Identity(), Mat2::Identity()) - Mat4::Identity())
              .cwiseAbs()
              .maxCoeff() == 0.0);

    const MatX zi = kron(pauli(Pauli::Z), Mat2::Identity());
    const Eigen::Vector4d expect(1, 1, -1, -1);
    for (int k = 0; k < 4; ++k) CHECK(zi(k, k).real() == Approx(expect(k)));

    auto g = test::rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const MatX a = test::random_matrix(g, 2);
        const MatX b = test::random_matrix(g, 2);
        CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    }
}

TEST_CASE("partial trace over the TQ") {
    auto g = test::rng(12);

    // product state factorises exactly
    const Mat2 r1 = test::random_density(g, 2);
    const Mat2 r2 = test::random_density(g, 2);
    const Mat2 red = partial_trace_over_tq(kron(r1, r2));
    CHECK((red - r1).cwiseAbs().maxCoeff() < 1e-14);

    // Bell state reduces to the maximally mixed state
    Eigen::Vector4cd bell = Eigen::Vector4cd::Zero();
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const Mat4 rho_bell = bell * bell.adjoint();
    CHECK((partial_trace_over_tq(rho_bell) - 0.5 * Mat2::Identity()).cwiseAbs().maxCoeff() <
          1e-14);

    // trace and Hermiticity preserved on random states
    for (int rep = 0; rep < 20; ++rep) {
        const Mat4 rho = test::random_density(g, 4);
        const Mat2 r = partial_trace_over_tq(rho);
        CHECK(std::abs(r.trace() - cx(1.0)) < 1e-12);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }

    // CQ observables commute with tracing out the TQ
    for (int rep = 0; rep < 20; ++rep) {
        const Mat4 rho = test::random_density(g, 4);
        const Mat2 r = partial_trace_over_tq(rho);
        for (Pauli s : {Pauli::X, Pauli::Y, Pauli::Z}) {
            const cx via_joint = (on_cq(pauli(s)) * rho).trace();
            const cx via_reduced = (pauli(s) * r).trace();
            CHECK(std::abs(via_joint - via_reduced) < 1e-12);
        }
    }
}

TEST_CASE("bloch vector round trips") {
    CHECK(bloch_of(0.5 * Mat2::Identity()).norm() == Approx(0.0).margin(1e-15));

    Mat2 excited = Mat2::Zero();
    excited(0, 0) = 1.0;
    CHECK((bloch_of(excited) - Vec3(0, 0, 1)).norm() < 1e-15);

    // thermal state at beta*omega = 0.35 sits at -tanh(0.175) on the z axis
    const Mat2 th = gibbs_qubit(1.0, 0.35);
    const Vec3 r = bloch_of(th);
    CHECK(r.x() == Approx(0.0).margin(1e-15));
    CHECK(r.y() == Approx(0.0).margin(1e-15));
    CHECK(r.z() == Approx(-std::tanh(0.175)).epsilon(1e-12));
    CHECK(r.z() == Approx(-0.173235).margin(5e-7));

    auto g = test::rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const Vec3 v = test::random_bloch(g);
        CHECK((bloch_of(state_of(v)) - v).norm() < 1e-12);
    }
    for (int rep = 0; rep < 20; ++rep) {
        const Mat2 rho = test::random_density(g, 2);
        CHECK((state_of(bloch_of(rho)) - rho).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(bloch_of(rho).norm() <= 1.0 + 1e-12);
    }
}

TEST_CASE("density checks flag violations") {
    auto g = test::rng(14);
    const Mat4 rho = test::random_density(g, 4);
    CHECK(check_density(rho).ok(1e-12));

    Mat4 bad = rho;
    bad(0, 0) += 0.1;  // breaks the trace
    CHECK_FALSE(check_density(bad).ok(1e-3));

    Mat4 nonpos = Mat4::Zero();
    nonpos(0, 0) = 1.2;
    nonpos(1, 1) = -0.2;
    const DensityCheck c = check_density(nonpos);
    CHECK(c.trace_dev < 1e-15);
    CHECK(c.min_eigenvalue == Approx(-0.2));
}

TEST_CASE("expm propagator: trivial generators") {
    auto g = test::rng(15);
    const Mat4 rho0 = test::random_density(g, 4);

    // L = 0 is the identity channel
    CHECK((expm_propagate(SuperOp::Zero(), rho0, 3.7) - rho0).cwiseAbs().maxCoeff() < 1e-14);

    // a full Larmor period returns the state: H = (omega/2) sigma_z x I
    const double omega = 0.83;
    const Mat4 h = 0.5 * omega * on_cq(pauli(Pauli::Z));
    const SuperOp l = commutator_superop(h);
    const Mat2 plus_state = state_of(Vec3::UnitX());  // |+><+|
    const Mat4 rho_plus = kron(plus_state, 0.5 * Mat2::Identity());
    CHECK((expm_propagate(l, rho_plus, 2.0 * M_PI / omega) - rho_plus).cwiseAbs().maxCoeff() <
          1e-12);
    // while a half period flips the x component
    const Mat4 half = expm_propagate(l, rho_plus, M_PI / omega);
    const Vec3 r_half = bloch_of(partial_trace_over_tq(half));
    CHECK(r_half.x() == Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("vectorization conventions") {
    auto g = test::rng(16);
    const Mat4 a = test::random_matrix(g, 4);
    const Mat4 b = test::random_matrix(g, 4);
    const Mat4 rho = test::random_density(g, 4);

    CHECK((unvec_state(vec_state(rho)) - rho).cwiseAbs().maxCoeff() == 0.0);
    const Mat4 lhs = unvec_state(sandwich(a, b) * vec_state(rho));
    CHECK((lhs - a * rho * b).cwiseAbs().maxCoeff() < 1e-12);
    const Mat4 lm = unvec_state(left_mult(a) * vec_state(rho));
    CHECK((lm - a * rho).cwiseAbs().maxCoeff() < 1e-12);
    const Mat4 rm = unvec_state(right_mult(b) * vec_state(rho));
    CHECK((rm - rho * b).cwiseAbs().maxCoeff() < 1e-12);
}
