// Dense complex linear algebra and qubit-state utilities shared by the
// whole simulator: Pauli/ladder operators, Kronecker products, partial
// trace, Bloch-vector maps, density-matrix validity checks and an exact
// matrix-exponential propagator used to cross-check the ODE integrator.
//
// Conventions (fixed project-wide):
//   * single-qubit basis {|e>, |g>} with sigma_z|e> = +|e>,
//   * joint basis |ee>, |eg>, |ge>, |gg> (qubit 1 is the left/major factor),
//   * column-major vectorization vec(rho) for superoperators, so that
//     vec(A rho B) = (B^T kron A) vec(rho).
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <stdexcept>
#include <string>

namespace qmb {

using cx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4cd;
using MatX = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;
using Vec16 = Eigen::Matrix<cx, 16, 1>;
using SuperOp = Eigen::Matrix<cx, 16, 16>;

inline constexpr double kDefaultTol = 1e-9;

enum class Pauli { X, Y, Z, Plus, Minus, Id };

/// 2x2 Pauli / ladder / identity matrix in the {|e>, |g>} basis.
inline Mat2 pauli(Pauli which) {
    const cx i(0.0, 1.0);
    Mat2 m = Mat2::Zero();
    switch (which) {
        case Pauli::X: m << 0, 1, 1, 0; break;
        case Pauli::Y: m << 0, -i, i, 0; break;
        case Pauli::Z: m << 1, 0, 0, -1; break;
        case Pauli::Plus: m(0, 1) = 1; break;   // |e><g|
        case Pauli::Minus: m(1, 0) = 1; break;  // |g><e|
        case Pauli::Id: m = Mat2::Identity(); break;
    }
    return m;
}

/// Kronecker product with `a` as the left (qubit-1) factor.
inline MatX kron(const MatX& a, const MatX& b) {
    const auto na = a.rows();
    const auto nb = b.rows();
    MatX out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    return out;
}

/// Embed a single-qubit operator on the CQ (qubit 1).
inline Mat4 on_cq(const Mat2& op) { return kron(op, Mat2::Identity()); }

/// Embed a single-qubit operator on the TQ (qubit 2).
inline Mat4 on_tq(const Mat2& op) { return kron(Mat2::Identity(), op); }

/// Reduced CQ state: rho1 = tr_2 rho.
inline Mat2 partial_trace_over_tq(const Mat4& rho) {
    Mat2 r = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
    return r;
}

/// Bloch vector r_i = tr(rho sigma_i).
inline Vec3 bloch_of(const Mat2& rho) {
    Vec3 r;
    r.x() = 2.0 * rho(1, 0).real();
    r.y() = 2.0 * rho(1, 0).imag();
    r.z() = (rho(0, 0) - rho(1, 1)).real();
    return r;
}

/// Inverse of bloch_of: rho = (I + r.sigma)/2.
inline Mat2 state_of(const Vec3& r) {
    Mat2 rho;
    rho(0, 0) = 0.5 * (1.0 + r.z());
    rho(1, 1) = 0.5 * (1.0 - r.z());
    rho(0, 1) = 0.5 * cx(r.x(), -r.y());
    rho(1, 0) = 0.5 * cx(r.x(), r.y());
    return rho;
}

/// Worst-case deviations of a candidate density matrix from Hermiticity,
/// unit trace and positive semidefiniteness. Positivity is probed through
/// the eigenvalues of the Hermitian part, which tolerates the tiny negative
/// excursions produced by adaptive integration.
struct DensityCheck {
    double hermiticity = 0.0;  // max |M - M^dag| entrywise
    double trace_dev = 0.0;    // |tr M - 1|
    double min_eigenvalue = 0.0;

    bool ok(double tol = kDefaultTol) const {
        return hermiticity <= tol && trace_dev <= tol && min_eigenvalue >= -tol;
    }
};

inline DensityCheck check_density(const MatX& m) {
    DensityCheck c;
    c.hermiticity = (m - m.adjoint()).cwiseAbs().maxCoeff();
    c.trace_dev = std::abs(m.trace() - cx(1.0));
    const MatX herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<MatX> es(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

inline void require_density(const MatX& m, double tol, const std::string& where) {
    const DensityCheck c = check_density(m);
    if (!c.ok(tol)) {
        throw std::invalid_argument(where + ": not a density matrix within tolerance " +
                                    std::to_string(tol) + " (hermiticity " +
                                    std::to_string(c.hermiticity) + ", trace dev " +
                                    std::to_string(c.trace_dev) + ", min eigenvalue " +
                                    std::to_string(c.min_eigenvalue) + ")");
    }
}

// Column-major vectorization of a 4x4 state.
inline Vec16 vec_state(const Mat4& rho) {
    Vec16 v;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) v(4 * j + i) = rho(i, j);
    return v;
}

inline Mat4 unvec_state(const Vec16& v) {
    Mat4 rho;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) rho(i, j) = v(4 * j + i);
    return rho;
}

// vec(A rho) = (I kron A) vec(rho)
inline SuperOp left_mult(const Mat4& a) {
    return kron(Mat4::Identity(), a);
}

// vec(rho B) = (B^T kron I) vec(rho)
inline SuperOp right_mult(const Mat4& b) {
    return kron(b.transpose(), Mat4::Identity());
}

// vec(A rho B) = (B^T kron A) vec(rho)
inline SuperOp sandwich(const Mat4& a, const Mat4& b) {
    return kron(b.transpose(), a);
}

/// Exact propagation rho(t) = unvec(exp(L t) vec(rho0)) for a
/// time-independent generator. Validation oracle only; the production
/// path is the adaptive integrator in dynamics.hpp.
inline Mat4 expm_propagate(const SuperOp& liouvillian, const Mat4& rho0, double t) {
    const SuperOp prop = (liouvillian * t).exp();
    return unvec_state(prop * vec_state(rho0));
}

}  // namespace qmb
