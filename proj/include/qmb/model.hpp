// Physical model of the simulator: a driven "cold" qubit (CQ) coupled with
// strength J to a "thermal" qubit (TQ) that dissipates into an Ohmic bath.
//
//   H_S = (omega1/2) sigma_z^(1) + (omega2/2) sigma_z^(2)
//         + J sigma_x^(1) sigma_x^(2)
//   H_D(t) = lambda0 sin(omega_d t) sigma_x^(1)
//
// Natural units hbar = k_B = 1 throughout. kappa_bar = kappa * omega2 is the
// zero-temperature decay rate of the TQ; the dimensionless bath coupling is
// recovered as kappa = kappa_bar / omega2 and never stored separately.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/qops.hpp"

namespace qmb {

struct ModelParams {
    double omega1 = 1.0;     // CQ transition frequency
    double omega2 = 1.0;     // TQ transition frequency
    double J = 0.0;          // qubit-qubit coupling
    double kappa_bar = 0.0;  // TQ-bath rate, kappa_bar = kappa * omega2
    double beta = 1.0;       // inverse bath temperature
    double lambda0 = 0.0;    // drive amplitude
    double omega_d = 0.0;    // drive frequency

    double detuning() const { return omega1 - omega2; }        // Delta
    double omega_sum() const { return omega1 + omega2; }       // Omega
    double kappa() const { return kappa_bar / omega2; }

    // kappa_bar = 0 switches dissipation off; used by unitary-limit checks.
    void validate() const {
        if (!(omega1 > 0)) throw std::invalid_argument("omega1 must be > 0");
        if (!(omega2 > 0)) throw std::invalid_argument("omega2 must be > 0");
        if (!(kappa_bar >= 0)) throw std::invalid_argument("kappa_bar must be >= 0");
        if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
        if (!(J >= 0)) throw std::invalid_argument("J must be >= 0");
        if (!(lambda0 >= 0)) throw std::invalid_argument("lambda0 must be >= 0");
        if (lambda0 > 0 && !(omega_d > 0))
            throw std::invalid_argument("omega_d must be > 0 when lambda0 > 0");
    }

    // Born-Markov validity is a modelling assumption, not a hard invariant.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (kappa_bar / omega2 > 0.1)
            w.push_back("kappa_bar/omega2 = " + std::to_string(kappa_bar / omega2) +
                        " exceeds 0.1; weak-coupling master equation may be inaccurate");
        if (lambda0 > 0.05 * omega2)
            w.push_back("lambda0/omega2 = " + std::to_string(lambda0 / omega2) +
                        " exceeds 0.05; outside the tested weak-driving envelope");
        return w;
    }
};

/// H_S in the |ee>,|eg>,|ge>,|gg> basis. Hermitian and traceless.
inline Mat4 build_hs(const ModelParams& p) {
    Mat4 h = 0.5 * p.omega1 * on_cq(pauli(Pauli::Z)) + 0.5 * p.omega2 * on_tq(pauli(Pauli::Z));
    h += p.J * kron(pauli(Pauli::X), pauli(Pauli::X));
    return h;
}

/// H_D(t) = lambda0 sin(omega_d t) sigma_x^(1).
inline Mat4 build_hd(const ModelParams& p, double t) {
    return (p.lambda0 * std::sin(p.omega_d * t)) * on_cq(pauli(Pauli::X));
}

// Closed-form eigensystem of H_S. The spectrum splits into the
// {|ee>,|gg>} block (energies +-E4) and the {|eg>,|ge>} block (+-E3):
//
//   |E4> = alpha|ee> + xi|gg>     E4 = sqrt(4J^2 + Omega^2)/2
//   |E3> = eta|eg> - delta|ge>    E3 = sqrt(4J^2 + Delta^2)/2
//   |E2> = eta|ge> + delta|eg>    E2 = -E3
//   |E1> = alpha|gg> - xi|ee>     E1 = -E4
//
// Phases are fixed by alpha, eta >= 0 (automatic for positive frequencies;
// delta <= 0 follows from its -2J numerator). The non-degenerate gaps are
// eps1 = E4 - E3 = E2 - E1 and eps2 = E4 - E2 = E3 - E1.
struct EigenSystem {
    std::array<double, 4> energies{};  // ascending: E1 <= E2 <= E3 <= E4
    Mat4 states;                       // column k holds |E_{k+1}>
    double alpha = 1.0, xi = 0.0, eta = 1.0, delta = 0.0;
    double eps1 = 0.0, eps2 = 0.0;

    Eigen::Vector4cd state(int k) const { return states.col(k - 1); }  // k in 1..4
};

inline EigenSystem eigensystem(const ModelParams& p) {
    p.validate();
    EigenSystem es;
    const double Om = p.omega_sum();
    const double De = p.detuning();
    const double s = std::sqrt(4.0 * p.J * p.J + Om * Om);
    const double d = std::sqrt(4.0 * p.J * p.J + De * De);
    es.energies = {-0.5 * s, -0.5 * d, 0.5 * d, 0.5 * s};
    es.eps1 = 0.5 * (s - d);
    es.eps2 = 0.5 * (s + d);

    if (p.J > 0) {
        const double na = std::hypot(Om + s, 2.0 * p.J);
        es.alpha = (Om + s) / na;
        es.xi = 2.0 * p.J / na;
        const double nd = std::hypot(De + d, 2.0 * p.J);
        es.eta = (De + d) / nd;
        es.delta = -2.0 * p.J / nd;
    } else {
        // J = 0 makes the generic expressions 0/0; take the J->0+ limit,
        // which keeps eta >= 0 on both signs of the detuning.
        es.alpha = 1.0;
        es.xi = 0.0;
        es.eta = De >= 0 ? 1.0 : 0.0;
        es.delta = De >= 0 ? 0.0 : -1.0;
    }

    es.states.setZero();
    es.states(0, 3) = es.alpha;  // |E4> = alpha|ee> + xi|gg>
    es.states(3, 3) = es.xi;
    es.states(1, 2) = es.eta;    // |E3> = eta|eg> - delta|ge>
    es.states(2, 2) = -es.delta;
    es.states(2, 1) = es.eta;    // |E2> = eta|ge> + delta|eg>
    es.states(1, 1) = es.delta;
    es.states(3, 0) = es.alpha;  // |E1> = alpha|gg> - xi|ee>
    es.states(0, 0) = -es.xi;
    return es;
}

/// Ohmic-bath decay/excitation rates at transition frequency omega:
///   gamma_down(omega) = (kappa/2) omega [1 + coth(omega beta / 2)]
///   gamma_up(omega)   = gamma_down(omega) exp(-beta omega)
/// The Ohmic cutoff is taken above every relevant frequency, so no cutoff
/// parameter appears.
struct RatePair {
    double down = 0.0;
    double up = 0.0;
    double at_frequency = 0.0;
};

inline RatePair ohmic_rates(double omega, const ModelParams& p) {
    if (!(omega > 0))
        throw std::invalid_argument("ohmic_rates: omega must be > 0 (got " +
                                    std::to_string(omega) + ")");
    RatePair r;
    r.at_frequency = omega;
    const double coth = 1.0 / std::tanh(0.5 * omega * p.beta);
    r.down = 0.5 * p.kappa() * omega * (1.0 + coth);
    r.up = r.down * std::exp(-p.beta * omega);
    return r;
}

// Joint-eigenbasis (non-local) Lindblad operators. L1 and L2 lower the
// system energy by eps1 and eps2: [H_S, L_i] = -eps_i L_i. The local TQ
// operator decomposes exactly as
//   sigma_-^(2) = sum_j (L_x(eps_j) - i L_y(eps_j) + L_x(eps_j)^dag
//                        - i L_y(eps_j)^dag) / 2,
// which unit tests verify for random parameters.
struct NonlocalOps {
    Mat4 lx1, ly1, lx2, ly2;  // quadrature operators at eps1, eps2
    Mat4 l1, l2;              // l_i = (lx_i - i ly_i)/2
};

inline NonlocalOps nonlocal_lindblad_ops(const ModelParams& p) {
    const EigenSystem es = eigensystem(p);
    const cx i(0.0, 1.0);
    const auto proj = [&](int a, int b) -> Mat4 {
        return es.state(a) * es.state(b).adjoint();
    };
    const Mat4 t1 = proj(3, 4) + proj(1, 2);  // |E3><E4| + |E1><E2|
    const Mat4 t2 = proj(2, 4) - proj(1, 3);  // |E2><E4| - |E1><E3|

    NonlocalOps ops;
    ops.lx1 = (es.alpha * es.eta - es.xi * es.delta) * t1;
    ops.ly1 = i * (es.alpha * es.eta + es.xi * es.delta) * t1;
    ops.lx2 = (es.alpha * es.delta + es.xi * es.eta) * t2;
    ops.ly2 = i * (es.alpha * es.delta - es.xi * es.eta) * t2;
    ops.l1 = 0.5 * (ops.lx1 - i * ops.ly1);
    ops.l2 = 0.5 * (ops.lx2 - i * ops.ly2);
    return ops;
}

/// Secular-approximation health check: the Lindblad form of the non-local
/// equation needs min{2 eps1, 2 eps2, eps2 - eps1} >> max{gamma(eps1),
/// gamma(eps2)}. "Much greater" is interpreted as ratio > threshold
/// (default 10); threshold <= 0 disables the check.
struct SecularReport {
    double min_gap = 0.0;
    double max_rate = 0.0;
    double ratio = 0.0;
    double threshold = 10.0;
    bool valid = false;
};

inline SecularReport secular_validity(const ModelParams& p, double threshold = 10.0) {
    const EigenSystem es = eigensystem(p);
    SecularReport r;
    r.threshold = threshold;
    r.min_gap = std::min({2.0 * es.eps1, 2.0 * es.eps2, es.eps2 - es.eps1});
    r.max_rate = std::max(ohmic_rates(es.eps1, p).down, ohmic_rates(es.eps2, p).down);
    r.ratio = r.max_rate > 0 ? r.min_gap / r.max_rate
                             : std::numeric_limits<double>::infinity();
    r.valid = threshold <= 0.0 || r.ratio > threshold;
    return r;
}

/// Single-qubit Gibbs state exp(-beta omega sigma_z / 2)/Z, written in the
/// overflow-safe logistic form so beta -> infinity degrades gracefully.
inline Mat2 gibbs_qubit(double omega, double beta) {
    Mat2 g = Mat2::Zero();
    g(0, 0) = 1.0 / (1.0 + std::exp(beta * omega));   // excited population
    g(1, 1) = 1.0 / (1.0 + std::exp(-beta * omega));  // ground population
    return g;
}

/// Joint Gibbs state exp(-beta H_S)/Z via the closed-form eigensystem.
inline Mat4 gibbs_joint(const ModelParams& p) {
    const EigenSystem es = eigensystem(p);
    Eigen::Vector4d w;
    for (int k = 0; k < 4; ++k) w(k) = std::exp(-p.beta * es.energies[k]);
    w /= w.sum();
    Mat4 g = Mat4::Zero();
    for (int k = 0; k < 4; ++k)
        g += w(k) * (es.states.col(k) * es.states.col(k).adjoint());
    return g;
}

}  // namespace qmb
