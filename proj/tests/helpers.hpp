// Seeded random generators shared by the test suites. Everything is
// deterministic: no time-based seeding anywhere.
#pragma once

#include <random>

#include "qmb/qmb.hpp"

namespace qmb::test {

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline cx random_cx(std::mt19937_64& g) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(g), n(g)};
}

inline MatX random_matrix(std::mt19937_64& g, int dim) {
    MatX m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = random_cx(g);
    return m;
}

inline MatX random_hermitian(std::mt19937_64& g, int dim) {
    const MatX m = random_matrix(g, dim);
    return 0.5 * (m + m.adjoint());
}

// Full-rank random density matrix (Ginibre construction).
inline MatX random_density(std::mt19937_64& g, int dim) {
    const MatX m = random_matrix(g, dim);
    MatX rho = m * m.adjoint();
    rho /= rho.trace();
    return rho;
}

// Uniform point in the closed Bloch ball.
inline Vec3 random_bloch(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 dir(n(g), n(g), n(g));
    dir.normalize();
    return std::cbrt(u(g)) * dir;
}

}  // namespace qmb::test
