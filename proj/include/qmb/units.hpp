// Conversion of dimensionless simulation quantities to laboratory units,
// anchored by the physical TQ frequency. Whether a quoted "5 GHz" is a
// plain or an angular frequency is ambiguous in common usage, so the
// converter takes an explicit flag (default: plain frequency, omega = 2 pi f)
// and records the choice in the report.
#pragma once

#include <cmath>

#include "qmb/model.hpp"

namespace qmb {

inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kBoltzmann = 1.380649e-23;  // J / K

struct UnitsReport {
    bool has_reference = false;
    bool angular = false;
    double omega2_ghz = 0.0;
    // Couplings and rates expressed in the same frequency convention as omega2.
    double j_mhz = 0.0;
    double kappa_bar_mhz = 0.0;
    double delta_mhz = 0.0;
    double lambda0_mhz = 0.0;
    double temperature_kelvin = 0.0;
};

/// With omega2_ghz <= 0 the report passes dimensionless values through
/// unchanged (has_reference = false).
inline UnitsReport physical_units_report(const ModelParams& p, double omega2_ghz,
                                         bool angular = false) {
    UnitsReport r;
    if (omega2_ghz <= 0) return r;
    r.has_reference = true;
    r.angular = angular;
    r.omega2_ghz = omega2_ghz;
    const double mhz_per_unit = omega2_ghz * 1e3 / p.omega2;
    r.j_mhz = p.J * mhz_per_unit;
    r.kappa_bar_mhz = p.kappa_bar * mhz_per_unit;
    r.delta_mhz = p.detuning() * mhz_per_unit;
    r.lambda0_mhz = p.lambda0 * mhz_per_unit;
    const double omega2_si = (angular ? 1.0 : 2.0 * M_PI) * omega2_ghz * 1e9;  // rad/s
    const double omega2_beta = p.omega2 * p.beta;
    r.temperature_kelvin = kHbar * omega2_si / (kBoltzmann * omega2_beta);
    return r;
}

}  // namespace qmb
