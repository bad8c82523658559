// Umbrella header for the qmb library: open-system dynamics of a driven
// qubit coupled through a dissipative memory qubit to an Ohmic bath,
// volume-of-accessible-states non-Markovianity analysis, and average-work
// thermodynamics.
#pragma once

#include "qmb/config.hpp"
#include "qmb/csv.hpp"
#include "qmb/dynamics.hpp"
#include "qmb/errors.hpp"
#include "qmb/integrator.hpp"
#include "qmb/model.hpp"
#include "qmb/nonmarkov.hpp"
#include "qmb/qops.hpp"
#include "qmb/tasks.hpp"
#include "qmb/thermo.hpp"
#include "qmb/units.hpp"
#include "qmb/version.hpp"
