#pragma once

// Umbrella header for the decay-observable laboratory.

#include "decaylab/asymptotics.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/gauss.hpp"
#include "decaylab/grid.hpp"
#include "decaylab/kinematics.hpp"
#include "decaylab/mdd.hpp"
#include "decaylab/observables.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/scaling.hpp"
