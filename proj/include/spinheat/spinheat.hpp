#pragma once

// Imaginary-time dynamics of the spin-1/2 Heisenberg ferromagnet in fixed
// magnon sectors, compared against lattice heat-kernel approximations.

#include "spinheat/binomial.hpp"
#include "spinheat/cache.hpp"
#include "spinheat/config.hpp"
#include "spinheat/errors.hpp"
#include "spinheat/evolve.hpp"
#include "spinheat/experiments.hpp"
#include "spinheat/fullspace.hpp"
#include "spinheat/harness.hpp"
#include "spinheat/heatfield.hpp"
#include "spinheat/io.hpp"
#include "spinheat/lattice.hpp"
#include "spinheat/magnon.hpp"
#include "spinheat/parallel.hpp"
#include "spinheat/rng.hpp"
#include "spinheat/spin_config.hpp"
