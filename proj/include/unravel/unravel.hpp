#pragma once

// Superposition-free stochastic simulation of closed quantum dynamics:
// basis-pinned trajectory pairs with Poisson-timed jumps, dyad estimators,
// triplet compression, and an exact eigendecomposition oracle.

#include "cli.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "initial.hpp"
#include "io.hpp"
#include "jump_engine.hpp"
#include "models.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "runner.hpp"
#include "state.hpp"
#include "triplet_engine.hpp"
