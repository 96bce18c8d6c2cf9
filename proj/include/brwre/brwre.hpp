#pragma once

// Umbrella header.

#include "brwre/config.hpp"
#include "brwre/engine.hpp"
#include "brwre/environment.hpp"
#include "brwre/harness.hpp"
#include "brwre/observables.hpp"
#include "brwre/offspring.hpp"
#include "brwre/oracle.hpp"
#include "brwre/prf.hpp"
#include "brwre/sampling.hpp"
#include "brwre/state.hpp"
#include "brwre/stats.hpp"
#include "brwre/walk.hpp"
