#pragma once

// Umbrella header for the whole toolkit.

#include "fujimi/errors.hpp"
#include "fujimi/dtmc.hpp"
#include "fujimi/graph.hpp"
#include "fujimi/solvers.hpp"
#include "fujimi/pctl.hpp"
#include "fujimi/checker.hpp"
#include "fujimi/fujimi_model.hpp"
#include "fujimi/io.hpp"
#include "fujimi/sim.hpp"
#include "fujimi/experiments.hpp"
