/// @file ism.hpp
/// @brief Umbrella header for the incompressible slice model toolkit.

#pragma once

#include "ism/config.hpp"
#include "ism/diagnostics.hpp"
#include "ism/dynamics.hpp"
#include "ism/equilibria.hpp"
#include "ism/grid.hpp"
#include "ism/initial.hpp"
#include "ism/operators.hpp"
#include "ism/run.hpp"
#include "ism/snapshot.hpp"
