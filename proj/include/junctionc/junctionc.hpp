#pragma once

// Umbrella header for the junction-tree compiler library.

#include "almond.hpp"          // IWYU pragma: export
#include "compiler.hpp"        // IWYU pragma: export
#include "errors.hpp"          // IWYU pragma: export
#include "graph.hpp"           // IWYU pragma: export
#include "junction.hpp"        // IWYU pragma: export
#include "model.hpp"           // IWYU pragma: export
#include "oracle.hpp"          // IWYU pragma: export
#include "pos.hpp"             // IWYU pragma: export
#include "potential.hpp"       // IWYU pragma: export
#include "propagation.hpp"     // IWYU pragma: export
#include "random_instances.hpp"  // IWYU pragma: export
#include "universe.hpp"        // IWYU pragma: export
#include "varset.hpp"          // IWYU pragma: export
