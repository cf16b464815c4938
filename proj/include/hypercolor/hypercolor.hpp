#pragma once

// Umbrella header.

#include "hypercolor/cli.hpp"
#include "hypercolor/coloring.hpp"
#include "hypercolor/errors.hpp"
#include "hypercolor/hypergraph.hpp"
#include "hypercolor/maximizer.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/numeric.hpp"
#include "hypercolor/oracle.hpp"
#include "hypercolor/overlap_matrix.hpp"
#include "hypercolor/parallel.hpp"
#include "hypercolor/polytope.hpp"
#include "hypercolor/simulator.hpp"
