#pragma once

#include "lassogeom/bounds.hpp"
#include "lassogeom/errors.hpp"
#include "lassogeom/geometry.hpp"
#include "lassogeom/model.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/proofcheck.hpp"
#include "lassogeom/regularizers.hpp"
#include "lassogeom/rng.hpp"
#include "lassogeom/solvers.hpp"

#include "lassogeom/harness/config.hpp"
#include "lassogeom/harness/csv.hpp"
#include "lassogeom/harness/figures.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/harness/prove.hpp"
#include "lassogeom/harness/svg.hpp"
#include "lassogeom/harness/sweep.hpp"
