#pragma once

#include "elasmatch/core/error.hpp"
#include "elasmatch/core/parallel.hpp"
#include "elasmatch/core/summation.hpp"
#include "elasmatch/matching/config.hpp"
#include "elasmatch/matching/energy.hpp"
#include "elasmatch/matching/match.hpp"
#include "elasmatch/optimize/lbfgs.hpp"
#include "elasmatch/optimize/line_search.hpp"
#include "elasmatch/pipeline/distance_matrix.hpp"
#include "elasmatch/pipeline/mds.hpp"
#include "elasmatch/pipeline/records.hpp"
#include "elasmatch/shapes/geometry.hpp"
#include "elasmatch/shapes/io.hpp"
#include "elasmatch/shapes/polyline.hpp"
#include "elasmatch/shapes/shape.hpp"
#include "elasmatch/shapes/subdivide.hpp"
#include "elasmatch/shapes/trimesh.hpp"
#include "elasmatch/srnf/inversion.hpp"
#include "elasmatch/srnf/srnf.hpp"
#include "elasmatch/varifold/atoms.hpp"
#include "elasmatch/varifold/distance.hpp"
#include "elasmatch/varifold/kernel.hpp"
