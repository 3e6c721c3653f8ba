#pragma once

#include "nnq/active_set.hpp"
#include "nnq/diagnostics.hpp"
#include "nnq/driver.hpp"
#include "nnq/edge_index.hpp"
#include "nnq/enclosing_ball.hpp"
#include "nnq/gram.hpp"
#include "nnq/graphs.hpp"
#include "nnq/imaging.hpp"
#include "nnq/point_cloud.hpp"
#include "nnq/polytope_distance.hpp"
#include "nnq/problem.hpp"
#include "nnq/reduced_qp.hpp"
#include "nnq/sampling.hpp"
#include "nnq/subsolver.hpp"
#include "nnq/types.hpp"
