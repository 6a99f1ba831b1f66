#pragma once

#include "d3m/bench.hpp"
#include "d3m/block_core.hpp"
#include "d3m/config.hpp"
#include "d3m/ddm_reduce.hpp"
#include "d3m/dense_ldlt.hpp"
#include "d3m/mesh_fem.hpp"
#include "d3m/numeric.hpp"
#include "d3m/ordering.hpp"
#include "d3m/symbolic.hpp"
#include "d3m/types.hpp"
