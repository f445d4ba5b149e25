#pragma once

#include "sps/error.hpp"
#include "sps/geometry.hpp"
#include "sps/grid.hpp"
#include "sps/random_fields.hpp"
#include "sps/linear_solve.hpp"
#include "sps/poisson.hpp"
#include "sps/energy.hpp"
#include "sps/parallel.hpp"
#include "sps/solver.hpp"
#include "sps/asymptotics.hpp"
#include "sps/multiplicity.hpp"
#include "sps/diagnostics.hpp"
#include "sps/io.hpp"
#include "sps/config.hpp"
