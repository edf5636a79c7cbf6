#pragma once

#include "sbvp/boundary.hpp"
#include "sbvp/bvp.hpp"
#include "sbvp/config.hpp"
#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/grid.hpp"
#include "sbvp/linalg.hpp"
#include "sbvp/ode.hpp"
#include "sbvp/parametric.hpp"
#include "sbvp/sobolev.hpp"
