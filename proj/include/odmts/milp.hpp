#pragma once

#include "odmts/milp/branch_and_bound.hpp"
#include "odmts/milp/model.hpp"
#include "odmts/milp/model_io.hpp"
#include "odmts/milp/simplex.hpp"
