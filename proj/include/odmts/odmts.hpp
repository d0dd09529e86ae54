#pragma once

#include "odmts/common.hpp"
#include "odmts/design.hpp"
#include "odmts/fleet.hpp"
#include "odmts/instance.hpp"
#include "odmts/instgen.hpp"
#include "odmts/metrics.hpp"
#include "odmts/milp.hpp"
#include "odmts/pipeline.hpp"
#include "odmts/routegen.hpp"
