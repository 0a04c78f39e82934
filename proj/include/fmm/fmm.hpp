#pragma once

#include "fmm/algorithm.hpp"
#include "fmm/catalog.hpp"
#include "fmm/engine.hpp"
#include "fmm/experiment.hpp"
#include "fmm/matrix.hpp"
#include "fmm/oracle.hpp"
#include "fmm/plan.hpp"
#include "fmm/random.hpp"
#include "fmm/rational.hpp"
#include "fmm/scaling.hpp"
#include "fmm/stability.hpp"
