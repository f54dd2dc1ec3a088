#pragma once

#include "cdmm/benchmark.hpp"
#include "cdmm/config.hpp"
#include "cdmm/decode.hpp"
#include "cdmm/encode.hpp"
#include "cdmm/error.hpp"
#include "cdmm/fl_demo.hpp"
#include "cdmm/linsolve.hpp"
#include "cdmm/matching.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/matrix_io.hpp"
#include "cdmm/partition.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/random.hpp"
#include "cdmm/resilience.hpp"
#include "cdmm/roster.hpp"
#include "cdmm/serialize.hpp"
#include "cdmm/simulator.hpp"
