#pragma once

#include "ocsolve/benchmarks.hpp"
#include "ocsolve/care.hpp"
#include "ocsolve/error.hpp"
#include "ocsolve/grid.hpp"
#include "ocsolve/io.hpp"
#include "ocsolve/iterate.hpp"
#include "ocsolve/kkt.hpp"
#include "ocsolve/ncp.hpp"
#include "ocsolve/ode.hpp"
#include "ocsolve/problem.hpp"
#include "ocsolve/riccati_step.hpp"
#include "ocsolve/solver.hpp"
