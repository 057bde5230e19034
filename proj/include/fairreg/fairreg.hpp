#pragma once

#include "fairreg/core.hpp"
#include "fairreg/discretize.hpp"
#include "fairreg/moments.hpp"
#include "fairreg/learners.hpp"
#include "fairreg/lp.hpp"
#include "fairreg/oracles.hpp"
#include "fairreg/sp_solver.hpp"
#include "fairreg/bgl_solver.hpp"
#include "fairreg/baselines.hpp"
#include "fairreg/harness.hpp"
#include "fairreg/report.hpp"
