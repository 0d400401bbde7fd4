#pragma once

#include "chain.hpp"
#include "exact.hpp"
#include "fit.hpp"
#include "geometry.hpp"
#include "monte_carlo.hpp"
#include "potential_kernel.hpp"
#include "report.hpp"
#include "step_law.hpp"
#include "verification.hpp"
