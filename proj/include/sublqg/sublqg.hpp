#pragma once

#include "analysis.hpp"
#include "errors.hpp"
#include "feasibility.hpp"
#include "generator.hpp"
#include "io.hpp"
#include "kalman.hpp"
#include "kalman_oracle.hpp"
#include "linalg.hpp"
#include "lqr.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "sim.hpp"
#include "strategy.hpp"
#include "substitution.hpp"
