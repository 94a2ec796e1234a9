#pragma once

#include "lincf/error.hpp"
#include "lincf/linalg.hpp"
#include "lincf/sem.hpp"
#include "lincf/algebra.hpp"
#include "lincf/sampling.hpp"
#include "lincf/evidence.hpp"
#include "lincf/counterfactual.hpp"
#include "lincf/optimal_plan.hpp"
#include "lincf/disjunctive.hpp"
#include "lincf/oracle.hpp"
#include "lincf/io.hpp"
