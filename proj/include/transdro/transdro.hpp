#pragma once

#include "transdro/baselines.hpp"
#include "transdro/constraint.hpp"
#include "transdro/csv.hpp"
#include "transdro/dro.hpp"
#include "transdro/evaluation.hpp"
#include "transdro/lasso.hpp"
#include "transdro/report.hpp"
#include "transdro/rng.hpp"
#include "transdro/simplex_qp.hpp"
#include "transdro/simulation.hpp"
#include "transdro/types.hpp"
#include "transdro/variance.hpp"
