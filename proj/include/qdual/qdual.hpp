#pragma once

#include "qdual/corpus.hpp"
#include "qdual/dual_solver.hpp"
#include "qdual/error.hpp"
#include "qdual/kkt_certify.hpp"
#include "qdual/lagrangian_dual.hpp"
#include "qdual/linalg.hpp"
#include "qdual/oracle.hpp"
#include "qdual/problem_io.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"
