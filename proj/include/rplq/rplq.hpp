#pragma once

// Umbrella header: policy gradient methods for linear-quadratic control
// with i.i.d. random parameter matrices.

#include "rplq/bounds.hpp"
#include "rplq/common.hpp"
#include "rplq/errors.hpp"
#include "rplq/exact_pg.hpp"
#include "rplq/io.hpp"
#include "rplq/operators.hpp"
#include "rplq/parallel.hpp"
#include "rplq/params.hpp"
#include "rplq/problems.hpp"
#include "rplq/riccati.hpp"
#include "rplq/rng.hpp"
#include "rplq/rollout.hpp"
#include "rplq/zeroth_order.hpp"
