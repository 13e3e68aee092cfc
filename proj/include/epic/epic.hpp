#pragma once

#include "epic/canonical.hpp"
#include "epic/core.hpp"
#include "epic/distances.hpp"
#include "epic/environments.hpp"
#include "epic/equivalence.hpp"
#include "epic/io.hpp"
#include "epic/mlp.hpp"
#include "epic/nnls.hpp"
#include "epic/npec.hpp"
#include "epic/reward_function.hpp"
#include "epic/sampling.hpp"
#include "epic/solver.hpp"
#include "epic/stats.hpp"
