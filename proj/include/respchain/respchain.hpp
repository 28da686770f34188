#pragma once

#include "respchain/chain_core.hpp"
#include "respchain/diagnostics.hpp"
#include "respchain/error.hpp"
#include "respchain/likelihood.hpp"
#include "respchain/matrix.hpp"
#include "respchain/simulate.hpp"
#include "respchain/stat_tests.hpp"
#include "respchain/state_space.hpp"
#include "respchain/theoretical_models.hpp"
