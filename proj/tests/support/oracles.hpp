#pragma once

#include "scratchsim/acceptance/oracles.hpp"

namespace oracle = scratchsim::acceptance::oracle;
