#pragma once

#include "error.hpp"
#include "grid.hpp"
#include "groundstate.hpp"
#include "thresholds.hpp"
#include "energy.hpp"
#include "minimize.hpp"
#include "blowup.hpp"
#include "config.hpp"

namespace kirchhoff {
inline constexpr const char* version = "0.1.0";
}
