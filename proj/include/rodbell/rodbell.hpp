#pragma once

#include "rodbell/chsh.hpp"
#include "rodbell/correlators.hpp"
#include "rodbell/error.hpp"
#include "rodbell/estimate.hpp"
#include "rodbell/geometry.hpp"
#include "rodbell/kernel.hpp"
#include "rodbell/quadrature.hpp"
#include "rodbell/random.hpp"
#include "rodbell/vec3.hpp"

namespace rodbell {
inline constexpr const char* kVersion = "0.1.0";
}
