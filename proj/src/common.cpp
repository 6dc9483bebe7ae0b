#include "zeno/common.hpp"

#include <cmath>

namespace zeno {

std::int64_t steps_for(double t, double dt, const std::string& what) {
  const double ratio = t / dt;
  const double rounded = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    throw InvalidArgument(what + " = " + std::to_string(t) + " is not an integer multiple of the step " +
                          std::to_string(dt));
  }
  return static_cast<std::int64_t>(rounded);
}

}  // namespace zeno
