#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace zeno {

using cplx = std::complex<double>;

// A precondition on user-supplied parameters does not hold (bad config).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A run would leave the simulated window: the horizon or the causal-cone grid.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Converts a time to a whole number of steps of length `dt`, or throws.
std::int64_t steps_for(double t, double dt, const std::string& what);

}  // namespace zeno
