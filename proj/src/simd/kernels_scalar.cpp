#include "zeno/simd/kernels.hpp"

// Reference kernels. Complex products are written out on real/imag parts so
// the result does not depend on the library's inf/nan recovery in operator*.

namespace zeno::simd {
namespace {

double norm2_scalar(const cplx* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

cplx sum_scalar(const cplx* x, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real();
    im += x[i].imag();
  }
  return {re, im};
}

cplx dot_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

void axpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr)};
  }
}

void scale_scalar(cplx a, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double yr = y[i].real(), yi = y[i].imag();
    y[i] = {ar * yr - ai * yi, ar * yi + ai * yr};
  }
}

void add_constant_scalar(cplx a, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = {y[i].real() + a.real(), y[i].imag() + a.imag()};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",    norm2_scalar, sum_scalar, dot_scalar,
                                 axpy_scalar, scale_scalar, add_constant_scalar};
  return table;
}

}  // namespace zeno::simd
