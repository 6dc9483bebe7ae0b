#pragma once
// Complex-array kernels used by the grid solvers.
//
// Every kernel has a scalar reference implementation. An AVX2/FMA variant is
// compiled on x86-64 and selected at runtime when the CPU supports it. The
// variants agree to rounding (reduction order differs), and each variant is
// deterministic for a given input: reductions use a fixed lane partition and
// a fixed horizontal combination order.
//
// Set ZENOLAB_KERNELS=scalar in the environment to force the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace zeno::simd {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;
  // sum |x_i|^2
  double (*norm2)(const cplx* x, std::size_t n);
  // sum x_i
  cplx (*sum)(const cplx* x, std::size_t n);
  // sum conj(x_i) * y_i
  cplx (*dot)(const cplx* x, const cplx* y, std::size_t n);
  // y_i += a * x_i
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // y_i *= a
  void (*scale)(cplx a, cplx* y, std::size_t n);
  // y_i += a
  void (*add_constant)(cplx a, cplx* y, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the build has no AVX2 variant or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// The table chosen at first use; stable for the life of the process.
const KernelTable& active_kernels();

// Span conveniences over the active table.
inline double norm2(std::span<const cplx> x) { return active_kernels().norm2(x.data(), x.size()); }
inline cplx sum(std::span<const cplx> x) { return active_kernels().sum(x.data(), x.size()); }
inline cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
  return active_kernels().dot(x.data(), y.data(), x.size());
}
inline void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  active_kernels().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(cplx a, std::span<cplx> y) { active_kernels().scale(a, y.data(), y.size()); }
inline void add_constant(cplx a, std::span<cplx> y) { active_kernels().add_constant(a, y.data(), y.size()); }

}  // namespace zeno::simd
