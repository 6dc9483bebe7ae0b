// AVX2/FMA variants of the complex-array kernels. This translation unit is
// compiled with -mavx2 -mfma and only entered after a runtime CPU check.
//
// A __m256d holds two interleaved complex numbers [re0, im0, re1, im1].

#include <immintrin.h>

#include "zeno/simd/kernels.hpp"

namespace zeno::simd {
namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum4(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double norm2_avx2(const cplx* x, std::size_t n) {
  const double* p = as_doubles(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(p + 2 * i);
    const __m256d b = _mm256_loadu_pd(p + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum4(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return acc;
}

cplx sum_avx2(const cplx* x, std::size_t n) {
  const double* p = as_doubles(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + 2 * i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + 2 * i + 4));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, _mm256_add_pd(acc0, acc1));
  double re = lane[0] + lane[2];
  double im = lane[1] + lane[3];
  for (; i < n; ++i) {
    re += x[i].real();
    im += x[i].imag();
  }
  return {re, im};
}

cplx dot_avx2(const cplx* x, const cplx* y, std::size_t n) {
  const double* px = as_doubles(x);
  const double* py = as_doubles(y);
  __m256d acc_re = _mm256_setzero_pd();  // [xr*yr, xi*yi, ...]
  __m256d acc_im = _mm256_setzero_pd();  // [xr*yi, xi*yr, ...]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    const __m256d vy_sw = _mm256_permute_pd(vy, 0b0101);
    acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
    acc_im = _mm256_fmadd_pd(vx, vy_sw, acc_im);
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(m, acc_im);
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (m[0] - m[1]) + (m[2] - m[3]);
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

// a*x for two packed complex values: fmaddsub(ar, x, ai * swap(x)).
inline __m256d cmul(__m256d ar, __m256d ai, __m256d vx) {
  const __m256d sw = _mm256_permute_pd(vx, 0b0101);
  return _mm256_fmaddsub_pd(ar, vx, _mm256_mul_pd(ai, sw));
}

void axpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* px = as_doubles(x);
  double* py = as_doubles(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(vy, cmul(ar, ai, vx)));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (a.real() * xr - a.imag() * xi), y[i].imag() + (a.real() * xi + a.imag() * xr)};
  }
}

void scale_avx2(cplx a, cplx* y, std::size_t n) {
  double* py = as_doubles(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(py + 2 * i, cmul(ar, ai, _mm256_loadu_pd(py + 2 * i)));
  }
  for (; i < n; ++i) {
    const double yr = y[i].real(), yi = y[i].imag();
    y[i] = {a.real() * yr - a.imag() * yi, a.real() * yi + a.imag() * yr};
  }
}

void add_constant_avx2(cplx a, cplx* y, std::size_t n) {
  double* py = as_doubles(y);
  const __m256d c = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), c));
  }
  for (; i < n; ++i) y[i] = {y[i].real() + a.real(), y[i].imag() + a.imag()};
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{"avx2",    norm2_avx2, sum_avx2, dot_avx2,
                                 axpy_avx2, scale_avx2, add_constant_avx2};
  return table;
}
}  // namespace detail

}  // namespace zeno::simd
