#include <doctest.h>

#include <random>
#include <vector>

#include "zeno/simd/kernels.hpp"

using zeno::simd::cplx;

namespace {

std::vector<cplx> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {dist(gen), dist(gen)};
  return v;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels match a naive loop") {
    const auto& k = zeno::simd::scalar_kernels();
    const auto x = random_vector(37, 1), y0 = random_vector(37, 2);
    double n2 = 0.0;
    cplx sum{}, dot{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      n2 += std::norm(x[i]);
      sum += x[i];
      dot += std::conj(x[i]) * y0[i];
    }
    CHECK(k.norm2(x.data(), x.size()) == doctest::Approx(n2).epsilon(1e-14));
    CHECK(std::abs(k.sum(x.data(), x.size()) - sum) < 1e-12);
    CHECK(std::abs(k.dot(x.data(), y0.data(), x.size()) - dot) < 1e-12);

    auto y = y0;
    const cplx a{0.3, -1.1};
    k.axpy(a, x.data(), y.data(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - (y0[i] + a * x[i])) < 1e-14);
  }

  TEST_CASE("avx2 kernels agree with the scalar reference") {
    const auto* v = zeno::simd::avx2_kernels();
    if (v == nullptr) {
      MESSAGE("no AVX2 on this machine; skipped");
      return;
    }
    const auto& s = zeno::simd::scalar_kernels();
    for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 17u, 64u, 1001u}) {
      CAPTURE(n);
      const auto x = random_vector(n, 10 + static_cast<unsigned>(n)), y0 = random_vector(n, 99);
      CHECK(v->norm2(x.data(), n) == doctest::Approx(s.norm2(x.data(), n)).epsilon(1e-13));
      CHECK(std::abs(v->sum(x.data(), n) - s.sum(x.data(), n)) <= 1e-12 * (1.0 + n));
      CHECK(std::abs(v->dot(x.data(), y0.data(), n) - s.dot(x.data(), y0.data(), n)) <= 1e-12 * (1.0 + n));

      const cplx a{-0.7, 0.25};
      auto ys = y0, yv = y0;
      s.axpy(a, x.data(), ys.data(), n);
      v->axpy(a, x.data(), yv.data(), n);
      auto xs = x, xv = x;
      s.scale(a, xs.data(), n);
      v->scale(a, xv.data(), n);
      auto cs = x, cv = x;
      s.add_constant(a, cs.data(), n);
      v->add_constant(a, cv.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(ys[i] - yv[i]) < 1e-14);
        CHECK(std::abs(xs[i] - xv[i]) < 1e-14);
        CHECK(cs[i] == cv[i]);
      }
    }
  }

  TEST_CASE("dispatch returns a usable table") {
    const auto& k = zeno::simd::active_kernels();
    CHECK(!k.name.empty());
    std::vector<cplx> v{{3.0, 4.0}};
    CHECK(zeno::simd::norm2(v) == 25.0);
  }
}
