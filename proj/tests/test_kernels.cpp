#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "extragrad/kernels.hpp"
#include "extragrad/rng.hpp"

namespace k = extragrad::kernels;

TEST_SUITE("kernels") {
  std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    extragrad::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
  }

  bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
  }

  TEST_CASE("scalar table computes the reference values") {
    const k::KernelTable& s = k::scalar_table();
    const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
    CHECK(s.dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
    std::vector<double> y{1, 1, 1};
    s.axpy(2.0, a.data(), y.data(), 3);
    CHECK(y == std::vector<double>{3, 5, 7});
    std::vector<double> out(3);
    s.waxpy(out.data(), a.data(), -1.0, b.data(), 3);
    CHECK(out == std::vector<double>{-3, 7, -3});
    s.scale(out.data(), 0.5, a.data(), 3);
    CHECK(out == std::vector<double>{0.5, 1, 1.5});
    // [[1 2 3], [4 5 6]] times (1, 0, -1) and its transpose times (1, 1).
    const std::vector<double> m{1, 2, 3, 4, 5, 6};
    std::vector<double> mv(2), mtv(3);
    const std::vector<double> x{1, 0, -1}, z{1, 1};
    s.gemv(m.data(), 2, 3, x.data(), mv.data());
    s.gemv_t(m.data(), 2, 3, z.data(), mtv.data());
    CHECK(mv == std::vector<double>{-2, -2});
    CHECK(mtv == std::vector<double>{5, 7, 9});
  }

  TEST_CASE("AVX2 kernels match scalar kernels") {
    const k::KernelTable* v = k::avx2_table();
    if (v == nullptr) {
      MESSAGE("AVX2 not available on this machine; equivalence not exercised");
      return;
    }
    const k::KernelTable& s = k::scalar_table();
    for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 101, 1000}) {
      CAPTURE(n);
      const auto a = random_values(n, 10 + n), b = random_values(n, 20 + n);
      // Elementwise kernels are bitwise identical.
      auto y1 = b, y2 = b;
      s.axpy(0.37, a.data(), y1.data(), n);
      v->axpy(0.37, a.data(), y2.data(), n);
      CHECK(bitwise_equal(y1, y2));
      std::vector<double> o1(n), o2(n);
      s.waxpy(o1.data(), a.data(), -1.3, b.data(), n);
      v->waxpy(o2.data(), a.data(), -1.3, b.data(), n);
      CHECK(bitwise_equal(o1, o2));
      s.scale(o1.data(), 2.5, a.data(), n);
      v->scale(o2.data(), 2.5, a.data(), n);
      CHECK(bitwise_equal(o1, o2));
      // Reductions agree up to summation order.
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
      CHECK(std::abs(s.dot(a.data(), b.data(), n) - v->dot(a.data(), b.data(), n)) <= 1e-14 * (mag + 1.0));
    }
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {8, 8}, {17, 9}, {40, 40}}) {
      CAPTURE(rows);
      CAPTURE(cols);
      const auto m = random_values(rows * cols, 7 * rows + cols);
      const auto x = random_values(cols, 3), z = random_values(rows, 4);
      std::vector<double> s1(rows), s2(rows), t1(cols), t2(cols);
      s.gemv(m.data(), rows, cols, x.data(), s1.data());
      v->gemv(m.data(), rows, cols, x.data(), s2.data());
      s.gemv_t(m.data(), rows, cols, z.data(), t1.data());
      v->gemv_t(m.data(), rows, cols, z.data(), t2.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-13));
      for (std::size_t i = 0; i < cols; ++i) CHECK(t1[i] == doctest::Approx(t2[i]).epsilon(1e-13));
    }
  }

  TEST_CASE("backend selection") {
    const std::string before = k::active().name;
    CHECK(k::select_backend("scalar"));
    CHECK(std::string(k::active().name) == "scalar");
    CHECK_FALSE(k::select_backend("neon"));
    CHECK(std::string(k::active().name) == "scalar");
    if (k::avx2_table() != nullptr) {
      CHECK(k::select_backend("avx2"));
      CHECK(std::string(k::active().name) == "avx2");
    }
    k::select_backend(before);
  }
}
