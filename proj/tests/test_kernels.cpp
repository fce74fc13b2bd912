#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "usim/kernels.hpp"
#include "usim/rng.hpp"

using namespace usim;

namespace {

std::vector<double> random_vector(rng::Stream& stream, std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (auto& x : out) x = stream.next_double(lo, hi);
  return out;
}

}  // namespace

TEST_CASE("axis_scale applies the (i/stride)%k factor pattern") {
  const auto& ops = kernels::scalar_ops();
  std::vector<double> cells{1, 1, 1, 1, 1, 1};
  const std::vector<double> factors{2, 3};
  ops.axis_scale(cells.data(), cells.size(), factors.data(), 2, 1);
  CHECK(cells == std::vector<double>{2, 3, 2, 3, 2, 3});

  std::fill(cells.begin(), cells.end(), 1.0);
  ops.axis_scale(cells.data(), cells.size(), factors.data(), 2, 3);
  CHECK(cells == std::vector<double>{2, 2, 2, 3, 3, 3});
}

TEST_CASE("distance_batch matches the single-point formula") {
  const auto& ops = kernels::scalar_ops();
  const double kx = 100000.0, ky = 111320.0;
  const std::vector<double> lats{25.01, 25.02};
  const std::vector<double> lons{121.5, 121.49};
  std::vector<double> out(2);
  ops.distance_batch(25.0, 121.5, lats.data(), lons.data(), 2, kx, ky, out.data());
  for (int i = 0; i < 2; ++i) {
    const double dx = (lons[i] - 121.5) * kx;
    const double dy = (lats[i] - 25.0) * ky;
    CHECK(out[i] == std::sqrt(dx * dx + dy * dy));
  }
}

TEST_CASE("huff_weights clamps and divides by the decayed distance") {
  const auto& ops = kernels::scalar_ops();
  const std::vector<double> att{0.4, 1.0, 0.5};
  const std::vector<double> dist{2000.0, 0.0, 10.0};
  std::vector<double> out(3);
  ops.huff_weights(att.data(), dist.data(), 3, 2.0, 50.0, out.data());
  CHECK(out[0] == doctest::Approx(1.0e-7).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(1.0 / 2500.0).epsilon(1e-12));  // clamped to 50 m
  CHECK(out[2] == doctest::Approx(0.5 / 2500.0).epsilon(1e-12));

  ops.huff_weights(att.data(), dist.data(), 3, 0.0, 50.0, out.data());
  CHECK(out[0] == 0.4);  // decay 0: weight equals attractiveness
  CHECK(out[1] == 1.0);
}

TEST_CASE("argmin_abs_diff honors the mask and lowest-index ties") {
  const auto& ops = kernels::scalar_ops();
  const std::vector<double> values{10, 5, 7, 5, 20};
  std::vector<unsigned char> valid{1, 1, 1, 1, 1};
  CHECK(ops.argmin_abs_diff(values.data(), valid.data(), 5, 5.0) == 1);
  CHECK(ops.argmin_abs_diff(values.data(), valid.data(), 5, 6.0) == 1);  // tie 5 vs 7 -> index 1
  valid[1] = 0;
  CHECK(ops.argmin_abs_diff(values.data(), valid.data(), 5, 5.0) == 3);
  std::fill(valid.begin(), valid.end(), 0);
  CHECK(ops.argmin_abs_diff(values.data(), valid.data(), 5, 5.0) == kernels::npos);
}

TEST_CASE("AVX2 variants are bit-exact against the scalar reference") {
  const kernels::Ops* avx2 = kernels::avx2_ops();
  if (avx2 == nullptr) {
    MESSAGE("AVX2 unavailable on this machine; dispatch falls back to scalar");
    return;
  }
  const auto& scalar = kernels::scalar_ops();
  rng::Stream stream(2024);

  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 64, 257}) {
    CAPTURE(n);

    // axis_scale across strides, including sub-vector runs
    for (std::size_t stride : {1, 2, 3, 4, 5, 8, 16}) {
      for (std::size_t k : {1, 2, 3, 5}) {
        auto a = random_vector(stream, n, -5, 5);
        auto b = a;
        auto factors = random_vector(stream, k, 0.0, 2.0);
        scalar.axis_scale(a.data(), n, factors.data(), k, stride);
        avx2->axis_scale(b.data(), n, factors.data(), k, stride);
        CHECK(a == b);
      }
    }

    // distance batch
    {
      auto lats = random_vector(stream, n, 24.9, 25.3);
      auto lons = random_vector(stream, n, 121.4, 121.7);
      std::vector<double> a(n), b(n);
      scalar.distance_batch(25.05, 121.55, lats.data(), lons.data(), n, 100900.0, 111320.0,
                            a.data());
      avx2->distance_batch(25.05, 121.55, lats.data(), lons.data(), n, 100900.0, 111320.0,
                           b.data());
      CHECK(a == b);
    }

    // huff weights: vectorized decay 2 and the scalar-delegating general case
    for (double decay : {2.0, 0.0, 1.37}) {
      auto att = random_vector(stream, n, 0, 1);
      auto dist = random_vector(stream, n, 0, 6000);
      std::vector<double> a(n), b(n);
      scalar.huff_weights(att.data(), dist.data(), n, decay, 50.0, a.data());
      avx2->huff_weights(att.data(), dist.data(), n, decay, 50.0, b.data());
      CHECK(a == b);
    }

    // masked argmin, including duplicated values to exercise tie-breaks
    {
      auto values = random_vector(stream, n, 0, 10);
      for (auto& v : values) v = std::floor(v);  // force collisions
      std::vector<unsigned char> valid(n);
      for (auto& m : valid) m = stream.next_below(3) > 0 ? 1 : 0;
      const double target = stream.next_double(0, 10);
      CHECK(scalar.argmin_abs_diff(values.data(), valid.data(), n, target) ==
            avx2->argmin_abs_diff(values.data(), valid.data(), n, target));
    }
  }
}

TEST_CASE("runtime dispatch resolves to a usable table") {
  const auto& ops = kernels::active_ops();
  CHECK(ops.name != nullptr);
  std::vector<double> cells{1.0};
  const double factor = 3.0;
  ops.axis_scale(cells.data(), 1, &factor, 1, 1);
  CHECK(cells[0] == 3.0);
}
