#include <cmath>
#include <cstddef>
#include <limits>

#include "kernels_impl.hpp"
#include "usim/kernels.hpp"

namespace usim::kernels::detail {

void scalar_axis_scale(double* cells, std::size_t n, const double* factors, std::size_t k,
                       std::size_t stride) {
  std::size_t i = 0, j = 0;
  while (i < n) {
    const double f = factors[j];
    const std::size_t run_end = i + stride < n ? i + stride : n;
    for (; i < run_end; ++i) cells[i] *= f;
    j = j + 1 == k ? 0 : j + 1;
  }
}

void scalar_distance_batch(double origin_lat, double origin_lon, const double* lats,
                           const double* lons, std::size_t n, double kx, double ky, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (lons[i] - origin_lon) * kx;
    const double dy = (lats[i] - origin_lat) * ky;
    out[i] = std::sqrt(dx * dx + dy * dy);
  }
}

void scalar_huff_weights(const double* attract, const double* dist, std::size_t n, double decay,
                         double min_dist, double* out) {
  if (decay == 2.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist[i] < min_dist ? min_dist : dist[i];
      out[i] = attract[i] / (d * d);
    }
  } else if (decay == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = attract[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist[i] < min_dist ? min_dist : dist[i];
      out[i] = attract[i] / std::pow(d, decay);
    }
  }
}

std::size_t scalar_argmin_abs_diff(const double* values, const unsigned char* valid, std::size_t n,
                                   double target) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = npos;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    const double d = std::fabs(values[i] - target);
    if (best_idx == npos || d < best) {
      best = d;
      best_idx = i;
    }
  }
  return best_idx;
}

}  // namespace usim::kernels::detail

namespace usim::kernels {

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",
      &detail::scalar_axis_scale,
      &detail::scalar_distance_batch,
      &detail::scalar_huff_weights,
      &detail::scalar_argmin_abs_diff,
  };
  return ops;
}

}  // namespace usim::kernels
