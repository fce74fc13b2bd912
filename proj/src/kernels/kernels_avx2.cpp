// AVX2 kernel variants. Elementwise arithmetic only (mul/sub/add/div/sqrt/max
// are all single-rounded IEEE ops), so results are bit-identical to the scalar
// reference; tails reuse the scalar entry points on the remaining slice.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

#include "kernels_impl.hpp"
#include "usim/kernels.hpp"

namespace usim::kernels::detail {

void avx2_axis_scale(double* cells, std::size_t n, const double* factors, std::size_t k,
                     std::size_t stride) {
  if (stride < 4) {  // short runs do not pay for vector setup
    scalar_axis_scale(cells, n, factors, k, stride);
    return;
  }
  std::size_t i = 0, j = 0;
  while (i < n) {
    const double f = factors[j];
    const __m256d vf = _mm256_set1_pd(f);
    const std::size_t run_end = i + stride < n ? i + stride : n;
    for (; i + 4 <= run_end; i += 4) {
      _mm256_storeu_pd(cells + i, _mm256_mul_pd(_mm256_loadu_pd(cells + i), vf));
    }
    for (; i < run_end; ++i) cells[i] *= f;
    j = j + 1 == k ? 0 : j + 1;
  }
}

void avx2_distance_batch(double origin_lat, double origin_lon, const double* lats,
                         const double* lons, std::size_t n, double kx, double ky, double* out) {
  const __m256d volat = _mm256_set1_pd(origin_lat);
  const __m256d volon = _mm256_set1_pd(origin_lon);
  const __m256d vkx = _mm256_set1_pd(kx);
  const __m256d vky = _mm256_set1_pd(ky);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(lons + i), volon), vkx);
    const __m256d dy = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(lats + i), volat), vky);
    const __m256d sq = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
  }
  scalar_distance_batch(origin_lat, origin_lon, lats + i, lons + i, n - i, kx, ky, out + i);
}

void avx2_huff_weights(const double* attract, const double* dist, std::size_t n, double decay,
                       double min_dist, double* out) {
  if (decay != 2.0) {  // general exponent stays on the scalar pow path
    scalar_huff_weights(attract, dist, n, decay, min_dist, out);
    return;
  }
  const __m256d vmin = _mm256_set1_pd(min_dist);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_max_pd(_mm256_loadu_pd(dist + i), vmin);
    _mm256_storeu_pd(out + i,
                     _mm256_div_pd(_mm256_loadu_pd(attract + i), _mm256_mul_pd(d, d)));
  }
  scalar_huff_weights(attract + i, dist + i, n - i, decay, min_dist, out + i);
}

std::size_t avx2_argmin_abs_diff(const double* values, const unsigned char* valid, std::size_t n,
                                 double target) {
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d vinf = _mm256_set1_pd(inf);
  const __m256d vt = _mm256_set1_pd(target);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d best = vinf;
  __m256i best_idx = _mm256_set1_epi64x(0);
  __m256i cur_idx = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256i step = _mm256_set1_epi64x(4);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(_mm256_loadu_pd(values + i), vt));
    const __m256i lane_valid = _mm256_setr_epi64x(valid[i] ? -1 : 0, valid[i + 1] ? -1 : 0,
                                                  valid[i + 2] ? -1 : 0, valid[i + 3] ? -1 : 0);
    d = _mm256_blendv_pd(vinf, d, _mm256_castsi256_pd(lane_valid));
    const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, d, lt);
    best_idx = _mm256_castpd_si256(
        _mm256_blendv_pd(_mm256_castsi256_pd(best_idx), _mm256_castsi256_pd(cur_idx), lt));
    cur_idx = _mm256_add_epi64(cur_idx, step);
  }

  alignas(32) double lane_best[4];
  alignas(32) long long lane_idx[4];
  _mm256_store_pd(lane_best, best);
  _mm256_store_si256(reinterpret_cast<__m256i*>(lane_idx), best_idx);

  double best_v = inf;
  std::size_t best_i = npos;
  for (int l = 0; l < 4; ++l) {
    if (lane_best[l] == inf) continue;
    const auto idx = static_cast<std::size_t>(lane_idx[l]);
    if (best_i == npos || lane_best[l] < best_v || (lane_best[l] == best_v && idx < best_i)) {
      best_v = lane_best[l];
      best_i = idx;
    }
  }
  for (; i < n; ++i) {  // tail indices are all larger, ties keep the vector hit
    if (!valid[i]) continue;
    const double d = std::fabs(values[i] - target);
    if (best_i == npos || d < best_v) {
      best_v = d;
      best_i = i;
    }
  }
  return best_i;
}

}  // namespace usim::kernels::detail

#endif  // x86_64
