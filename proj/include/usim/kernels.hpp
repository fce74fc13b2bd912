#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

// Data-parallel inner loops behind the population fit, home allocation and
// destination choice. Each kernel has a scalar reference implementation and
// an AVX2 variant selected at runtime; the variants are equivalence-tested
// against the reference (bit-exact, see tests/test_kernels.cpp).
//
// All kernels require finite inputs. Kernel TUs are compiled with
// -ffp-contract=off so scalar and vector paths round identically.

namespace usim::kernels {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Ops {
  const char* name;

  // cells[i] *= factors[(i / stride) % k]  — one tensor-axis scaling sweep
  void (*axis_scale)(double* cells, std::size_t n, const double* factors, std::size_t k,
                     std::size_t stride);

  // out[i] = hypot((lons[i]-origin_lon)*kx, (lats[i]-origin_lat)*ky)
  // kx/ky are the projection's meters-per-degree factors.
  void (*distance_batch)(double origin_lat, double origin_lon, const double* lats,
                         const double* lons, std::size_t n, double kx, double ky, double* out);

  // d = max(dist[i], min_dist); out[i] = attract[i] / d^decay
  void (*huff_weights)(const double* attract, const double* dist, std::size_t n, double decay,
                       double min_dist, double* out);

  // lowest index i with valid[i] != 0 minimizing |values[i] - target|; npos when
  // no index is valid. Ties resolve to the lowest index.
  std::size_t (*argmin_abs_diff)(const double* values, const unsigned char* valid, std::size_t n,
                                 double target);
};

const Ops& scalar_ops();

// nullptr when AVX2 is unavailable on this CPU (or not compiled in)
const Ops* avx2_ops();

// Resolved once per process: USIM_KERNELS=scalar|avx2 overrides, otherwise the
// widest supported variant wins.
const Ops& active_ops();

}  // namespace usim::kernels
