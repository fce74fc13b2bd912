#pragma once

#include <cstddef>

// internal: raw kernel entry points shared between the scalar TU, the AVX2 TU
// (tail handling) and the dispatch table

namespace usim::kernels::detail {

void scalar_axis_scale(double* cells, std::size_t n, const double* factors, std::size_t k,
                       std::size_t stride);
void scalar_distance_batch(double origin_lat, double origin_lon, const double* lats,
                           const double* lons, std::size_t n, double kx, double ky, double* out);
void scalar_huff_weights(const double* attract, const double* dist, std::size_t n, double decay,
                         double min_dist, double* out);
std::size_t scalar_argmin_abs_diff(const double* values, const unsigned char* valid, std::size_t n,
                                   double target);

#if defined(__x86_64__) || defined(_M_X64)
void avx2_axis_scale(double* cells, std::size_t n, const double* factors, std::size_t k,
                     std::size_t stride);
void avx2_distance_batch(double origin_lat, double origin_lon, const double* lats,
                         const double* lons, std::size_t n, double kx, double ky, double* out);
void avx2_huff_weights(const double* attract, const double* dist, std::size_t n, double decay,
                       double min_dist, double* out);
std::size_t avx2_argmin_abs_diff(const double* values, const unsigned char* valid, std::size_t n,
                                 double target);
#endif

}  // namespace usim::kernels::detail
