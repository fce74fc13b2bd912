#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "usim/kernels.hpp"

namespace usim::kernels {

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
  static const Ops ops{
      "avx2",
      &detail::avx2_axis_scale,
      &detail::avx2_distance_batch,
      &detail::avx2_huff_weights,
      &detail::avx2_argmin_abs_diff,
  };
  if (__builtin_cpu_supports("avx2")) return &ops;
#endif
  return nullptr;
}

namespace {

const Ops& resolve() {
  const char* force = std::getenv("USIM_KERNELS");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar_ops();
    if (std::strcmp(force, "avx2") == 0 && avx2_ops() != nullptr) return *avx2_ops();
  }
  if (const Ops* v = avx2_ops()) return *v;
  return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  static const Ops& ops = resolve();
  return ops;
}

}  // namespace usim::kernels
