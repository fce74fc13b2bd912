#include "usim/geo.hpp"

#include "usim/kernels.hpp"

namespace usim::geo {

void Projection::distance_batch(LatLon origin, std::span<const double> lats,
                                std::span<const double> lons, std::span<double> out) const {
  kernels::active_ops().distance_batch(origin.lat, origin.lon, lats.data(), lons.data(),
                                       lats.size(), kx_, ky_, out.data());
}

}  // namespace usim::geo
