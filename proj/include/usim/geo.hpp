#pragma once

#include <cmath>
#include <span>

#include "usim/error.hpp"

namespace usim::geo {

// meters per degree of latitude (and of longitude at the equator)
inline constexpr double kMetersPerDegree = 111320.0;

struct LatLon {
  double lat = 0;
  double lon = 0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct BBox {
  double min_lat = 0, min_lon = 0, max_lat = 0, max_lon = 0;

  bool degenerate() const { return !(max_lat > min_lat) || !(max_lon > min_lon); }
  double mid_lat() const { return 0.5 * (min_lat + max_lat); }
};

// Local equirectangular projection around a fixed reference latitude.
// x grows east, y grows north, both in meters. Adequate at city scale
// (distortion well under 0.1% across a ~20 km extent).
class Projection {
public:
  Projection() : Projection(0.0) {}
  explicit Projection(double ref_lat_deg)
      : ref_lat_deg_(ref_lat_deg),
        kx_(std::cos(ref_lat_deg * kDegToRad) * kMetersPerDegree),
        ky_(kMetersPerDegree) {}

  double ref_lat_deg() const { return ref_lat_deg_; }
  double meters_per_lon_degree() const { return kx_; }
  double meters_per_lat_degree() const { return ky_; }

  double x(double lon, double origin_lon) const { return (lon - origin_lon) * kx_; }
  double y(double lat, double origin_lat) const { return (lat - origin_lat) * ky_; }

  LatLon offset(LatLon origin, double dx_m, double dy_m) const {
    return {origin.lat + dy_m / ky_, origin.lon + dx_m / kx_};
  }

  double distance_m(LatLon a, LatLon b) const {
    double dx = (b.lon - a.lon) * kx_;
    double dy = (b.lat - a.lat) * ky_;
    return std::sqrt(dx * dx + dy * dy);
  }

  // batched origin->point distances; routed through the kernels module
  void distance_batch(LatLon origin, std::span<const double> lats, std::span<const double> lons,
                      std::span<double> out) const;

private:
  static constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;
  double ref_lat_deg_;
  double kx_;
  double ky_;
};

}  // namespace usim::geo
