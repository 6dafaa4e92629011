#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace npkry {

using Point3 = std::array<double, 3>;

/// Random 1D tree embedded in the unit cube: the geometric parameter mu.
struct Geometry1D {
  std::uint64_t seed = 0;
  std::vector<Point3> vertices;                     // strictly inside (0,1)^3
  std::vector<std::array<std::size_t, 2>> segments;  // connected tree edges
  std::vector<double> segment_length;                // arc length per segment

  double total_length() const;
  /// Point at arc length s along the concatenated segment polyline,
  /// s in [0, total_length].
  Point3 point_at_arc_length(double s) const;
  bool connected() const;
};

/// Grows a random tree: each new segment attaches to a uniformly chosen
/// existing vertex, with uniform direction and length in [0.15, 0.4];
/// candidates outside [0.1, 0.9]^3 are rejected. Deterministic per seed.
Geometry1D generate_geometry(std::uint64_t seed, std::size_t n_segments);

double point_segment_distance(const Point3& p, const Point3& a,
                              const Point3& b);
/// Distance from p to the union of segments.
double distance_to_geometry(const Point3& p, const Geometry1D& g);

void write_geometry(const Geometry1D& g, const std::filesystem::path& path);
Geometry1D read_geometry(const std::filesystem::path& path);

}  // namespace npkry
