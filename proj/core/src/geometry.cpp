#include "npkry/geometry.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "npkry/error.hpp"
#include "npkry/rng.hpp"

namespace npkry {

namespace {

double dist3(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool inside_margin(const Point3& p) {
  for (double c : p)
    if (c < 0.1 || c > 0.9) return false;
  return true;
}

}  // namespace

double Geometry1D::total_length() const {
  double s = 0.0;
  for (double l : segment_length) s += l;
  return s;
}

Point3 Geometry1D::point_at_arc_length(double s) const {
  check(!segments.empty(), "point_at_arc_length: empty geometry");
  double acc = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double len = segment_length[i];
    if (s <= acc + len || i + 1 == segments.size()) {
      const double t = len > 0.0 ? std::clamp((s - acc) / len, 0.0, 1.0) : 0.0;
      const Point3& a = vertices[segments[i][0]];
      const Point3& b = vertices[segments[i][1]];
      return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
              a[2] + t * (b[2] - a[2])};
    }
    acc += len;
  }
  return vertices.back();
}

bool Geometry1D::connected() const {
  if (vertices.empty()) return false;
  std::vector<char> seen(vertices.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& e : segments)
      for (int side = 0; side < 2; ++side)
        if (e[static_cast<std::size_t>(side)] == v &&
            !seen[e[static_cast<std::size_t>(1 - side)]]) {
          seen[e[static_cast<std::size_t>(1 - side)]] = 1;
          stack.push_back(e[static_cast<std::size_t>(1 - side)]);
        }
  }
  for (char c : seen)
    if (!c) return false;
  return true;
}

Geometry1D generate_geometry(std::uint64_t seed, std::size_t n_segments) {
  check(n_segments >= 1, "generate_geometry: need at least one segment");
  Rng rng(seed);
  Geometry1D g;
  g.seed = seed;

  Point3 root;
  for (auto& c : root) c = rng.uniform(0.2, 0.8);
  g.vertices.push_back(root);

  const std::size_t budget = 1000 * n_segments;
  std::size_t tries = 0;
  while (g.segments.size() < n_segments) {
    check(tries++ < budget, "generate_geometry: rejection budget exceeded");
    const std::size_t parent = rng.index(g.vertices.size());
    Point3 dir{rng.normal(), rng.normal(), rng.normal()};
    const double nrm =
        std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    if (nrm == 0.0) continue;
    const double len = rng.uniform(0.15, 0.4);
    Point3 candidate;
    for (int i = 0; i < 3; ++i)
      candidate[static_cast<std::size_t>(i)] =
          g.vertices[parent][static_cast<std::size_t>(i)] +
          len * dir[static_cast<std::size_t>(i)] / nrm;
    if (!inside_margin(candidate)) continue;
    g.vertices.push_back(candidate);
    g.segments.push_back({parent, g.vertices.size() - 1});
    g.segment_length.push_back(dist3(g.vertices[parent], candidate));
  }
  return g;
}

double point_segment_distance(const Point3& p, const Point3& a,
                              const Point3& b) {
  const double abx = b[0] - a[0], aby = b[1] - a[1], abz = b[2] - a[2];
  const double apx = p[0] - a[0], apy = p[1] - a[1], apz = p[2] - a[2];
  const double ab2 = abx * abx + aby * aby + abz * abz;
  double t = ab2 > 0.0 ? (apx * abx + apy * aby + apz * abz) / ab2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point3 q{a[0] + t * abx, a[1] + t * aby, a[2] + t * abz};
  return dist3(p, q);
}

double distance_to_geometry(const Point3& p, const Geometry1D& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : g.segments)
    best = std::min(best,
                    point_segment_distance(p, g.vertices[e[0]], g.vertices[e[1]]));
  return best;
}

void write_geometry(const Geometry1D& g, const std::filesystem::path& path) {
  nlohmann::json j;
  j["seed"] = g.seed;
  j["vertices"] = g.vertices;
  j["segments"] = g.segments;
  std::ofstream out(path);
  check(out.good(), "cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  check(out.good(), "write failed: " + path.string());
}

Geometry1D read_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open: " + path.string());
  nlohmann::json j;
  in >> j;
  Geometry1D g;
  g.seed = j.at("seed").get<std::uint64_t>();
  g.vertices = j.at("vertices").get<std::vector<Point3>>();
  g.segments =
      j.at("segments").get<std::vector<std::array<std::size_t, 2>>>();
  g.segment_length.reserve(g.segments.size());
  for (const auto& e : g.segments) {
    check(e[0] < g.vertices.size() && e[1] < g.vertices.size(),
          "geometry: segment index out of range");
    g.segment_length.push_back(dist3(g.vertices[e[0]], g.vertices[e[1]]));
  }
  return g;
}

}  // namespace npkry
