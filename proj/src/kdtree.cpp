#include "camo/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace camo {
namespace {

double coord(const AnglePoint& p, int axis) { return axis == 0 ? p.theta : p.phi; }

}  // namespace

KdTree2 KdTree2::build(std::vector<AnglePoint> points) {
  if (points.empty()) {
    throw std::invalid_argument("KdTree2::build: no points");
  }
  for (const AnglePoint& p : points) {
    if (!std::isfinite(p.theta) || !std::isfinite(p.phi)) {
      throw std::invalid_argument("KdTree2::build: non-finite angle");
    }
  }
  KdTree2 tree;
  tree.nodes_.reserve(points.size());

  // Builds [lo, hi) and returns the node index.
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi, int axis,
                 int level) -> int {
    if (lo >= hi) return -1;
    std::sort(points.begin() + static_cast<std::ptrdiff_t>(lo),
              points.begin() + static_cast<std::ptrdiff_t>(hi),
              [axis](const AnglePoint& a, const AnglePoint& b) {
                const double ca = coord(a, axis);
                const double cb = coord(b, axis);
                return ca < cb || (ca == cb && a.payload < b.payload);
              });
    std::size_t m = lo + (hi - lo - 1) / 2;
    // Everything left of the node must be strictly below it on this axis, so
    // back the split off to the first element of an equal-coordinate run.
    while (m > lo && coord(points[m - 1], axis) == coord(points[m], axis)) --m;
    const int node_index = static_cast<int>(tree.nodes_.size());
    tree.nodes_.push_back(KdNode{points[m], axis, -1, -1});
    tree.depth_ = std::max(tree.depth_, level + 1);
    const int next_axis = 1 - axis;
    const int left = self(self, lo, m, next_axis, level + 1);
    const int right = self(self, m + 1, hi, next_axis, level + 1);
    tree.nodes_[static_cast<std::size_t>(node_index)].left = left;
    tree.nodes_[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  };
  tree.root_ = rec(rec, 0, points.size(), 0, 0);
  return tree;
}

SearchStats KdTree2::nn_search(double theta, double phi) const {
  if (nodes_.empty()) {
    throw std::logic_error("KdTree2::nn_search: empty tree");
  }
  SearchStats stats;
  double best2 = std::numeric_limits<double>::infinity();
  std::size_t best_payload = 0;
  double best_theta = 0.0;
  double best_phi = 0.0;

  auto rec = [&](auto&& self, int index) -> void {
    const KdNode& node = nodes_[static_cast<std::size_t>(index)];
    const double dt = node.point.theta - theta;
    const double dp = node.point.phi - phi;
    const double d2 = dt * dt + dp * dp;
    ++stats.visited;
    if (d2 < best2 || (d2 == best2 && node.point.payload < best_payload)) {
      best2 = d2;
      best_payload = node.point.payload;
      best_theta = node.point.theta;
      best_phi = node.point.phi;
    }
    const double diff =
        (node.axis == 0 ? theta : phi) - coord(node.point, node.axis);
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    if (near != -1) self(self, near);
    if (far != -1 && diff * diff <= best2) self(self, far);
  };
  rec(rec, root_);

  stats.payload = best_payload;
  stats.distance = std::sqrt(best2);
  stats.theta = best_theta;
  stats.phi = best_phi;
  return stats;
}

VisitedProfile visited_profile(
    const KdTree2& tree, const std::vector<std::pair<double, double>>& queries) {
  if (queries.empty()) {
    throw std::invalid_argument("visited_profile: no queries");
  }
  std::vector<std::size_t> visited;
  visited.reserve(queries.size());
  for (const auto& [theta, phi] : queries) {
    visited.push_back(tree.nn_search(theta, phi).visited);
  }
  std::sort(visited.begin(), visited.end());
  VisitedProfile profile;
  profile.min = visited.front();
  profile.median = visited[(visited.size() - 1) / 2];
  profile.max = visited.back();
  return profile;
}

}  // namespace camo
