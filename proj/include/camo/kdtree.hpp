#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace camo {

// One cloud point reduced to its corner-frame angles (degrees) plus the index
// it came from.
struct AnglePoint {
  double theta = 0.0;
  double phi = 0.0;
  std::size_t payload = 0;
};

struct KdNode {
  AnglePoint point;
  int axis = 0;  // 0 splits on theta, 1 on phi
  int left = -1;
  int right = -1;
};

struct SearchStats {
  std::size_t visited = 0;
  std::size_t payload = 0;
  double distance = 0.0;  // Euclidean in (theta, phi) degrees
  double theta = 0.0;     // matched point
  double phi = 0.0;
};

// Depth of a lower-median-built tree over n distinct-coordinate points:
// ceil(log2(n + 1)).
inline int balanced_depth(std::size_t n) {
  return static_cast<int>(std::bit_width(n));
}

// Static 2-d tree, lower-median construction, axes alternating theta then
// phi. Left descendants are strictly below the split coordinate, right ones
// at or above it; coordinate ties resolve by payload so the tree is a pure
// function of its input set.
class KdTree2 {
 public:
  static KdTree2 build(std::vector<AnglePoint> points);

  // Exact Euclidean nearest neighbor; distance ties go to the smaller
  // payload. visited counts every node whose distance was evaluated.
  SearchStats nn_search(double theta, double phi) const;

  std::size_t size() const { return nodes_.size(); }
  int depth() const { return depth_; }
  int root() const { return root_; }
  const std::vector<KdNode>& nodes() const { return nodes_; }

 private:
  std::vector<KdNode> nodes_;
  int root_ = -1;
  int depth_ = 0;
};

struct VisitedProfile {
  std::size_t min = 0;
  std::size_t median = 0;
  std::size_t max = 0;
};

VisitedProfile visited_profile(
    const KdTree2& tree, const std::vector<std::pair<double, double>>& queries);

}  // namespace camo
