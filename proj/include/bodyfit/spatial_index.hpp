#pragma once

#include <vector>

#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// Static 3D kd-tree for exact nearest-neighbor queries.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  struct Hit {
    int index = -1;
    double squared_distance = 0.0;
  };
  // Exact nearest point; on equal distances the lowest index wins.
  Hit nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int point = -1;  // index into points_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<int>& order, int begin, int end, int depth);
  void search(int node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace bodyfit
