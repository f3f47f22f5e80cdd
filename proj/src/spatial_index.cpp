#include "bodyfit/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bodyfit/error.hpp"

namespace bodyfit {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorKind::InvalidArgument, "kd-tree needs at least one point");
  std::vector<int> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree::build(std::vector<int>& order, int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
    const double pa = points_[a][axis];
    const double pb = points_[b][axis];
    return pa < pb || (pa == pb && a < b);
  });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({order[mid], axis, -1, -1});
  const int left = build(order, begin, mid, depth + 1);
  const int right = build(order, mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const Vec3& q, Hit& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  const double d2 = (p - q).squaredNorm();
  if (d2 < best.squared_distance || (d2 == best.squared_distance && n.point < best.index)) {
    best = {n.point, d2};
  }
  const double diff = q[n.axis] - p[n.axis];
  const int near = diff <= 0.0 ? n.left : n.right;
  const int far = diff <= 0.0 ? n.right : n.left;
  search(near, q, best);
  // <= so that equidistant points on the far side are still considered.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  Hit best{-1, std::numeric_limits<double>::infinity()};
  search(root_, query, best);
  return best;
}

}  // namespace bodyfit
