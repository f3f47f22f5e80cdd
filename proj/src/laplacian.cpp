#include "bodyfit/laplacian.hpp"

#include <algorithm>
#include <string>

#include "bodyfit/error.hpp"

namespace bodyfit {

LaplacianOperator LaplacianOperator::from_edges(std::size_t num_vertices,
                                                const std::vector<std::pair<int, int>>& edges) {
  LaplacianOperator op;
  op.neighbors_.assign(num_vertices, {});
  for (const auto& [a, b] : edges) {
    op.neighbors_[a].push_back(b);
    op.neighbors_[b].push_back(a);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(num_vertices + 2 * edges.size());
  for (std::size_t i = 0; i < num_vertices; ++i) {
    auto& nb = op.neighbors_[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (nb.empty()) {
      throw Error(ErrorKind::IsolatedVertex,
                  "vertex " + std::to_string(i) + " has no neighbors; cannot form a delta coordinate");
    }
    const double w = 1.0 / static_cast<double>(nb.size());
    const int row = static_cast<int>(i);
    triplets.emplace_back(row, row, -1.0);
    for (int j : nb) triplets.emplace_back(row, j, w);
  }
  const int n = static_cast<int>(num_vertices);
  op.matrix_.resize(n, n);
  op.matrix_.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

std::vector<Vec3> LaplacianOperator::apply(const std::vector<Vec3>& positions) const {
  if (positions.size() != size()) {
    throw Error(ErrorKind::SizeMismatch, "Laplacian size does not match position count");
  }
  std::vector<Vec3> delta(positions.size(), Vec3::Zero());
  for (int row = 0; row < matrix_.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(matrix_, row); it; ++it) {
      delta[row] += it.value() * positions[it.col()];
    }
  }
  return delta;
}

LaplacianOperator build_laplacian(const TriMesh& mesh) {
  return LaplacianOperator::from_edges(mesh.num_vertices(), unique_edges(mesh));
}

}  // namespace bodyfit
