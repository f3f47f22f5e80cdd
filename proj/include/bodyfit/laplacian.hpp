#pragma once

#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "bodyfit/mesh.hpp"

namespace bodyfit {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Uniform graph Laplacian with the convention
///   delta_i = (1/deg_i) * sum_{j in N(i)} v_j - v_i
/// i.e. off-diagonal weights 1/deg_i and diagonal -1. Rows sum to zero, so
/// delta coordinates are invariant under translation.
class LaplacianOperator {
 public:
  // Throws ErrorKind::IsolatedVertex if any vertex has no neighbor.
  static LaplacianOperator from_edges(std::size_t num_vertices,
                                      const std::vector<std::pair<int, int>>& edges);

  const SparseMatrix& matrix() const { return matrix_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }

  // One delta coordinate per vertex.
  std::vector<Vec3> apply(const std::vector<Vec3>& positions) const;

 private:
  SparseMatrix matrix_;
  std::vector<std::vector<int>> neighbors_;
};

LaplacianOperator build_laplacian(const TriMesh& mesh);

}  // namespace bodyfit
