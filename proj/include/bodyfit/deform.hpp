#pragma once

#include <filesystem>
#include <vector>

#include "bodyfit/handles.hpp"
#include "bodyfit/laplacian.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

inline constexpr double kJointHandleWeight = 10.0;
inline constexpr double kAnchorHandleWeight = 1.0;

struct HandleConstraint {
  int vertex_index = 0;
  Vec3 target = Vec3::Zero();
  double weight = 1.0;
};

/// Least-squares Laplacian edit:
///
///   min_x  sum_i |(L x)_i - delta_i|^2 + sum_c w_c^2 |x_{v_c} - target_c|^2
///
/// where delta = L * positions is taken from the positions the problem was
/// built with. The three coordinate axes share one factorization of the
/// normal equations (L^T L + W^2) x = L^T delta + W^2 t.
class DeformProblem {
 public:
  // Validates constraints (weight > 0, index in range, at least one).
  DeformProblem(std::vector<Vec3> positions, LaplacianOperator laplacian, std::vector<HandleConstraint> constraints,
                double solver_tolerance = 1e-8);
  static DeformProblem from_mesh(const TriMesh& mesh, std::vector<HandleConstraint> constraints,
                                 double solver_tolerance = 1e-8);

  const std::vector<Vec3>& positions() const { return positions_; }
  const LaplacianOperator& laplacian() const { return laplacian_; }
  const std::vector<HandleConstraint>& constraints() const { return constraints_; }
  double solver_tolerance() const { return solver_tolerance_; }

  // Normal-equation matrix and right-hand side (one column per axis).
  Eigen::SparseMatrix<double> normal_matrix() const;
  Eigen::MatrixX3d normal_rhs() const;

  // The least-squares objective evaluated at `x`.
  double objective(const std::vector<Vec3>& x) const;

 private:
  std::vector<Vec3> positions_;
  LaplacianOperator laplacian_;
  std::vector<HandleConstraint> constraints_;
  double solver_tolerance_;
};

struct DeformSolution {
  std::vector<Vec3> positions;
  double relative_residual = 0.0;  // ||A x - b|| / ||b|| of the normal equations
  bool used_fallback = false;      // conjugate gradient replaced the direct solve
};

/// Throws ErrorKind::Singular naming the first connected component that has
/// no constraint, or when neither the direct nor the iterative solve reaches
/// the problem's tolerance.
DeformSolution solve(const DeformProblem& problem);

/// Deforms `mesh` (delta coordinates taken from its current positions).
TriMesh solve_deform(const TriMesh& mesh, std::vector<HandleConstraint> constraints, double solver_tolerance = 1e-8);

/// Active anchors pull their vertex to position + movement * constraint_normal;
/// inactive anchors are ordinary vertices. With no active anchor the input is
/// returned unchanged.
TriMesh deform_along_normals(const TriMesh& mesh, const std::vector<AnchorHandle>& anchors,
                             double weight = kAnchorHandleWeight);

/// Writes the normal-equation matrix in Matrix Market coordinate format.
void write_matrix_market(const DeformProblem& problem, const std::filesystem::path& path);

}  // namespace bodyfit
