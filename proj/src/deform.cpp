#include "bodyfit/deform.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "bodyfit/error.hpp"

namespace bodyfit {
namespace {

using ColSparse = Eigen::SparseMatrix<double>;

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void check_components(const DeformProblem& problem) {
  const auto& nb = problem.laplacian().neighbors();
  const int n = static_cast<int>(nb.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i) {
    for (int j : nb[i]) {
      const int a = find_root(parent, i);
      const int b = find_root(parent, j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<bool> anchored(n, false);
  for (const auto& c : problem.constraints()) anchored[find_root(parent, c.vertex_index)] = true;
  for (int i = 0; i < n; ++i) {
    const int root = find_root(parent, i);
    if (!anchored[root]) {
      int size = 0;
      for (int j = 0; j < n; ++j) size += find_root(parent, j) == root;
      throw Error(ErrorKind::Singular, "connected component containing vertex " + std::to_string(root) + " (" +
                                           std::to_string(size) + " vertices) has no handle constraint");
    }
  }
}

double relative_residual(const ColSparse& a, const Eigen::MatrixX3d& x, const Eigen::MatrixX3d& b) {
  const double r = (a * x - b).norm();
  const double bn = b.norm();
  return bn > 0.0 ? r / bn : r;
}

}  // namespace

DeformProblem::DeformProblem(std::vector<Vec3> positions, LaplacianOperator laplacian,
                             std::vector<HandleConstraint> constraints, double solver_tolerance)
    : positions_(std::move(positions)),
      laplacian_(std::move(laplacian)),
      constraints_(std::move(constraints)),
      solver_tolerance_(solver_tolerance) {
  if (positions_.size() != laplacian_.size()) {
    throw Error(ErrorKind::SizeMismatch, "deform: Laplacian size does not match vertex count");
  }
  if (constraints_.empty()) {
    throw Error(ErrorKind::NoConstraints, "deform: at least one handle constraint is required");
  }
  for (const auto& c : constraints_) {
    if (c.vertex_index < 0 || static_cast<std::size_t>(c.vertex_index) >= positions_.size()) {
      throw Error(ErrorKind::IndexOutOfRange, "deform: constraint vertex " + std::to_string(c.vertex_index) +
                                                  " out of range");
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorKind::InvalidArgument, "deform: constraint weights must be positive");
    }
    if (!c.target.allFinite()) throw Error(ErrorKind::InvalidArgument, "deform: constraint target is not finite");
  }
}

DeformProblem DeformProblem::from_mesh(const TriMesh& mesh, std::vector<HandleConstraint> constraints,
                                       double solver_tolerance) {
  return DeformProblem(mesh.vertices(), build_laplacian(mesh), std::move(constraints), solver_tolerance);
}

ColSparse DeformProblem::normal_matrix() const {
  const ColSparse lap = laplacian_.matrix();
  ColSparse a = lap.transpose() * lap;
  ColSparse w(a.rows(), a.cols());
  std::vector<Eigen::Triplet<double>> diag;
  diag.reserve(constraints_.size());
  for (const auto& c : constraints_) diag.emplace_back(c.vertex_index, c.vertex_index, c.weight * c.weight);
  w.setFromTriplets(diag.begin(), diag.end());  // duplicates are summed
  a += w;
  a.makeCompressed();
  return a;
}

Eigen::MatrixX3d DeformProblem::normal_rhs() const {
  const Eigen::Index n = static_cast<Eigen::Index>(positions_.size());
  Eigen::MatrixX3d p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) = positions_[i].transpose();
  const ColSparse lap = laplacian_.matrix();
  const Eigen::MatrixX3d delta = lap * p;
  Eigen::MatrixX3d b = lap.transpose() * delta;
  for (const auto& c : constraints_) b.row(c.vertex_index) += c.weight * c.weight * c.target.transpose();
  return b;
}

double DeformProblem::objective(const std::vector<Vec3>& x) const {
  const auto delta = laplacian_.apply(positions_);
  const auto lx = laplacian_.apply(x);
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) e += (lx[i] - delta[i]).squaredNorm();
  for (const auto& c : constraints_) e += c.weight * c.weight * (x[c.vertex_index] - c.target).squaredNorm();
  return e;
}

DeformSolution solve(const DeformProblem& problem) {
  check_components(problem);
  const ColSparse a = problem.normal_matrix();
  const Eigen::MatrixX3d b = problem.normal_rhs();

  DeformSolution out;
  Eigen::MatrixX3d x;
  Eigen::SimplicialLDLT<ColSparse> ldlt(a);
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    x = ldlt.solve(b);
    ok = ldlt.info() == Eigen::Success && x.allFinite();
  }
  out.relative_residual = ok ? relative_residual(a, x, b) : INFINITY;
  if (!ok || out.relative_residual > problem.solver_tolerance()) {
    Eigen::ConjugateGradient<ColSparse, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg(a);
    cg.setTolerance(1e-10);
    cg.setMaxIterations(static_cast<Eigen::Index>(20 * a.rows() + 1000));
    Eigen::MatrixX3d guess(b.rows(), 3);
    for (Eigen::Index i = 0; i < b.rows(); ++i) guess.row(i) = problem.positions()[i].transpose();
    x = cg.solveWithGuess(b, guess);
    out.used_fallback = true;
    out.relative_residual = relative_residual(a, x, b);
    if (!x.allFinite() || out.relative_residual > problem.solver_tolerance()) {
      throw Error(ErrorKind::Singular, "deform: normal equations did not reach tolerance (relative residual " +
                                           std::to_string(out.relative_residual) + ")");
    }
  }
  out.positions.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.positions[i] = x.row(i).transpose();
  return out;
}

TriMesh solve_deform(const TriMesh& mesh, std::vector<HandleConstraint> constraints, double solver_tolerance) {
  const auto problem = DeformProblem::from_mesh(mesh, std::move(constraints), solver_tolerance);
  return mesh.with_vertices(solve(problem).positions);
}

TriMesh deform_along_normals(const TriMesh& mesh, const std::vector<AnchorHandle>& anchors, double weight) {
  std::vector<HandleConstraint> constraints;
  for (const auto& a : anchors) {
    if (!a.active) continue;
    if (!std::isfinite(a.movement)) throw Error(ErrorKind::InvalidArgument, "anchor movement is not finite");
    const Vec3& p = mesh.vertices().at(a.vertex_index);
    constraints.push_back({a.vertex_index, p + a.movement * a.constraint_normal, weight});
  }
  if (constraints.empty()) return mesh;
  return solve_deform(mesh, std::move(constraints));
}

void write_matrix_market(const DeformProblem& problem, const std::filesystem::path& path) {
  const ColSparse a = problem.normal_matrix();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int col = 0; col < a.outerSize(); ++col) {
    for (ColSparse::InnerIterator it(a, col); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace bodyfit
