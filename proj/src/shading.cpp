#include "bodyfit/shading.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "bodyfit/error.hpp"

namespace bodyfit {

double SHLighting::shade(const Vec3& normal) const {
  const ShVector h = sh_basis(normal);
  double s = 0.0;
  for (int k = 0; k < 9; ++k) s += coefficients[k] * h[k];
  return s;
}

ShVector sh_basis(const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-6) throw Error(ErrorKind::InvalidArgument, "sh_basis: normal is not unit length");
  const double x = n.x();
  const double y = n.y();
  const double z = n.z();
  const auto& c = kShConstants;
  return {c[0],         c[1] * y,         c[2] * z,     c[3] * x, c[4] * x * y,
          c[5] * y * z, c[6] * (3 * z * z - 1), c[7] * x * z, c[8] * (x * x - y * y)};
}

std::array<Vec3, 9> sh_basis_gradient(const Vec3& n) {
  const double x = n.x();
  const double y = n.y();
  const double z = n.z();
  const auto& c = kShConstants;
  return {Vec3::Zero(),
          Vec3(0, c[1], 0),
          Vec3(0, 0, c[2]),
          Vec3(c[3], 0, 0),
          Vec3(c[4] * y, c[4] * x, 0),
          Vec3(0, c[5] * z, c[5] * y),
          Vec3(0, 0, 6 * c[6] * z),
          Vec3(c[7] * z, 0, c[7] * x),
          Vec3(2 * c[8] * x, -2 * c[8] * y, 0)};
}

namespace {

bool inside(const Mask& m, int x, int y) { return m.contains(x, y) && m(x, y) != 0; }

// Gradient of depth in pixel units at (x, y); central where both sides are in
// the mask, one-sided otherwise, zero when neither.
Vec2 depth_gradient(const Image<double>& d, const Mask& m, int x, int y) {
  auto axis = [&](int dx, int dy) {
    const bool fwd = inside(m, x + dx, y + dy);
    const bool bwd = inside(m, x - dx, y - dy);
    if (fwd && bwd) return 0.5 * (d(x + dx, y + dy) - d(x - dx, y - dy));
    if (fwd) return d(x + dx, y + dy) - d(x, y);
    if (bwd) return d(x, y) - d(x - dx, y - dy);
    return 0.0;
  };
  return {axis(1, 0), axis(0, 1)};
}

Vec3 normal_from_gradient(const Vec2& g, double scale) { return Vec3(-g.x() * scale, -g.y() * scale, 1.0).normalized(); }

bool complete_stencil(const Mask& m, int x, int y) {
  return inside(m, x, y) && inside(m, x - 1, y) && inside(m, x + 1, y) && inside(m, x, y - 1) && inside(m, x, y + 1);
}

// Per-problem pixel indexing over the depth mask.
struct PixelIndex {
  Image<int> id;
  std::vector<std::pair<int, int>> pixels;

  explicit PixelIndex(const Mask& mask) : id(mask.width(), mask.height(), -1) {
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (mask(x, y)) {
          id(x, y) = static_cast<int>(pixels.size());
          pixels.emplace_back(x, y);
        }
      }
    }
  }
};

// Photometric residual at a complete-stencil pixel together with its
// derivatives wrt the four neighbor depths (left, right, up, down).
struct PhotoTerm {
  double residual;
  std::array<double, 4> d_neighbors;
};

PhotoTerm photo_term(const Image<double>& d, const ShadingProblem& pb, const SHLighting& light, int x, int y) {
  const double s = pb.camera.scale;
  const double gx = 0.5 * (d(x + 1, y) - d(x - 1, y));
  const double gy = 0.5 * (d(x, y + 1) - d(x, y - 1));
  const Vec3 m(-gx * s, -gy * s, 1.0);
  const double len = m.norm();
  const Vec3 n = m / len;
  const double rho = pb.albedo(x, y);
  const ShVector h = sh_basis(n);
  const auto dh = sh_basis_gradient(n);
  double shade = 0.0;
  Vec3 dshade = Vec3::Zero();
  for (int k = 0; k < 9; ++k) {
    shade += light.coefficients[k] * h[k];
    dshade += light.coefficients[k] * dh[k];
  }
  // d r / d m through the normalization n = m / |m|.
  const Vec3 dr_dm = rho * (dshade - n * n.dot(dshade)) / len;
  PhotoTerm t;
  t.residual = rho * shade - pb.image(x, y);
  t.d_neighbors = {dr_dm.x() * 0.5 * s, -dr_dm.x() * 0.5 * s, dr_dm.y() * 0.5 * s, -dr_dm.y() * 0.5 * s};
  return t;
}

}  // namespace

NormalMap depth_to_normals(const DepthMap& depth, const WeakPerspectiveCamera& camera) {
  const int w = depth.width();
  const int h = depth.height();
  NormalMap out{Image<Vec3>(w, h, Vec3::UnitZ()), Mask(w, h, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      out.normal(x, y) = normal_from_gradient(depth_gradient(depth.depth, depth.valid, x, y), camera.scale);
      out.valid(x, y) = complete_stencil(depth.valid, x, y);
    }
  }
  return out;
}

void ShadingProblem::validate() const {
  if (!image.same_shape(albedo) || !image.same_shape(coarse_depth.depth) || !image.same_shape(coarse_depth.valid)) {
    throw Error(ErrorKind::SizeMismatch, "shading: image, albedo and depth must share dimensions");
  }
  if (image.width() != camera.width || image.height() != camera.height) {
    throw Error(ErrorKind::SizeMismatch, "shading: maps do not match the camera image size");
  }
  if (count_set(coarse_depth.valid) == 0) throw Error(ErrorKind::InvalidArgument, "shading: empty depth mask");
}

ShadingProblem make_shading_problem(Image<double> image, DepthMap coarse_depth, const WeakPerspectiveCamera& camera,
                                    double albedo, ShadingWeights weights) {
  ShadingProblem pb{std::move(image), Image<double>(), std::move(coarse_depth), camera, weights};
  pb.albedo = Image<double>(pb.image.width(), pb.image.height(), albedo);
  pb.validate();
  return pb;
}

LightingEstimate estimate_lighting(const ShadingProblem& problem) {
  problem.validate();
  const NormalMap normals = depth_to_normals(problem.coarse_depth, problem.camera);
  std::vector<std::pair<int, int>> px;
  for (int y = 0; y < normals.valid.height(); ++y) {
    for (int x = 0; x < normals.valid.width(); ++x) {
      if (normals.valid(x, y)) px.emplace_back(x, y);
    }
  }
  if (px.size() < 9) {
    throw Error(ErrorKind::InvalidArgument,
                "estimate_lighting: need at least 9 pixels with valid normals, have " + std::to_string(px.size()));
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(px.size()), 9);
  Eigen::VectorXd b(static_cast<Eigen::Index>(px.size()));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto [x, y] = px[i];
    const ShVector h = sh_basis(normals.normal(x, y));
    for (int k = 0; k < 9; ++k) a(static_cast<Eigen::Index>(i), k) = problem.albedo(x, y) * h[k];
    b(static_cast<Eigen::Index>(i)) = problem.image(x, y);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  const Eigen::VectorXd l = cod.solve(b);

  LightingEstimate est;
  for (int k = 0; k < 9; ++k) est.lighting.coefficients[k] = l(k);
  est.rank = static_cast<int>(cod.rank());
  est.rank_deficient = est.rank < 9;
  est.pixel_count = px.size();
  est.rms_residual = std::sqrt((a * l - b).squaredNorm() / static_cast<double>(px.size()));
  return est;
}

PhotometricLoss photometric_loss(const Image<double>& depth, const ShadingProblem& problem,
                                 const SHLighting& lighting) {
  problem.validate();
  const Mask& mask = problem.coarse_depth.valid;
  PhotometricLoss out{0.0, Image<double>(mask.width(), mask.height(), 0.0), Mask(mask.width(), mask.height(), 0)};
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!complete_stencil(mask, x, y)) continue;
      const Vec3 nrm = normal_from_gradient(depth_gradient(depth, mask, x, y), problem.camera.scale);
      const double r = problem.albedo(x, y) * lighting.shade(nrm) - problem.image(x, y);
      out.residual(x, y) = r;
      out.valid(x, y) = 1;
      sum += r * r;
      ++n;
    }
  }
  out.rms = n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  return out;
}

namespace {

// 4-neighbor Laplacian of e = depth - coarse, restricted to the mask.
double masked_laplacian(const Image<double>& e, const Mask& m, int x, int y) {
  double acc = 0.0;
  const int nx[4] = {x - 1, x + 1, x, x};
  const int ny[4] = {y, y, y - 1, y + 1};
  for (int k = 0; k < 4; ++k) {
    if (inside(m, nx[k], ny[k])) acc += e(nx[k], ny[k]) - e(x, y);
  }
  return acc;
}

Image<double> offset_from_coarse(const Image<double>& depth, const DepthMap& coarse) {
  Image<double> e(depth.width(), depth.height(), 0.0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (coarse.valid(x, y)) e(x, y) = depth(x, y) - coarse.depth(x, y);
    }
  }
  return e;
}

}  // namespace

double shading_energy(const Image<double>& depth, const ShadingProblem& pb, const SHLighting& lighting) {
  const Mask& m = pb.coarse_depth.valid;
  const Image<double> e = offset_from_coarse(depth, pb.coarse_depth);
  double photo = 0.0;
  double fid = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      if (complete_stencil(m, x, y)) {
        const double r = photo_term(depth, pb, lighting, x, y).residual;
        photo += r * r;
      }
      fid += e(x, y) * e(x, y);
      const double lap = masked_laplacian(e, m, x, y);
      smooth += lap * lap;
    }
  }
  return pb.weights.photo * photo + pb.weights.depth * fid + pb.weights.smooth * smooth;
}

namespace {

struct Linearization {
  Eigen::SparseMatrix<double> jacobian;  // rows: weighted residuals, cols: mask pixels
  Eigen::VectorXd residual;
};

Linearization linearize(const Image<double>& depth, const ShadingProblem& pb, const SHLighting& lighting,
                        const PixelIndex& index) {
  const Mask& m = pb.coarse_depth.valid;
  const Image<double> e = offset_from_coarse(depth, pb.coarse_depth);
  const double wp = std::sqrt(pb.weights.photo);
  const double wd = std::sqrt(pb.weights.depth);
  const double ws = std::sqrt(pb.weights.smooth);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> res;
  int row = 0;
  for (const auto& [x, y] : index.pixels) {
    if (complete_stencil(m, x, y)) {
      const PhotoTerm t = photo_term(depth, pb, lighting, x, y);
      const int cols[4] = {index.id(x - 1, y), index.id(x + 1, y), index.id(x, y - 1), index.id(x, y + 1)};
      for (int k = 0; k < 4; ++k) trip.emplace_back(row, cols[k], wp * t.d_neighbors[k]);
      res.push_back(wp * t.residual);
      ++row;
    }
  }
  for (const auto& [x, y] : index.pixels) {
    trip.emplace_back(row, index.id(x, y), wd);
    res.push_back(wd * e(x, y));
    ++row;
  }
  for (const auto& [x, y] : index.pixels) {
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    int degree = 0;
    for (int k = 0; k < 4; ++k) {
      if (inside(m, nx[k], ny[k])) {
        trip.emplace_back(row, index.id(nx[k], ny[k]), ws);
        ++degree;
      }
    }
    trip.emplace_back(row, index.id(x, y), -ws * degree);
    res.push_back(ws * masked_laplacian(e, m, x, y));
    ++row;
  }
  Linearization lin;
  lin.jacobian.resize(row, static_cast<Eigen::Index>(index.pixels.size()));
  lin.jacobian.setFromTriplets(trip.begin(), trip.end());
  lin.residual = Eigen::Map<Eigen::VectorXd>(res.data(), static_cast<Eigen::Index>(res.size()));
  return lin;
}

}  // namespace

Image<double> shading_energy_gradient(const Image<double>& depth, const ShadingProblem& pb,
                                      const SHLighting& lighting) {
  const PixelIndex index(pb.coarse_depth.valid);
  const Linearization lin = linearize(depth, pb, lighting, index);
  const Eigen::VectorXd g = 2.0 * (lin.jacobian.transpose() * lin.residual);
  Image<double> out(depth.width(), depth.height(), 0.0);
  for (std::size_t i = 0; i < index.pixels.size(); ++i) {
    const auto [x, y] = index.pixels[i];
    out(x, y) = g(static_cast<Eigen::Index>(i));
  }
  return out;
}

RefineResult refine_depth(const ShadingProblem& problem, const SHLighting& lighting, const RefineOptions& options) {
  problem.validate();
  const auto& w = problem.weights;
  if (!(w.photo > 0.0) || !(w.depth > 0.0) || !(w.smooth > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "refine_depth: energy weights must be positive");
  }
  const PixelIndex index(problem.coarse_depth.valid);
  Image<double> current = problem.coarse_depth.depth;
  for (int y = 0; y < current.height(); ++y) {
    for (int x = 0; x < current.width(); ++x) {
      if (!problem.coarse_depth.valid(x, y)) current(x, y) = 0.0;
    }
  }

  RefineResult out;
  double energy = shading_energy(current, problem, lighting);
  out.energy_trace.push_back(energy);
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Linearization lin = linearize(current, problem, lighting, index);
    const Eigen::VectorXd grad = lin.jacobian.transpose() * lin.residual;
    if (grad.norm() == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::SparseMatrix<double> normal = lin.jacobian.transpose() * lin.jacobian;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = ldlt.solve(-grad);

    double alpha = 1.0;
    bool accepted = false;
    Image<double> trial = current;
    for (int half = 0; half <= options.max_halvings; ++half, alpha *= 0.5) {
      for (std::size_t i = 0; i < index.pixels.size(); ++i) {
        const auto [x, y] = index.pixels[i];
        trial(x, y) = current(x, y) + alpha * step(static_cast<Eigen::Index>(i));
      }
      const double e = shading_energy(trial, problem, lighting);
      if (std::isfinite(e) && e < energy) {
        const double gain = energy - e;
        current = trial;
        energy = e;
        out.energy_trace.push_back(e);
        accepted = true;
        if (gain <= options.relative_tolerance * std::max(e, 1e-300)) out.converged = true;
        break;
      }
    }
    if (!accepted) {
      // No descent along the Gauss-Newton direction: a stationary point up to rounding.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.depth.depth = current;
  out.depth.valid = problem.coarse_depth.valid;
  for (int y = 0; y < current.height(); ++y) {
    for (int x = 0; x < current.width(); ++x) {
      if (!out.depth.valid(x, y)) out.depth.depth(x, y) = -INFINITY;
    }
  }
  return out;
}

DepthMap magnify_details(const DepthMap& refined, const DepthMap& coarse, double factor) {
  if (!refined.depth.same_shape(coarse.depth)) throw Error(ErrorKind::SizeMismatch, "magnify_details: shapes differ");
  if (refined.valid != coarse.valid) throw Error(ErrorKind::InvalidArgument, "magnify_details: masks differ");
  DepthMap out = coarse;
  for (std::size_t i = 0; i < out.depth.size(); ++i) {
    if (!coarse.valid.data()[i]) continue;
    out.depth.data()[i] = coarse.depth.data()[i] + factor * (refined.depth.data()[i] - coarse.depth.data()[i]);
  }
  return out;
}

Image<double> render_shading(const DepthMap& depth, const WeakPerspectiveCamera& camera, const SHLighting& lighting,
                             const Image<double>& albedo) {
  const NormalMap normals = depth_to_normals(depth, camera);
  Image<double> out(depth.width(), depth.height(), 0.0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) out(x, y) = albedo(x, y) * lighting.shade(normals.normal(x, y));
    }
  }
  return out;
}

}  // namespace bodyfit
