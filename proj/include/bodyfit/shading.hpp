#pragma once

#include <array>
#include <vector>

#include "bodyfit/camera.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// Real second-order spherical harmonics, orthonormal on the unit sphere.
/// Basis order: 1, y, z, x, xy, yz, 3z^2 - 1, xz, x^2 - y^2.
inline constexpr std::array<double, 9> kShConstants = {
    0.28209479177387814,  // 1 / (2 sqrt(pi))
    0.48860251190291992,  // sqrt(3 / (4 pi))
    0.48860251190291992,
    0.48860251190291992,
    1.09254843059207907,  // sqrt(15 / (4 pi))
    1.09254843059207907,
    0.31539156525252005,  // sqrt(5 / (16 pi))
    1.09254843059207907,
    0.54627421529603953,  // sqrt(15 / (16 pi))
};

using ShVector = std::array<double, 9>;

struct SHLighting {
  ShVector coefficients{};

  double shade(const Vec3& normal) const;
  bool operator==(const SHLighting&) const = default;
};

/// Throws ErrorKind::InvalidArgument unless |normal| = 1 within 1e-6.
ShVector sh_basis(const Vec3& normal);
/// d H_k / d n for the polynomial form of each basis function.
std::array<Vec3, 9> sh_basis_gradient(const Vec3& normal);

struct NormalMap {
  Image<Vec3> normal;  // unit, facing +z, defined on every depth-valid pixel
  Mask valid;          // pixels whose 4-neighborhood lies fully inside the depth mask
};

/// Central differences inside the mask, one-sided where a neighbor is
/// missing: n = normalize(-dz/du * scale, -dz/dv * scale, 1).
NormalMap depth_to_normals(const DepthMap& depth, const WeakPerspectiveCamera& camera);

struct ShadingWeights {
  double photo = 1.0;
  double depth = 2.0;
  double smooth = 4.0;
};

struct ShadingProblem {
  Image<double> image;    // grayscale intensity in [0, 1]
  Image<double> albedo;   // per pixel, in (0, 1]
  DepthMap coarse_depth;
  WeakPerspectiveCamera camera;
  ShadingWeights weights;

  // Throws on shape mismatch or an empty mask.
  void validate() const;
};

inline constexpr double kDefaultAlbedo = 0.6;

ShadingProblem make_shading_problem(Image<double> image, DepthMap coarse_depth, const WeakPerspectiveCamera& camera,
                                    double albedo = kDefaultAlbedo, ShadingWeights weights = {});

struct LightingEstimate {
  SHLighting lighting;
  double rms_residual = 0.0;
  int rank = 0;
  bool rank_deficient = false;
  std::size_t pixel_count = 0;
};

/// Linear least squares for l over the pixels with a complete normal stencil:
/// min_l sum (albedo * sum_k l_k H_k(n_coarse) - I)^2. Rank-deficient systems
/// return the minimum-norm solution and set the flag.
LightingEstimate estimate_lighting(const ShadingProblem& problem);

struct PhotometricLoss {
  double rms = 0.0;
  Image<double> residual;  // albedo * shading - I on valid pixels, 0 elsewhere
  Mask valid;
};

/// Residuals of a candidate depth (sharing the coarse depth's mask).
PhotometricLoss photometric_loss(const Image<double>& depth, const ShadingProblem& problem,
                                 const SHLighting& lighting);

/// E(d) = w_photo * sum r^2 + w_depth * sum (d - d0)^2 + w_smooth * sum (lap(d - d0))^2
/// where lap is the 4-neighbor graph Laplacian restricted to the mask.
double shading_energy(const Image<double>& depth, const ShadingProblem& problem, const SHLighting& lighting);
/// dE/dd per mask pixel (0 off-mask).
Image<double> shading_energy_gradient(const Image<double>& depth, const ShadingProblem& problem,
                                      const SHLighting& lighting);

struct RefineOptions {
  int max_iterations = 10;
  int max_halvings = 8;
  double relative_tolerance = 1e-10;  // stop when an accepted step gains less than this fraction
};

struct RefineResult {
  DepthMap depth;
  std::vector<double> energy_trace;  // initial energy, then one entry per accepted step
  int iterations = 0;
  bool converged = false;  // false means the best iterate is returned after max_iterations
};

/// Damped Gauss-Newton on E(d): normals are linearized per iteration and the
/// step is halved until the energy drops.
RefineResult refine_depth(const ShadingProblem& problem, const SHLighting& lighting, const RefineOptions& options = {});

/// coarse + factor * (refined - coarse) on the coarse mask.
DepthMap magnify_details(const DepthMap& refined, const DepthMap& coarse, double factor = 10.0);

/// albedo * shading of the depth map's normals on its mask, 0 elsewhere.
Image<double> render_shading(const DepthMap& depth, const WeakPerspectiveCamera& camera, const SHLighting& lighting,
                             const Image<double>& albedo);

}  // namespace bodyfit
