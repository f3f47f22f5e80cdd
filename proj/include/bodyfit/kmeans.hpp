#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bodyfit {

struct KMeansOptions {
  int max_iterations = 300;
  double shift_tolerance = 1e-7;  // stop once no center moves farther than this
  std::uint64_t seed = 0;
};

struct KMeansResult {
  Eigen::MatrixXd centers;       // k x d
  std::vector<int> assignment;   // per point, ties go to the lowest center index
  int iterations = 0;
};

/// Lloyd iterations from a k-means++ seeding. Points are the rows of
/// `points`. Empty clusters keep their previous center. Deterministic for a
/// given seed.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options = {});

}  // namespace bodyfit
