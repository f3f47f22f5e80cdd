#include "bodyfit/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bodyfit/error.hpp"
#include "bodyfit/random.hpp"

namespace bodyfit {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

namespace {

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  Eigen::Index pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) total += d2[i];
      pick = -1;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2[i];
          if (d2[i] > 0.0 && acc > target) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {
          // Rounding left the target past the last positive weight.
          for (Eigen::Index i = n - 1; i >= 0; --i) {
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!chosen[i]) {
            pick = i;
            break;
          }
        }
      }
    }
    chosen[pick] = true;
    centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  if (k <= 0 || k > n) {
    throw Error(ErrorKind::InvalidArgument,
                "kmeans: k=" + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }
  Rng rng(options.seed);
  KMeansResult result;
  result.centers = seed_plus_plus(points, k, rng);
  result.assignment.assign(n, 0);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - result.centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      result.assignment[i] = best_c;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += points.row(i);
      ++counts[result.assignment[i]];
    }
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const Eigen::RowVectorXd next = sums.row(c) / counts[c];
      max_shift = std::max(max_shift, (next - result.centers.row(c)).norm());
      result.centers.row(c) = next;
    }
    result.iterations = iter + 1;
    if (max_shift < options.shift_tolerance) break;
  }
  return result;
}

}  // namespace bodyfit
