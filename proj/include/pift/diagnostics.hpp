#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pift/basis.hpp"
#include "pift/geometry.hpp"

namespace pift {

/// Pointwise statistics of the fields phi(x; theta_i) over chain rows.
struct FieldSummary {
  std::vector<Point> grid;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population standard deviation
  Eigen::VectorXd q025;
  Eigen::VectorXd q975;

  /// Columns x,[y,]mean,std,q025,q975.
  void write_csv(const std::string& path, int dim) const;
};

/// Throws std::invalid_argument on an empty chain.
FieldSummary summarize_field(const Eigen::MatrixXd& samples, const FieldBasis& basis,
                             const std::vector<Point>& grid);

/// Quantile with linear interpolation between order statistics.
double quantile(Eigen::VectorXd values, double p);
double median(const Eigen::VectorXd& values);

/// Uniform grid of n points on [a, b].
std::vector<Point> grid_1d(double a, double b, int n);
/// Tensor grid of nx * ny points over a box, x varying fastest.
std::vector<Point> grid_2d(const Domain& box, int nx, int ny);

/// Two-component Gaussian mixture with diagonal covariances.
struct GmmFit {
  Eigen::Vector2d weights;
  Eigen::MatrixXd means;      // 2 x d
  Eigen::MatrixXd variances;  // 2 x d
  Eigen::MatrixXd responsibilities;  // n x 2
  std::vector<double> log_likelihood;  // per EM iteration
  int iterations = 0;
  bool converged = false;

  /// Component responsibilities for new samples (n x 2).
  Eigen::MatrixXd responsibilities_for(const Eigen::MatrixXd& samples) const;
  nlohmann::json to_json() const;
};

/// EM with a seeded k-means++ start. A component whose variance drops below
/// 1e-12 triggers one re-initialization, then std::runtime_error.
GmmFit fit_gmm2(const Eigen::MatrixXd& samples, int max_iters = 500, double tol = 1e-10,
                std::uint64_t seed = 0);

struct ModeSplit {
  Eigen::MatrixXd first;   // rows assigned to component 0
  Eigen::MatrixXd second;  // rows assigned to component 1
  std::vector<int> labels;
};

/// Assigns each row to its most responsible component.
ModeSplit split_modes(const Eigen::MatrixXd& samples, const GmmFit& fit);

/// Spearman rank correlation of (gamma, value) pairs; ties in value get
/// average ranks. Throws on fewer than three pairs or repeated gamma.
double monotone_trend(const std::vector<std::pair<double, double>>& pairs);

}  // namespace pift
