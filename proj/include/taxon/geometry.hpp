#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace taxon::geometry {

struct UmapParams {
  int neighbors = 15;
  double min_dist = 0.1;
  int epochs = 200;
  std::uint64_t seed = 42;
};

struct Layout2D {
  Eigen::MatrixXd coords;  // n x 2, row-aligned to input
  UmapParams params;
};

// UMAP-style projection: exact cosine kNN, fuzzy simplicial set with
// per-point bandwidth calibration, symmetrization, spectral initialization,
// seeded sequential SGD on the cross-entropy objective. Deterministic.
Layout2D project_2d(const Eigen::MatrixXd& X, const UmapParams& params);

// Weiszfeld iteration with the Vardi-Zhang step when the iterate lands on a
// data point. tol 1e-9, max 1000 iterations.
Eigen::Vector2d geometric_median(const Eigen::MatrixXd& points);

double median_objective(const Eigen::MatrixXd& points,
                        const Eigen::Vector2d& y);

struct Ellipse {
  Eigen::Vector2d center;
  double semi_major;
  double semi_minor;
  double rotation;  // radians, angle of principal axis
  double coverage;
};

// 95% (by default) coverage ellipse from the empirical covariance;
// semi-axes sqrt(lambda_i * q) with q the chi-square(2) quantile.
Ellipse confidence_ellipse(const Eigen::MatrixXd& points,
                           double coverage = 0.95);

// chi-square quantile for 2 degrees of freedom (closed form).
double chi2_quantile_2dof(double p);

bool ellipse_contains(const Ellipse& e, const Eigen::Vector2d& p);

struct GridSpec {
  double lo;
  double hi;
  int points;
};

// Gaussian-product KDE with per-dimension Scott's-rule bandwidths.
// 1-D: returns a vector of densities on the grid.
Eigen::VectorXd kde_grid_1d(const Eigen::VectorXd& samples,
                            const GridSpec& grid);
// 2-D: densities on the tensor grid, row index = x grid, col index = y grid.
Eigen::MatrixXd kde_grid_2d(const Eigen::MatrixXd& points, const GridSpec& gx,
                            const GridSpec& gy);

double scott_bandwidth(const Eigen::VectorXd& samples, int dims);

}  // namespace taxon::geometry
