#include "taxon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taxon/common.hpp"

namespace taxon::geometry {

namespace {

using Eigen::Index;

struct Edge {
  int a;
  int b;
  double weight;
};

// Per-point bandwidth calibration: find sigma so that
// sum_j exp(-max(0, d_j - rho) / sigma) = log2(k).
double calibrate_sigma(const std::vector<double>& dists, double rho,
                       double target) {
  double lo = 1e-12, hi = 1.0;
  auto mass = [&](double sigma) {
    double s = 0.0;
    for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
    return s;
  };
  while (mass(hi) < target && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Fit the (a, b) curve so that 1/(1 + a x^(2b)) approximates the target
// membership curve for the given min_dist. Gauss-Newton on a sampled grid.
void fit_ab(double min_dist, double& a, double& b) {
  const int m = 300;
  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = 3.0 * (i + 1) / m;
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist));
  }
  a = 1.0;
  b = 1.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::Matrix2d JtJ = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < m; ++i) {
      const double x2b = std::pow(xs[i], 2.0 * b);
      const double denom = 1.0 + a * x2b;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double df_da = -x2b / (denom * denom);
      const double df_db = -2.0 * a * x2b * std::log(xs[i]) / (denom * denom);
      Eigen::Vector2d g(df_da, df_db);
      JtJ += g * g.transpose();
      Jtr += g * r;
    }
    JtJ.diagonal().array() += 1e-9;
    const Eigen::Vector2d delta = JtJ.ldlt().solve(Jtr);
    a -= delta[0];
    b -= delta[1];
    a = std::max(a, 1e-3);
    b = std::max(b, 1e-3);
    if (delta.norm() < 1e-12) break;
  }
}

double clip4(double x) { return std::clamp(x, -4.0, 4.0); }

}  // namespace

Layout2D project_2d(const Eigen::MatrixXd& X, const UmapParams& params) {
  const Index n = X.rows();
  const int k = params.neighbors;
  if (n < k + 1)
    throw Error("project_2d: need at least neighbors + 1 points");

  // Exact kNN under cosine distance.
  Eigen::MatrixXd U = X;
  for (Index i = 0; i < n; ++i) {
    const double nm = U.row(i).norm();
    if (nm > 0) U.row(i) /= nm;
  }
  const Eigen::MatrixXd sim = U * U.transpose();

  std::vector<std::vector<int>> nn(n);
  std::vector<std::vector<double>> nd(n);
  for (Index i = 0; i < n; ++i) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int p, int q) {
      return sim(i, p) > sim(i, q);
    });
    for (int j : order) {
      if (j == static_cast<int>(i)) continue;
      nn[i].push_back(j);
      nd[i].push_back(std::max(0.0, 1.0 - sim(i, j)));
      if (static_cast<int>(nn[i].size()) == k) break;
    }
  }

  // Fuzzy simplicial set with smooth-kNN calibration.
  const double target = std::log2(static_cast<double>(k));
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double rho = *std::min_element(nd[i].begin(), nd[i].end());
    const double sigma = calibrate_sigma(nd[i], rho, target);
    for (int j = 0; j < k; ++j)
      W(i, nn[i][j]) = std::exp(-std::max(0.0, nd[i][j] - rho) / sigma);
  }
  // Probabilistic t-conorm symmetrization.
  Eigen::MatrixXd G = W + W.transpose();
  G -= (W.array() * W.transpose().array()).matrix();

  // Spectral initialization on the symmetric normalized Laplacian.
  Eigen::VectorXd deg = G.rowwise().sum();
  Eigen::VectorXd dinv = deg.array().max(1e-12).rsqrt();
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n) -
                      dinv.asDiagonal() * G * dinv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  Layout2D out;
  out.params = params;
  out.coords.resize(n, 2);
  // Skip the trivial eigenvector; components of a disconnected graph give
  // piecewise-constant coordinates, which is fine as a starting layout.
  out.coords.col(0) = es.eigenvectors().col(1);
  out.coords.col(1) = es.eigenvectors().col(std::min<Index>(2, n - 1));
  const double scale = out.coords.cwiseAbs().maxCoeff();
  if (scale > 0) out.coords *= 10.0 / scale;
  // Deterministic jitter breaks exact coincidences from piecewise-constant
  // eigenvectors.
  Rng jrng(params.seed ^ 0x9e3779b9ULL);
  for (Index i = 0; i < n; ++i) {
    out.coords(i, 0) += 1e-4 * jrng.next_gaussian();
    out.coords(i, 1) += 1e-4 * jrng.next_gaussian();
  }

  double a, b;
  fit_ab(params.min_dist, a, b);

  // Edge list in fixed (i, j) order; sampling schedule follows the
  // reference implementation's epochs_per_sample scheme.
  std::vector<Edge> edges;
  double max_w = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (G(i, j) > 0 && i != j) max_w = std::max(max_w, G(i, j));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && G(i, j) > max_w / params.epochs)
        edges.push_back({static_cast<int>(i), static_cast<int>(j), G(i, j)});

  std::vector<double> eps(edges.size()), next_due(edges.size());
  std::vector<double> eps_neg(edges.size()), next_neg(edges.size());
  const double neg_rate = 5.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    eps[e] = max_w / edges[e].weight;
    next_due[e] = eps[e];
    eps_neg[e] = eps[e] / neg_rate;
    next_neg[e] = eps_neg[e];
  }

  Rng rng(params.seed);
  const double repulsion = 1.0;
  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    const double alpha =
        1.0 * (1.0 - static_cast<double>(epoch) / params.epochs);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (next_due[e] > epoch) continue;
      const int i = edges[e].a, j = edges[e].b;
      Eigen::RowVector2d diff = out.coords.row(i) - out.coords.row(j);
      const double d2 = diff.squaredNorm();
      if (d2 > 0) {
        const double grad =
            -2.0 * a * b * std::pow(d2, b - 1.0) / (1.0 + a * std::pow(d2, b));
        const Eigen::RowVector2d move =
            alpha * Eigen::RowVector2d(clip4(grad * diff[0]),
                                       clip4(grad * diff[1]));
        out.coords.row(i) += move;
        out.coords.row(j) -= move;
      }
      next_due[e] += eps[e];

      // Negative samples for the head point.
      int n_neg = static_cast<int>((epoch - next_neg[e]) / eps_neg[e]) + 1;
      for (int s = 0; s < n_neg; ++s) {
        const int t = static_cast<int>(rng.next_index(n));
        if (t == i) continue;
        Eigen::RowVector2d nd2 = out.coords.row(i) - out.coords.row(t);
        const double q2 = nd2.squaredNorm();
        const double grad =
            2.0 * repulsion * b /
            ((0.001 + q2) * (1.0 + a * std::pow(std::max(q2, 1e-12), b)));
        out.coords.row(i) +=
            alpha * Eigen::RowVector2d(clip4(grad * nd2[0]),
                                       clip4(grad * nd2[1]));
      }
      next_neg[e] += n_neg * eps_neg[e];
    }
  }
  if (!out.coords.allFinite()) throw Error("project_2d: non-finite layout");
  return out;
}

double median_objective(const Eigen::MatrixXd& points,
                        const Eigen::Vector2d& y) {
  double s = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    s += (points.row(i).transpose() - y).norm();
  return s;
}

Eigen::Vector2d geometric_median(const Eigen::MatrixXd& points) {
  const Index m = points.rows();
  if (m < 1) throw Error("geometric_median: empty point set");
  if (points.cols() != 2) throw Error("geometric_median: expected 2-D points");
  if (m == 1) return points.row(0).transpose();

  Eigen::Vector2d y = points.colwise().mean().transpose();
  const double tol = 1e-9;
  for (int it = 0; it < 1000; ++it) {
    Eigen::Vector2d num = Eigen::Vector2d::Zero();
    double denom = 0.0;
    int coincident = 0;       // multiplicity of data points at y
    Eigen::Vector2d r_vec = Eigen::Vector2d::Zero();
    for (Index i = 0; i < m; ++i) {
      const Eigen::Vector2d xi = points.row(i).transpose();
      const double d = (xi - y).norm();
      if (d < 1e-14) {
        ++coincident;
        continue;
      }
      num += xi / d;
      denom += 1.0 / d;
      r_vec += (xi - y) / d;
    }
    if (denom == 0.0) return y;  // all points coincide with y
    Eigen::Vector2d t = num / denom;
    if (coincident > 0) {
      // Vardi-Zhang: y is a data point; it is optimal iff ||r|| <= eta.
      const double r = r_vec.norm();
      const double eta = static_cast<double>(coincident);
      if (r <= eta) return y;
      const double gamma = std::min(1.0, eta / r);
      t = (1.0 - gamma) * t + gamma * y;
    }
    if ((t - y).norm() < tol) {
      y = t;
      break;
    }
    y = t;
  }

  // Weiszfeld contracts very slowly when the points are nearly collinear
  // (near-singular Hessian); polish with damped Newton steps, which converge
  // quadratically away from data points.
  for (int it = 0; it < 100; ++it) {
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    bool on_point = false;
    for (Index i = 0; i < m; ++i) {
      const Eigen::Vector2d diff = y - points.row(i).transpose();
      const double d = diff.norm();
      if (d < 1e-14) {
        on_point = true;
        break;
      }
      grad += diff / d;
      hess += (Eigen::Matrix2d::Identity() - (diff / d) * (diff / d).transpose()) / d;
    }
    if (on_point || grad.norm() < 1e-13) break;
    Eigen::Matrix2d damped =
        hess + 1e-12 * hess.trace() * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d step = damped.ldlt().solve(-grad);
    if (!step.allFinite()) break;
    // Backtracking: accept only strict objective decrease.
    const double f0 = median_objective(points, y);
    double scale = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, scale *= 0.5) {
      const Eigen::Vector2d cand = y + scale * step;
      if (median_objective(points, cand) < f0) {
        y = cand;
        moved = true;
        break;
      }
    }
    if (!moved || scale * step.norm() < 1e-15) break;
  }
  return y;
}

double chi2_quantile_2dof(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("chi2_quantile_2dof: p in (0,1)");
  return -2.0 * std::log(1.0 - p);
}

Ellipse confidence_ellipse(const Eigen::MatrixXd& points, double coverage) {
  const Index m = points.rows();
  if (m < 3) throw Error("confidence_ellipse: need at least 3 points");
  if (!(coverage > 0.0 && coverage < 1.0))
    throw Error("confidence_ellipse: coverage in (0,1)");
  const Eigen::RowVector2d mu = points.colwise().mean();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (Index i = 0; i < m; ++i) {
    const Eigen::RowVector2d c = points.row(i) - mu;
    cov += c.transpose() * c;
  }
  cov /= static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const double lmin = es.eigenvalues()[0], lmax = es.eigenvalues()[1];
  if (lmin <= 1e-12 * std::max(lmax, 1.0))
    throw Error("confidence_ellipse: degenerate (collinear) point set");
  const double q = chi2_quantile_2dof(coverage);
  Ellipse e;
  e.center = mu.transpose();
  e.semi_major = std::sqrt(lmax * q);
  e.semi_minor = std::sqrt(lmin * q);
  const Eigen::Vector2d v = es.eigenvectors().col(1);  // principal axis
  e.rotation = std::atan2(v[1], v[0]);
  e.coverage = coverage;
  return e;
}

bool ellipse_contains(const Ellipse& e, const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = p - e.center;
  const double c = std::cos(e.rotation), s = std::sin(e.rotation);
  const double u = c * d[0] + s * d[1];
  const double v = -s * d[0] + c * d[1];
  return (u * u) / (e.semi_major * e.semi_major) +
             (v * v) / (e.semi_minor * e.semi_minor) <=
         1.0;
}

double scott_bandwidth(const Eigen::VectorXd& samples, int dims) {
  const double n = static_cast<double>(samples.size());
  const double mu = samples.mean();
  const double sd =
      std::sqrt((samples.array() - mu).square().sum() / (n - 1.0));
  if (sd <= 0.0) throw Error("kde: zero-variance dimension");
  return sd * std::pow(n, -1.0 / (dims + 4.0));
}

Eigen::VectorXd kde_grid_1d(const Eigen::VectorXd& samples,
                            const GridSpec& grid) {
  if (samples.size() < 2) throw Error("kde: need at least 2 samples");
  const double h = scott_bandwidth(samples, 1);
  const double norm =
      1.0 / (samples.size() * h * std::sqrt(2.0 * M_PI));
  Eigen::VectorXd out(grid.points);
  for (int g = 0; g < grid.points; ++g) {
    const double x =
        grid.lo + (grid.hi - grid.lo) * g / std::max(1, grid.points - 1);
    const double z = ((samples.array() - x) / h).square().unaryExpr([](double t) {
      return std::exp(-0.5 * t);
    }).sum();
    out[g] = norm * z;
  }
  return out;
}

Eigen::MatrixXd kde_grid_2d(const Eigen::MatrixXd& points, const GridSpec& gx,
                            const GridSpec& gy) {
  if (points.rows() < 2) throw Error("kde: need at least 2 samples");
  if (points.cols() != 2) throw Error("kde_grid_2d: expected 2-D points");
  const double hx = scott_bandwidth(points.col(0), 2);
  const double hy = scott_bandwidth(points.col(1), 2);
  const double norm = 1.0 / (points.rows() * 2.0 * M_PI * hx * hy);
  Eigen::MatrixXd out(gx.points, gy.points);
  for (int i = 0; i < gx.points; ++i) {
    const double x = gx.lo + (gx.hi - gx.lo) * i / std::max(1, gx.points - 1);
    for (int j = 0; j < gy.points; ++j) {
      const double y =
          gy.lo + (gy.hi - gy.lo) * j / std::max(1, gy.points - 1);
      double s = 0.0;
      for (Index p = 0; p < points.rows(); ++p) {
        const double zx = (points(p, 0) - x) / hx;
        const double zy = (points(p, 1) - y) / hy;
        s += std::exp(-0.5 * (zx * zx + zy * zy));
      }
      out(i, j) = norm * s;
    }
  }
  return out;
}

}  // namespace taxon::geometry
