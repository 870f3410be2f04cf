#include "topic_grids/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/Dense>

#include "topic_grids/error.hpp"
#include "topic_grids/random.hpp"

namespace topic_grids {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), d_(std::move(row_major)) {
  if (d_.size() != n * n) throw DomainError("distance matrix data does not match n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (d_[i * n + i] != 0.0) throw DomainError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double a = d_[i * n + j];
      const double b = d_[j * n + i];
      if (!std::isfinite(a) || a < 0.0) {
        throw DomainError("distance matrix entries must be finite and nonnegative");
      }
      if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw DomainError("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      }
    }
  }
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
  d_[i * n_ + j] = v;
  d_[j * n_ + i] = v;
}

DistanceMetric parse_metric(const std::string& name) {
  if (name == "euclidean") return DistanceMetric::kEuclidean;
  if (name == "cosine") return DistanceMetric::kCosine;
  throw DomainError("unknown distance metric '" + name + "'");
}

std::string to_string(DistanceMetric metric) {
  return metric == DistanceMetric::kEuclidean ? "euclidean" : "cosine";
}

EmbeddingMethod parse_method(const std::string& name) {
  if (name == "mds" || name == "MDS") return EmbeddingMethod::kMds;
  if (name == "tsne" || name == "TSNE" || name == "t-sne") return EmbeddingMethod::kTsne;
  throw DomainError("unknown embedding method '" + name + "'");
}

DistanceMatrix pairwise_distances(std::span<const std::vector<double>> vectors,
                                  DistanceMetric metric) {
  const std::size_t n = vectors.size();
  if (n == 0) return DistanceMatrix(0);
  const std::size_t dim = vectors.front().size();
  if (dim == 0) throw DomainError("vectors must have dimension >= 1");
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].size() != dim) {
      throw DomainError("vector " + std::to_string(i) + " has dimension " +
                        std::to_string(vectors[i].size()) + ", expected " + std::to_string(dim));
    }
    double s = 0.0;
    for (double v : vectors[i]) s += v * v;
    norms[i] = std::sqrt(s);
  }

  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = vectors[i];
      const auto& b = vectors[j];
      double v = 0.0;
      if (metric == DistanceMetric::kEuclidean) {
        for (std::size_t k = 0; k < dim; ++k) v += (a[k] - b[k]) * (a[k] - b[k]);
        v = std::sqrt(v);
      } else if (norms[i] == 0.0 && norms[j] == 0.0) {
        v = 0.0;
      } else if (norms[i] == 0.0 || norms[j] == 0.0) {
        v = 1.0;
      } else {
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += a[k] * b[k];
        v = std::max(0.0, 1.0 - dot / (norms[i] * norms[j]));
      }
      d.set(i, j, v);
    }
  }
  return d;
}

std::vector<Point2D> classical_mds(const DistanceMatrix& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  if (n < 3) throw DomainError("classical MDS needs at least 3 points");

  Eigen::MatrixXd sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = d(i, j);
      sq(i, j) = v * v;
    }
  }
  // B = -1/2 J D^2 J with J = I - 11^T / n.
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b = sq;
  b.colwise() -= row_mean;
  b.rowwise() -= col_mean;
  b.array() += grand;
  b *= -0.5;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  // Eigenvalues ascend; the top two are the last columns.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double top1 = values(n - 1);
  const double top2 = values(n - 2);
  if (top1 <= 0.0) throw DomainError("degenerate embedding: no positive eigenvalue");
  if (top2 < 0.0) {
    std::clog << "warning: classical MDS clamped negative eigenvalue " << top2 << " to 0\n";
  }
  const double s1 = std::sqrt(top1);
  const double s2 = std::sqrt(std::max(top2, 0.0));

  std::vector<Point2D> out(static_cast<std::size_t>(n));
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = {vectors(i, n - 1) * s1, vectors(i, n - 2) * s2};
    mx += out[i].x;
    my += out[i].y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  for (auto& p : out) {
    p.x -= mx;
    p.y -= my;
  }
  return out;
}

namespace tsne_detail {

std::vector<double> joint_affinities(const DistanceMatrix& d, double perplexity) {
  const std::size_t n = d.size();
  if (!(perplexity >= 1.0) || perplexity >= static_cast<double>(n) - 1.0) {
    throw DomainError("perplexity must be in [1, n - 1); got " + std::to_string(perplexity) +
                      " for n = " + std::to_string(n));
  }
  const double target = std::log(perplexity);
  std::vector<double> cond(n * n, 0.0);
  std::vector<double> sq(n);
  std::vector<double> row(n);

  for (std::size_t i = 0; i < n; ++i) {
    double min_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      sq[j] = d(i, j) * d(i, j);
      if (j != i) min_sq = std::min(min_sq, sq[j]);
    }
    // Shifting by the nearest distance leaves the conditional unchanged
    // and keeps exp() away from underflow.
    auto entropy_at = [&](double beta) {
      double total = 0.0;
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double shifted = sq[j] - min_sq;
        row[j] = std::exp(-beta * shifted);
        total += row[j];
        weighted += shifted * row[j];
      }
      for (double& v : row) v /= total;
      return std::log(total) + beta * weighted / total;
    };

    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double entropy = entropy_at(beta);
    for (int it = 0; it < 200 && std::abs(entropy - target) > 1e-5; ++it) {
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      entropy = entropy_at(beta);
    }
    if (std::abs(entropy - target) > 1e-4) {
      throw DomainError("perplexity " + std::to_string(perplexity) +
                        " is infeasible for point " + std::to_string(i));
    }
    std::copy(row.begin(), row.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * n));
  }

  std::vector<double> p(n * n, 0.0);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) / denom, 1e-12);
    }
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

double kl_and_gradient(std::span<const double> p, std::span<const Point2D> y,
                       std::vector<double>* gradient) {
  const std::size_t n = y.size();
  std::vector<double> num(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[i].x - y[j].x;
      const double dy = y[i].y - y[j].y;
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = v;
      num[j * n + i] = v;
      z += 2.0 * v;
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p[i * n + j] <= 0.0) continue;
      const double q = std::max(num[i * n + j] / z, 1e-300);
      kl += p[i * n + j] * std::log(p[i * n + j] / q);
    }
  }
  if (gradient != nullptr) {
    gradient->assign(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0;
      double gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = (p[i * n + j] - num[i * n + j] / z) * num[i * n + j];
        gx += w * (y[i].x - y[j].x);
        gy += w * (y[i].y - y[j].y);
      }
      (*gradient)[2 * i] = 4.0 * gx;
      (*gradient)[2 * i + 1] = 4.0 * gy;
    }
  }
  return kl;
}

}  // namespace tsne_detail

TsneResult tsne(const DistanceMatrix& d, const EmbeddingConfig& cfg) {
  const std::size_t n = d.size();
  if (cfg.tsne_iterations < 1) throw DomainError("t-SNE needs at least one iteration");
  const std::vector<double> p = tsne_detail::joint_affinities(d, cfg.tsne_perplexity);

  const int exaggeration_stop = cfg.tsne_iterations / 4;
  constexpr int kMomentumSwitch = 250;
  constexpr double kMinGain = 0.01;

  Rng rng(cfg.seed);
  std::vector<Point2D> y(n);
  for (auto& pt : y) {
    pt.x = 1e-4 * rng.normal();
    pt.y = 1e-4 * rng.normal();
  }
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);
  std::vector<double> grad;
  std::vector<double> exaggerated(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) exaggerated[k] = p[k] * cfg.tsne_early_exaggeration;

  TsneResult result;
  result.kl_trace.reserve(static_cast<std::size_t>(cfg.tsne_iterations));
  for (int it = 0; it < cfg.tsne_iterations; ++it) {
    const bool early = it < exaggeration_stop;
    tsne_detail::kl_and_gradient(early ? exaggerated : p, y, &grad);
    const double momentum = it < kMomentumSwitch ? 0.5 : 0.8;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (!std::isfinite(grad[k])) throw NumericError("t-SNE gradient is not finite", it);
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, kMinGain) : gains[k] + 0.2;
      update[k] = momentum * update[k] - cfg.tsne_learning_rate * gains[k] * grad[k];
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i].x += update[2 * i];
      y[i].y += update[2 * i + 1];
      mx += y[i].x;
      my += y[i].y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (auto& pt : y) {
      pt.x -= mx;
      pt.y -= my;
    }
    const double kl = tsne_detail::kl_and_gradient(p, y, nullptr);
    if (!std::isfinite(kl)) throw NumericError("t-SNE KL divergence is not finite", it);
    result.kl_trace.push_back(kl);
  }
  result.points = std::move(y);
  return result;
}

std::vector<Point2D> embed(const DistanceMatrix& d, const EmbeddingConfig& cfg) {
  if (cfg.method == EmbeddingMethod::kMds) return classical_mds(d);
  return tsne(d, cfg).points;
}

}  // namespace topic_grids
