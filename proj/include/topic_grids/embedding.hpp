#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topic_grids/sd_layout.hpp"

namespace topic_grids {

// Dense symmetric distance matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}
  // Validates symmetry, zero diagonal, nonnegativity; throws DomainError.
  DistanceMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  // Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v);
  std::span<const double> row_major() const { return d_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

enum class DistanceMetric { kEuclidean, kCosine };

DistanceMetric parse_metric(const std::string& name);
std::string to_string(DistanceMetric metric);

DistanceMatrix pairwise_distances(std::span<const std::vector<double>> vectors,
                                  DistanceMetric metric);

// Torgerson scaling: top-2 eigenpairs of the double-centered squared
// distances. Negative eigenvalues are clamped to zero with a warning on
// std::clog. Output is centered at the origin.
std::vector<Point2D> classical_mds(const DistanceMatrix& d);

enum class EmbeddingMethod { kMds, kTsne };

EmbeddingMethod parse_method(const std::string& name);

struct EmbeddingConfig {
  EmbeddingMethod method = EmbeddingMethod::kMds;
  double tsne_perplexity = 10.0;
  int tsne_iterations = 1000;
  double tsne_learning_rate = 100.0;
  double tsne_early_exaggeration = 4.0;
  std::uint64_t seed = 0;
};

struct TsneResult {
  std::vector<Point2D> points;
  // KL(P || Q) after each iteration, measured against the unexaggerated P.
  std::vector<double> kl_trace;
};

// Exact O(n^2) t-SNE.
TsneResult tsne(const DistanceMatrix& d, const EmbeddingConfig& cfg);

// Runs whichever method cfg selects.
std::vector<Point2D> embed(const DistanceMatrix& d, const EmbeddingConfig& cfg);

namespace tsne_detail {

// Row-conditional Gaussian affinities whose entropy matches log(perplexity)
// within 1e-4, symmetrized and normalized to sum 1. Row-major n x n.
std::vector<double> joint_affinities(const DistanceMatrix& d, double perplexity);

// KL(P || Q) for the embedding y (n points) and its gradient with respect
// to y, laid out as [dx0, dy0, dx1, dy1, ...].
double kl_and_gradient(std::span<const double> p, std::span<const Point2D> y,
                       std::vector<double>* gradient);

}  // namespace tsne_detail

}  // namespace topic_grids
