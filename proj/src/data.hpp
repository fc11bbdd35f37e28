#pragma once

#include "linalg.hpp"
#include "loss.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hdd {

enum class TaskKind { classification, regression };

std::string to_string(TaskKind t);

struct Dataset {
  Matrix x;  // n x d, one sample per row
  TaskKind task = TaskKind::classification;
  Index k = 1;                // classes (classification) or target width
  std::vector<Index> labels;  // classification only
  Matrix y;                   // n x k: one-hot for classification
  nlohmann::json provenance = nlohmann::json::object();

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
  Target target(Index i) const;
  void validate() const;
};

Dataset make_classification(Matrix x, std::vector<Index> labels, Index k);
Dataset make_regression(Matrix x, Matrix y);
Dataset subset(const Dataset& data, const std::vector<Index>& rows);

struct ClusterOptions {
  // Standard deviation of the cluster-mean coordinates; samples scatter
  // around their mean with unit variance per coordinate.
  double mean_scale = 0.35;
  // Every generated coordinate is multiplied by this; 1/sqrt(d) keeps
  // ||x||^2 near 1 + mean_scale^2 whatever the dimension.
  double input_scale = 1.0;
};

/// Gaussian-cluster classification data. Cluster means depend only on
/// (seed, d, k, mean_scale); `stream` selects an independent sample draw from
/// the same distribution, so stream 0 and 1 can serve as train and test.
/// Exactly round(noise_rate * n) labels, chosen at random, are resampled
/// uniformly over all K classes (the original class included).
Dataset gen_classification(Index n, Index d, Index k, double noise_rate, std::uint64_t seed,
                           std::uint64_t stream = 0, const ClusterOptions& opts = {});

/// Linear-regression design whose columns come in groups of (beta + 1): a base
/// feature followed by beta redundant columns, each a fixed random
/// combination of that base feature and up to two preceding ones. Any column
/// prefix therefore has rank ceil(j / (beta + 1)) (capped by n).
struct RedundantDesign {
  Index base_dim = 0;
  Index beta = 0;
  Matrix x;  // n x base_dim * (beta + 1)
  Vector y;  // planted linear model on the base features plus noise
  Vector planted;
  nlohmann::json provenance = nlohmann::json::object();
};

RedundantDesign gen_redundant_regression(Index n, Index d, Index beta, double noise_sd,
                                         std::uint64_t seed, std::uint64_t stream = 0);

struct CsvSchema {
  Index d = 1;
  TaskKind task = TaskKind::classification;
  Index k = 1;
};

/// Header `x0..x{d-1},y` for classification, `x0..x{d-1},y0..y{K-1}` for
/// regression. Errors name the offending data row (1-based) and column.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
void write_csv(const Dataset& data, const std::filesystem::path& path);
/// Writes `<path>.json` with the dataset's provenance record.
void write_provenance_sidecar(const Dataset& data, const std::filesystem::path& path);

}  // namespace hdd
