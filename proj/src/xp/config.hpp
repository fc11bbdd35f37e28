#pragma once

#include "data.hpp"
#include "loss.hpp"
#include "nnet.hpp"
#include "train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hdd::xp {

struct DatasetConfig {
  std::string source = "synthetic";  // "synthetic" or "csv"
  Index n_train = 64;
  Index n_test = 2000;
  Index d = 20;
  Index k = 4;
  double label_noise = 0.0;  // applied to the training split only
  double mean_scale = 0.35;
  // Absent means 1/sqrt(d); serialized as "inv_sqrt_d".
  std::optional<double> input_scale;
  std::uint64_t seed = 1;
  std::string task = "classification";  // csv only
  std::string train_path;
  std::string test_path;

  double effective_input_scale() const;
};

struct SweepConfig {
  DatasetConfig dataset;
  LossKind loss = LossKind::mse;
  std::vector<std::vector<Index>> widths;  // hidden-width tuples, one per grid point
  Activation activation = Activation::relu;
  bool bias = true;
  bool output_layer_only = false;
  std::string init = "fan_in_uniform";
  SgdSchedule schedule{2000, 0.1, 0.75, 1, 0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::uint64_t seed = 0;  // master seed for initialization and shuffling
  double tau = 1e-3;
  double zero_tol_rel = 1e-10;
  double lambda_reg = 1e-3;
  Index param_cap = 4000;
  Index workers = 1;
  Index bound_eval_size = 500;  // leading test samples used for C_L, C_f and sigma^2
  std::vector<double> trace_fractions{0.01, 0.05, 0.1, 0.25};
  std::string output_dir = "out";

  void validate() const;
};

/// Hidden widths 3, 6, ..., 42 (one layer).
std::vector<std::vector<Index>> default_width_grid();

/// Unknown keys are rejected; missing keys take the defaults above.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& cfg);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct RedundancyConfig {
  Index n = 100;
  Index d_base = 200;
  std::vector<Index> betas{0, 1, 2, 3};
  // Prefix grid per beta: steps of `grid_step_fraction * n * (beta + 1)`
  // columns, up to d_base * (beta + 1).
  double grid_step_fraction = 0.1;
  double noise_sd = 0.5;
  Index n_test = 1000;
  Index trials = 5;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  void validate() const;
  std::vector<Index> prefix_grid(Index beta) const;
};

RedundancyConfig redundancy_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RedundancyConfig& cfg);

}  // namespace hdd::xp
