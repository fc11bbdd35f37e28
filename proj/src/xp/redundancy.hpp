#pragma once

#include "xp/config.hpp"

#include <json.hpp>

#include <vector>

namespace hdd::xp {

/// Minimum-norm least squares on growing column prefixes of a redundant
/// design, one record per (beta, trial, prefix). Trial t uses data seed
/// derive(seed, t) with stream 0 for training and stream 1 for testing.
std::vector<nlohmann::json> redundancy_sweep(const RedundancyConfig& cfg);

struct RedundancyCurve {
  Index beta = 0;
  std::vector<Index> features;
  std::vector<double> test_mse_mean;
  std::vector<double> test_mse_sd;
  Index peak_features = 0;  // argmax of the mean curve
};

/// Averages records over trials, one curve per beta in record order.
std::vector<RedundancyCurve> redundancy_curves(const std::vector<nlohmann::json>& records);

}  // namespace hdd::xp
