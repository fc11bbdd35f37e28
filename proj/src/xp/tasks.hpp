#pragma once

#include "loo.hpp"
#include "rmt.hpp"
#include "xp/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hdd::xp {

/// Linear regression design X (n x d, Gaussian) with y = X w + noise, or a
/// regression CSV.
struct LooTaskConfig {
  std::string source = "synthetic";  // or "csv"
  std::string path;
  Index n = 30;
  Index d = 5;
  double noise_sd = 0.5;
  double lambda = 0.0;
  LooMode mode = LooMode::exact;
  Index brute_force_max_n = 500;  // refit check only up to this size
  std::uint64_t seed = 0;
};

LooTaskConfig loo_task_from_json(const nlohmann::json& j);

struct LooTaskResult {
  LooReport report;
  std::optional<double> brute_force;
  Index design_rank = 0;
};

LooTaskResult run_loo_task(const LooTaskConfig& cfg, const std::filesystem::path& out_dir);

struct RmtTaskConfig {
  EntryDist dist = EntryDist::gaussian;
  Index n = 2000;
  std::vector<double> gammas{0.1, 0.25, 0.5, 0.75, 0.9};
  Index trials = kDefaultEdgeTrials;
  std::optional<double> c;  // absent: fitted
  std::uint64_t seed = 0;
};

RmtTaskConfig rmt_task_from_json(const nlohmann::json& j);
std::vector<EdgeCheck> run_rmt_task(const RmtTaskConfig& cfg, const std::filesystem::path& out_dir);

/// A sweep configuration plus a "model" object selecting one grid point:
/// {"width_index", "seed_index", "parts": ["loss", "outer", "func"]}.
struct HessianTaskConfig {
  SweepConfig sweep;
  Index width_index = 0;
  Index seed_index = 0;
  std::vector<std::string> parts{"loss"};
};

HessianTaskConfig hessian_task_from_json(const nlohmann::json& j);
nlohmann::json run_hessian_task(const HessianTaskConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace hdd::xp
