#pragma once

#include "data.hpp"
#include "train.hpp"
#include "xp/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace hdd::xp {

struct SweepData {
  Dataset train;
  Dataset test;
};

/// Train/test splits for a sweep. Synthetic data draws both splits from the
/// same clusters (streams 0 and 1); label noise touches the training split
/// only.
SweepData make_sweep_data(const SweepConfig& cfg);

MlpSpec model_spec(const SweepConfig& cfg, const std::vector<Index>& hidden, Index d, Index k);

/// Trains the network of one (width, seed) grid point with the seeds the
/// sweep uses for it.
TrainedModel train_grid_model(const SweepConfig& cfg, const SweepData& data, Index width_index,
                              Index seed_index);

/// One JSONL record: train, assemble the Hessian at the optimum, then
/// spectra, bounds, assumption ratios and the rank law. Diverged models come
/// back with status "diverged_nan" and null measurements; models over the
/// parameter cap with status "skipped_capacity".
nlohmann::json run_model(const SweepConfig& cfg, const SweepData& data, Index width_index,
                         Index seed_index);

/// Hash of a record with its wall_time and record_hash fields removed
/// (FNV-1a 64 over the compact JSON dump, as 16 hex digits).
std::string record_hash(const nlohmann::json& record);

/// Hash of the settings that determine record contents (worker count and
/// output location excluded).
std::string config_hash(const SweepConfig& cfg);

struct SweepResult {
  Index jobs = 0;
  Index reused = 0;
  Index computed = 0;
  Index diverged = 0;
};

using RecordCallback = std::function<void(const nlohmann::json&)>;

/// Runs every (width, seed) job of the grid and writes one record per line to
/// `records_path` in config order (width-major, then seed). Existing records
/// with a matching (config_index, seed, config_hash) key are reused rather
/// than recomputed, so an interrupted sweep resumes where it stopped.
SweepResult width_sweep(const SweepConfig& cfg, const std::filesystem::path& records_path,
                        const RecordCallback& on_record = {});

/// Parses a JSONL file. A truncated final line (an interrupted write) is
/// dropped; malformed lines elsewhere are an error.
std::vector<nlohmann::json> read_records(const std::filesystem::path& path);

}  // namespace hdd::xp
