#pragma once

#include "linalg.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hdd::xp {

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  Index count = 0;  // 0 means no usable values; mean and sd are then NaN
};

Stat summarize(const std::vector<double>& values);

/// Per-width aggregate over seeds. Models with a non-finite status
/// (diverged_nan, skipped_capacity) count in `excluded` only.
struct WidthAggregate {
  Index width_index = 0;
  std::vector<Index> hidden;
  Index p = 0;
  Index n = 0;
  Index k = 0;
  Index models = 0;
  Index excluded = 0;
  Index interpolated = 0;
  Index divergent = 0;
  Stat train_loss;
  Stat test_loss;
  Stat log10_lambda_r;
  Stat lower_bound;
  Stat hf_ho_ratio;
  Stat rho;
  Stat trace_capture_q05;
};

/// Groups sweep records by width_index, in order of first appearance.
/// Throws InputError on an empty record set.
std::vector<WidthAggregate> aggregate_sweep(const std::vector<nlohmann::json>& records);

/// Replaces each mean by the average of itself and its neighbours in grid
/// order (two points at the ends).
void moving_average3(std::vector<WidthAggregate>& aggs);

/// Frozen column order of the aggregate CSV.
const std::vector<std::string>& aggregate_csv_columns();
std::string aggregate_csv(const std::vector<WidthAggregate>& aggs);

enum class ReportKind { csv, svg, both };
ReportKind report_kind_from_string(const std::string& s);

struct ReportOptions {
  ReportKind kind = ReportKind::both;
  bool log_scale = true;  // log axis for lambda_r and the bound plot
  bool smooth = false;    // 3-point moving average over successive widths
};

/// Reads a sweep or redundancy JSONL file and writes aggregate.csv and/or
/// SVG plots into out_dir. Returns the paths written.
std::vector<std::filesystem::path> emit_report(const std::filesystem::path& records_path,
                                               const std::filesystem::path& out_dir,
                                               const ReportOptions& opts = {});

}  // namespace hdd::xp
