#include "xp/config.hpp"

#include "errors.hpp"
#include "xp/fields.hpp"

#include <cmath>
#include <fstream>

namespace hdd::xp {

using nlohmann::json;

namespace {

DatasetConfig dataset_from_json(const json& j) {
  DatasetConfig d;
  Fields f(j, "dataset");
  f.get("source", d.source);
  f.get("n_train", d.n_train);
  f.get("n_test", d.n_test);
  f.get("d", d.d);
  f.get("k", d.k);
  f.get("label_noise", d.label_noise);
  f.get("mean_scale", d.mean_scale);
  if (const json* s = f.sub("input_scale")) {
    if (s->is_string()) {
      if (s->get<std::string>() != "inv_sqrt_d") {
        throw ConfigError("dataset.input_scale: expected a number or \"inv_sqrt_d\"");
      }
    } else if (s->is_number()) {
      d.input_scale = s->get<double>();
    } else {
      throw ConfigError("dataset.input_scale: expected a number or \"inv_sqrt_d\"");
    }
  }
  f.get("seed", d.seed);
  f.get("task", d.task);
  f.get("train_path", d.train_path);
  f.get("test_path", d.test_path);
  f.finish();
  return d;
}

SgdSchedule schedule_from_json(const json& j, SgdSchedule s) {
  Fields f(j, "schedule");
  f.get("epochs", s.epochs);
  f.get("lr0", s.lr0);
  f.get("decay", s.decay);
  f.get("batch_size", s.batch_size);
  f.finish();
  return s;
}

}  // namespace

double DatasetConfig::effective_input_scale() const {
  return input_scale ? *input_scale : 1.0 / std::sqrt(static_cast<double>(d));
}

std::vector<std::vector<Index>> default_width_grid() {
  std::vector<std::vector<Index>> g;
  for (Index h = 3; h <= 42; h += 3) g.push_back({h});
  return g;
}

void SweepConfig::validate() const {
  if (dataset.source != "synthetic" && dataset.source != "csv") {
    throw ConfigError("dataset.source must be \"synthetic\" or \"csv\"");
  }
  if (dataset.source == "synthetic") {
    if (dataset.n_train < 1 || dataset.n_test < 1 || dataset.d < 1 || dataset.k < 1) {
      throw ConfigError("dataset sizes must be >= 1");
    }
    if (!(dataset.label_noise >= 0.0 && dataset.label_noise <= 1.0)) {
      throw ConfigError("dataset.label_noise must lie in [0, 1]");
    }
    if (!(dataset.mean_scale >= 0.0)) throw ConfigError("dataset.mean_scale must be >= 0");
    if (dataset.input_scale && !(*dataset.input_scale > 0.0)) {
      throw ConfigError("dataset.input_scale must be > 0");
    }
  } else {
    if (dataset.train_path.empty() || dataset.test_path.empty()) {
      throw ConfigError("csv datasets need train_path and test_path");
    }
    if (dataset.task != "classification" && dataset.task != "regression") {
      throw ConfigError("dataset.task must be \"classification\" or \"regression\"");
    }
  }
  if (widths.empty()) throw ConfigError("width grid is empty");
  for (const auto& w : widths) {
    if (w.size() > 2) throw ConfigError("at most two hidden layers are supported");
    for (Index h : w) {
      if (h < 1) throw ConfigError("hidden widths must be positive");
    }
  }
  if (init != "fan_in_uniform") throw ConfigError("init must be \"fan_in_uniform\"");
  try {
    schedule.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (!(zero_tol_rel >= 0.0)) throw ConfigError("zero_tol_rel must be >= 0");
  if (!(lambda_reg > 0.0)) throw ConfigError("lambda_reg must be > 0");
  if (param_cap < 1) throw ConfigError("param_cap must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (bound_eval_size < 1) throw ConfigError("bound_eval_size must be >= 1");
  for (double q : trace_fractions) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("trace_fractions must lie in [0, 1]");
  }
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  c.widths = default_width_grid();
  Fields f(j, "config");
  if (const json* d = f.sub("dataset")) c.dataset = dataset_from_json(*d);
  std::string loss = to_string(c.loss);
  f.get("loss", loss);
  std::string act = to_string(c.activation);
  f.get("activation", act);
  try {
    c.loss = loss_kind_from_string(loss);
    c.activation = activation_from_string(act);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (const json* w = f.sub("widths")) {
    if (!w->is_array()) throw ConfigError("widths: expected an array");
    c.widths.clear();
    for (const auto& item : *w) {
      if (item.is_number_integer()) {
        c.widths.push_back({item.get<Index>()});
      } else if (item.is_array()) {
        c.widths.push_back(item.get<std::vector<Index>>());
      } else {
        throw ConfigError("widths: entries must be integers or integer arrays");
      }
    }
  }
  f.get("bias", c.bias);
  f.get("output_layer_only", c.output_layer_only);
  f.get("init", c.init);
  if (const json* s = f.sub("schedule")) c.schedule = schedule_from_json(*s, c.schedule);
  f.get("seeds", c.seeds);
  f.get("seed", c.seed);
  f.get("tau", c.tau);
  f.get("zero_tol_rel", c.zero_tol_rel);
  f.get("lambda_reg", c.lambda_reg);
  f.get("param_cap", c.param_cap);
  f.get("workers", c.workers);
  f.get("bound_eval_size", c.bound_eval_size);
  f.get("trace_fractions", c.trace_fractions);
  f.get("output_dir", c.output_dir);
  f.finish();
  c.validate();
  return c;
}

json to_json(const SweepConfig& c) {
  json d = {{"source", c.dataset.source},
            {"n_train", c.dataset.n_train},
            {"n_test", c.dataset.n_test},
            {"d", c.dataset.d},
            {"k", c.dataset.k},
            {"label_noise", c.dataset.label_noise},
            {"mean_scale", c.dataset.mean_scale},
            {"seed", c.dataset.seed},
            {"task", c.dataset.task},
            {"train_path", c.dataset.train_path},
            {"test_path", c.dataset.test_path}};
  if (c.dataset.input_scale) {
    d["input_scale"] = *c.dataset.input_scale;
  } else {
    d["input_scale"] = "inv_sqrt_d";
  }
  return {{"dataset", d},
          {"loss", to_string(c.loss)},
          {"widths", c.widths},
          {"activation", to_string(c.activation)},
          {"bias", c.bias},
          {"output_layer_only", c.output_layer_only},
          {"init", c.init},
          {"schedule",
           {{"epochs", c.schedule.epochs},
            {"lr0", c.schedule.lr0},
            {"decay", c.schedule.decay},
            {"batch_size", c.schedule.batch_size}}},
          {"seeds", c.seeds},
          {"seed", c.seed},
          {"tau", c.tau},
          {"zero_tol_rel", c.zero_tol_rel},
          {"lambda_reg", c.lambda_reg},
          {"param_cap", c.param_cap},
          {"workers", c.workers},
          {"bound_eval_size", c.bound_eval_size},
          {"trace_fractions", c.trace_fractions},
          {"output_dir", c.output_dir}};
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return sweep_config_from_json(j);
}

void RedundancyConfig::validate() const {
  if (n < 2 || d_base < 1 || n_test < 1 || trials < 1) throw ConfigError("redundancy sizes must be positive");
  if (betas.empty()) throw ConfigError("beta list is empty");
  for (Index b : betas) {
    if (b < 0) throw ConfigError("beta must be >= 0");
  }
  if (!(grid_step_fraction > 0.0 && grid_step_fraction <= 1.0)) {
    throw ConfigError("grid_step_fraction must lie in (0, 1]");
  }
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
}

std::vector<Index> RedundancyConfig::prefix_grid(Index beta) const {
  const Index group = beta + 1;
  const auto step = std::max<Index>(
      1, static_cast<Index>(std::llround(grid_step_fraction * static_cast<double>(n * group))));
  std::vector<Index> g;
  for (Index j = step; j <= d_base * group; j += step) g.push_back(j);
  return g;
}

RedundancyConfig redundancy_config_from_json(const json& j) {
  RedundancyConfig c;
  Fields f(j, "redundancy");
  f.get("n", c.n);
  f.get("d_base", c.d_base);
  f.get("betas", c.betas);
  f.get("grid_step_fraction", c.grid_step_fraction);
  f.get("noise_sd", c.noise_sd);
  f.get("n_test", c.n_test);
  f.get("trials", c.trials);
  f.get("seed", c.seed);
  f.get("output_dir", c.output_dir);
  f.finish();
  c.validate();
  return c;
}

json to_json(const RedundancyConfig& c) {
  return {{"n", c.n},
          {"d_base", c.d_base},
          {"betas", c.betas},
          {"grid_step_fraction", c.grid_step_fraction},
          {"noise_sd", c.noise_sd},
          {"n_test", c.n_test},
          {"trials", c.trials},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

}  // namespace hdd::xp
