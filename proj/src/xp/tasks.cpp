#include "xp/tasks.hpp"

#include "errors.hpp"
#include "hessian.hpp"
#include "rng.hpp"
#include "train.hpp"
#include "xp/fields.hpp"
#include "xp/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace hdd::xp {

using nlohmann::json;

namespace {

template <typename Fn>
auto as_config(Fn fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

LooTaskConfig loo_task_from_json(const json& j) {
  LooTaskConfig c;
  Fields f(j, "loo");
  f.get("source", c.source);
  f.get("path", c.path);
  f.get("n", c.n);
  f.get("d", c.d);
  f.get("noise_sd", c.noise_sd);
  f.get("lambda", c.lambda);
  std::string mode = to_string(c.mode);
  f.get("mode", mode);
  c.mode = as_config([&] { return loo_mode_from_string(mode); });
  f.get("brute_force_max_n", c.brute_force_max_n);
  f.get("seed", c.seed);
  f.finish();
  if (c.source != "synthetic" && c.source != "csv") throw ConfigError("loo.source must be synthetic or csv");
  if (c.source == "csv" && c.path.empty()) throw ConfigError("loo.path is required for csv input");
  if (c.n < 2 || c.d < 1) throw ConfigError("loo: need n >= 2 and d >= 1");
  if (!(c.lambda >= 0.0)) throw ConfigError("loo.lambda must be >= 0");
  if (!(c.noise_sd >= 0.0)) throw ConfigError("loo.noise_sd must be >= 0");
  return c;
}

LooTaskResult run_loo_task(const LooTaskConfig& cfg, const std::filesystem::path& out_dir) {
  Matrix x;
  Vector y;
  if (cfg.source == "csv") {
    const Dataset data = load_csv(cfg.path, CsvSchema{cfg.d, TaskKind::regression, 1});
    x = data.x;
    y = data.y.col(0);
  } else {
    Rng rng(derive_seed(cfg.seed, 0x100));
    x.resize(cfg.n, cfg.d);
    for (Index i = 0; i < cfg.n; ++i) {
      for (Index j = 0; j < cfg.d; ++j) x(i, j) = standard_normal(rng);
    }
    Vector w(cfg.d);
    for (Index j = 0; j < cfg.d; ++j) w(j) = standard_normal(rng);
    y = x * w;
    for (Index i = 0; i < cfg.n; ++i) y(i) += cfg.noise_sd * standard_normal(rng);
  }
  const Vector theta = fit_linear(x, y, cfg.lambda);
  const Vector r = y - x * theta;
  const HatMatrix hat = hat_matrix(x, cfg.lambda);
  LooTaskResult res;
  res.design_rank = hat.design_rank;
  res.report = loo_influence(hat, r, cfg.mode);
  if (cfg.lambda == 0.0) res.report.exact_ls = loo_ols_exact(x, y);
  if (x.rows() <= cfg.brute_force_max_n) res.brute_force = brute_force_loo(x, y, cfg.lambda);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv = open_out(out_dir / "loo_samples.csv");
  csv << "index,leverage,residual,term1,term2\n";
  for (std::size_t i = 0; i < res.report.per_sample.size(); ++i) {
    const LooSample& s = res.report.per_sample[i];
    csv << i << "," << s.leverage << "," << s.residual << "," << s.term1 << "," << s.term2 << "\n";
  }
  json summary = {{"n", x.rows()},
                  {"d", x.cols()},
                  {"lambda", cfg.lambda},
                  {"mode", to_string(cfg.mode)},
                  {"hat_source", to_string(hat.source)},
                  {"design_rank", hat.design_rank},
                  {"rank_deficient", hat.rank_deficient},
                  {"train_mse", res.report.train_mse},
                  {"loo1", res.report.loo1},
                  {"loo2", res.report.loo2},
                  {"exact_ls", res.report.exact_ls ? json(*res.report.exact_ls) : json(nullptr)},
                  {"brute_force", res.brute_force ? json(*res.brute_force) : json(nullptr)}};
  open_out(out_dir / "loo_summary.json") << summary.dump(2) << "\n";
  return res;
}

RmtTaskConfig rmt_task_from_json(const json& j) {
  RmtTaskConfig c;
  Fields f(j, "rmt");
  std::string dist = to_string(c.dist);
  f.get("dist", dist);
  c.dist = as_config([&] { return entry_dist_from_string(dist); });
  f.get("n", c.n);
  f.get("gammas", c.gammas);
  f.get("trials", c.trials);
  if (const json* cj = f.sub("c")) {
    if (!cj->is_null()) {
      if (!cj->is_number()) throw ConfigError("rmt.c must be a number or null");
      c.c = cj->get<double>();
    }
  }
  f.get("seed", c.seed);
  f.finish();
  if (c.n < 2 || c.trials < 1) throw ConfigError("rmt: need n >= 2 and trials >= 1");
  for (double g : c.gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw ConfigError("rmt.gammas must lie in (0, 1]");
  }
  return c;
}

std::vector<EdgeCheck> run_rmt_task(const RmtTaskConfig& cfg, const std::filesystem::path& out_dir) {
  std::optional<double> c = cfg.c;
  if (!c) c = fit_edge_constant(cfg.dist, std::min<Index>(cfg.n, 500), cfg.trials, cfg.seed);
  std::vector<EdgeCheck> out;
  for (std::size_t i = 0; i < cfg.gammas.size(); ++i) {
    const auto m = std::max<Index>(1, static_cast<Index>(std::llround(cfg.gammas[i] * static_cast<double>(cfg.n))));
    out.push_back(edge_check(cfg.dist, m, cfg.n, cfg.trials, derive_seed(cfg.seed, 0xED6E, i), c));
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream csv = open_out(out_dir / "rmt.csv");
  csv << "dist,m,n,gamma,trials,lambda_min_mean,lambda_min_sd,lambda_max_mean,lambda_max_sd,c,"
         "predicted_min,predicted_max\n";
  for (const EdgeCheck& e : out) {
    csv << to_string(e.dist) << "," << e.m << "," << e.n << "," << e.gamma << "," << e.trials << ","
        << e.lambda_min_mean << "," << e.lambda_min_sd << "," << e.lambda_max_mean << ","
        << e.lambda_max_sd << "," << e.c << "," << e.predicted_min << "," << e.predicted_max << "\n";
  }
  return out;
}

HessianTaskConfig hessian_task_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("hessian config: expected a JSON object");
  HessianTaskConfig c;
  json sweep = j;
  if (j.contains("model")) {
    Fields f(j.at("model"), "model");
    f.get("width_index", c.width_index);
    f.get("seed_index", c.seed_index);
    f.get("parts", c.parts);
    f.finish();
    sweep.erase("model");
  }
  c.sweep = sweep_config_from_json(sweep);
  if (c.width_index < 0 || c.width_index >= static_cast<Index>(c.sweep.widths.size())) {
    throw ConfigError("model.width_index out of range");
  }
  if (c.seed_index < 0 || c.seed_index >= static_cast<Index>(c.sweep.seeds.size())) {
    throw ConfigError("model.seed_index out of range");
  }
  if (c.parts.empty()) throw ConfigError("model.parts is empty");
  for (const auto& p : c.parts) {
    if (p != "loss" && p != "outer" && p != "func") {
      throw ConfigError("model.parts entries must be loss, outer or func");
    }
  }
  return c;
}

json run_hessian_task(const HessianTaskConfig& cfg, const std::filesystem::path& out_dir) {
  const SweepConfig& sc = cfg.sweep;
  const SweepData data = make_sweep_data(sc);
  const TrainedModel model = train_grid_model(sc, data, cfg.width_index, cfg.seed_index);
  if (model.status == TrainStatus::diverged_nan) {
    throw NumericError("training diverged (NaN parameters); no Hessian to dump");
  }
  const HessianParts parts =
      assemble(model.optimum(), data.train, sc.loss, HessianOptions{sc.param_cap});
  std::filesystem::create_directories(out_dir);
  json summary = {{"p", model.spec.trainable_count()},
                  {"n", data.train.size()},
                  {"status", to_string(model.status)},
                  {"train_loss", model.train_loss},
                  {"train_mse", model.train_mse},
                  {"files", json::object()}};
  for (const auto& name : cfg.parts) {
    const SymMatrix& m = name == "loss" ? parts.h_loss : name == "outer" ? parts.h_outer : parts.h_func;
    const auto path = out_dir / ("hessian_" + name + ".bin");
    write_matrix_binary(m, path);
    const SpectrumSummary s = summarize_spectrum(sym_eigenvalues(m), sc.zero_tol_rel);
    summary["files"][name] = {
        {"path", path.filename().string()},
        {"rank", s.rank},
        {"lambda_max", s.lambda_max},
        {"lambda_min_nonzero", s.lambda_min_nonzero ? json(*s.lambda_min_nonzero) : json(nullptr)}};
  }
  open_out(out_dir / "hessian.json") << summary.dump(2) << "\n";
  return summary;
}

}  // namespace hdd::xp
