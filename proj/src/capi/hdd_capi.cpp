#include "hdd/hdd.h"

#include "data.hpp"
#include "errors.hpp"
#include "hessian.hpp"
#include "loo.hpp"
#include "rmt.hpp"
#include "train.hpp"
#include "xp/config.hpp"
#include "xp/redundancy.hpp"
#include "xp/report.hpp"
#include "xp/sweep.hpp"
#include "xp/tasks.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <string>

struct hdd_dataset {
  hdd::Dataset data;
};

struct hdd_model {
  hdd::TrainedModel model;
  std::string status;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_buffer;

using nlohmann::json;

hdd_status fail(hdd_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps the core's exception taxonomy onto status codes.
template <typename Fn>
hdd_status guard(Fn fn) {
  try {
    fn();
    g_last_error.clear();
    return HDD_OK;
  } catch (const hdd::ConfigError& e) {
    return fail(HDD_ERR_CONFIG, e.what());
  } catch (const hdd::NumericError& e) {
    return fail(HDD_ERR_NUMERIC, e.what());
  } catch (const hdd::CapacityError& e) {
    return fail(HDD_ERR_CAPACITY, e.what());
  } catch (const hdd::IoError& e) {
    return fail(HDD_ERR_IO, e.what());
  } catch (const hdd::InputError& e) {
    return fail(HDD_ERR_INPUT, e.what());
  } catch (const json::exception& e) {
    return fail(HDD_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HDD_ERR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail(HDD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HDD_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw hdd::InputError(std::string(what) + " must not be NULL");
}

json parse_config(const char* text) {
  require(text, "config_json");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw hdd::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

hdd::LossKind loss_of(hdd_loss l) {
  switch (l) {
    case HDD_LOSS_MSE: return hdd::LossKind::mse;
    case HDD_LOSS_CROSS_ENTROPY: return hdd::LossKind::cross_entropy;
  }
  throw hdd::InputError("unknown loss kind");
}

const hdd::SymMatrix& part_of(const hdd::HessianParts& parts, hdd_hessian_part p) {
  switch (p) {
    case HDD_PART_LOSS: return parts.h_loss;
    case HDD_PART_OUTER: return parts.h_outer;
    case HDD_PART_FUNC: return parts.h_func;
  }
  throw hdd::InputError("unknown Hessian part");
}

hdd::Matrix design_of(const double* design, int64_t n, int64_t q) {
  require(design, "design");
  if (n < 1 || q < 1) throw hdd::InputError("design dimensions must be positive");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      design, n, q);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw hdd::IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

extern "C" {

const char* hdd_last_error(void) { return g_last_error.c_str(); }

const char* hdd_version(void) { return "0.1.0"; }

hdd_status hdd_dataset_classification(int64_t n, int64_t d, int64_t k, double label_noise,
                                      uint64_t seed, uint64_t stream, double mean_scale,
                                      double input_scale, hdd_dataset** out) {
  return guard([&] {
    require(out, "out");
    hdd::ClusterOptions opts;
    opts.mean_scale = mean_scale;
    opts.input_scale = input_scale > 0.0 ? input_scale : 1.0 / std::sqrt(static_cast<double>(d));
    *out = new hdd_dataset{hdd::gen_classification(n, d, k, label_noise, seed, stream, opts)};
  });
}

hdd_status hdd_dataset_load_csv(const char* path, int64_t d, const char* task, int64_t k,
                                hdd_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(task, "task");
    require(out, "out");
    const std::string t = task;
    if (t != "classification" && t != "regression") {
      throw hdd::InputError("task must be classification or regression");
    }
    hdd::CsvSchema schema{d, t == "regression" ? hdd::TaskKind::regression : hdd::TaskKind::classification, k};
    *out = new hdd_dataset{hdd::load_csv(path, schema)};
  });
}

int64_t hdd_dataset_size(const hdd_dataset* data) { return data ? data->data.size() : 0; }
int64_t hdd_dataset_dim(const hdd_dataset* data) { return data ? data->data.dim() : 0; }
void hdd_dataset_free(hdd_dataset* data) { delete data; }

hdd_train_options hdd_train_defaults(void) {
  const hdd::SgdSchedule s;
  return {s.epochs, s.lr0, s.decay, s.batch_size, 0, 0};
}

hdd_status hdd_model_train(const hdd_dataset* data, const int64_t* hidden, size_t n_hidden,
                           hdd_loss loss, const hdd_train_options* opts, hdd_model** out) {
  return guard([&] {
    require(data, "data");
    require(opts, "opts");
    require(out, "out");
    if (n_hidden > 0) require(hidden, "hidden");
    hdd::MlpSpec spec;
    spec.input_dim = data->data.dim();
    spec.hidden_widths.assign(hidden, hidden + n_hidden);
    spec.output_dim = data->data.k;
    hdd::SgdSchedule sched;
    sched.epochs = opts->epochs;
    sched.lr0 = opts->lr0;
    sched.decay = opts->decay;
    sched.batch_size = opts->batch_size;
    sched.shuffle_seed = opts->shuffle_seed;
    hdd::TrainedModel m = hdd::sgd_train(spec, data->data, loss_of(loss), sched, opts->seed);
    const std::string status = hdd::to_string(m.status);
    *out = new hdd_model{std::move(m), status};
  });
}

int64_t hdd_model_param_count(const hdd_model* model) {
  return model ? model->model.spec.trainable_count() : 0;
}

const char* hdd_model_status(const hdd_model* model) { return model ? model->status.c_str() : ""; }

double hdd_model_train_loss(const hdd_model* model) {
  return model ? model->model.train_loss : std::numeric_limits<double>::quiet_NaN();
}

void hdd_model_free(hdd_model* model) { delete model; }

hdd_status hdd_hessian_spectrum(const hdd_model* model, const hdd_dataset* data, hdd_loss loss,
                                hdd_hessian_part part, double zero_tol_rel, hdd_spectrum* out) {
  return guard([&] {
    require(model, "model");
    require(data, "data");
    require(out, "out");
    const hdd::HessianParts parts = hdd::assemble(model->model.optimum(), data->data, loss_of(loss));
    const hdd::SymMatrix& m = part_of(parts, part);
    const hdd::SpectrumSummary s = hdd::summarize_spectrum(hdd::sym_eigenvalues(m), zero_tol_rel);
    *out = {m.dim(), s.rank, s.zero_tol, s.lambda_max, s.lambda_min_nonzero.value_or(0.0),
            s.lambda_min_nonzero ? 1 : 0, s.trace, s.inverse_trace};
  });
}

hdd_status hdd_hessian_dump(const hdd_model* model, const hdd_dataset* data, hdd_loss loss,
                            hdd_hessian_part part, const char* path) {
  return guard([&] {
    require(model, "model");
    require(data, "data");
    require(path, "path");
    const hdd::HessianParts parts = hdd::assemble(model->model.optimum(), data->data, loss_of(loss));
    hdd::write_matrix_binary(part_of(parts, part), path);
  });
}

hdd_status hdd_loo_linear(const double* design, int64_t n, int64_t q, const double* y, double lambda,
                          int exact, double* leverages, double* residuals, hdd_loo_result* out) {
  return guard([&] {
    require(y, "y");
    require(out, "out");
    const hdd::Matrix x = design_of(design, n, q);
    const hdd::Vector yy = Eigen::Map<const hdd::Vector>(y, n);
    const hdd::Vector theta = hdd::fit_linear(x, yy, lambda);
    const hdd::Vector r = yy - x * theta;
    const hdd::LooReport rep = hdd::loo_influence(hdd::hat_matrix(x, lambda), r,
                                                  exact ? hdd::LooMode::exact : hdd::LooMode::asymptotic);
    out->loo1 = rep.loo1;
    out->loo2 = rep.loo2;
    out->train_mse = rep.train_mse;
    out->exact_ls = lambda == 0.0 ? hdd::loo_ols_exact(x, yy) : std::numeric_limits<double>::quiet_NaN();
    for (int64_t i = 0; i < n; ++i) {
      if (leverages) leverages[i] = rep.per_sample[static_cast<std::size_t>(i)].leverage;
      if (residuals) residuals[i] = rep.per_sample[static_cast<std::size_t>(i)].residual;
    }
  });
}

hdd_status hdd_loo_brute_force(const double* design, int64_t n, int64_t q, const double* y,
                               double lambda, double* out) {
  return guard([&] {
    require(y, "y");
    require(out, "out");
    *out = hdd::brute_force_loo(design_of(design, n, q), Eigen::Map<const hdd::Vector>(y, n), lambda);
  });
}

hdd_status hdd_rmt_edge(hdd_dist dist, int64_t m, int64_t n, int64_t trials, uint64_t seed, double c,
                        hdd_edge_result* out) {
  return guard([&] {
    require(out, "out");
    hdd::EntryDist d;
    switch (dist) {
      case HDD_DIST_GAUSSIAN: d = hdd::EntryDist::gaussian; break;
      case HDD_DIST_RADEMACHER: d = hdd::EntryDist::rademacher; break;
      case HDD_DIST_UNIFORM: d = hdd::EntryDist::uniform; break;
      default: throw hdd::InputError("unknown distribution");
    }
    const hdd::EdgeCheck e =
        hdd::edge_check(d, m, n, trials, seed, c > 0.0 ? std::optional<double>(c) : std::nullopt);
    *out = {e.gamma, e.lambda_min_mean, e.lambda_min_sd, e.lambda_max_mean,
            e.lambda_max_sd, e.c, e.predicted_min, e.predicted_max};
  });
}

hdd_status hdd_sweep_run(const char* config_json, const char* out_dir, int64_t workers, int has_seed,
                         uint64_t seed, hdd_record_fn on_record, void* user) {
  return guard([&] {
    require(out_dir, "out_dir");
    hdd::xp::SweepConfig cfg = hdd::xp::sweep_config_from_json(parse_config(config_json));
    if (workers > 0) cfg.workers = workers;
    if (has_seed) cfg.seed = seed;
    cfg.output_dir = out_dir;
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "config.json", hdd::xp::to_json(cfg).dump(2) + "\n");
    hdd::xp::RecordCallback cb;
    if (on_record) cb = [&](const json& r) { on_record(r.dump().c_str(), user); };
    hdd::xp::width_sweep(cfg, dir / "records.jsonl", cb);
  });
}

hdd_status hdd_redundancy_run(const char* config_json, const char* out_dir, int has_seed, uint64_t seed,
                              hdd_record_fn on_record, void* user) {
  return guard([&] {
    require(out_dir, "out_dir");
    hdd::xp::RedundancyConfig cfg = hdd::xp::redundancy_config_from_json(parse_config(config_json));
    if (has_seed) cfg.seed = seed;
    cfg.output_dir = out_dir;
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "redundancy_config.json", hdd::xp::to_json(cfg).dump(2) + "\n");
    const auto records = hdd::xp::redundancy_sweep(cfg);
    std::string lines;
    for (const json& r : records) {
      lines += r.dump() + "\n";
      if (on_record) on_record(r.dump().c_str(), user);
    }
    write_text(dir / "redundancy.jsonl", lines);
    std::string peaks = "beta,threshold,peak_features\n";
    for (const auto& c : hdd::xp::redundancy_curves(records)) {
      peaks += std::to_string(c.beta) + "," + std::to_string(cfg.n * (c.beta + 1)) + "," +
               std::to_string(c.peak_features) + "\n";
    }
    write_text(dir / "redundancy_peaks.csv", peaks);
  });
}

hdd_status hdd_loo_run(const char* config_json, const char* out_dir, int has_seed, uint64_t seed) {
  return guard([&] {
    require(out_dir, "out_dir");
    hdd::xp::LooTaskConfig cfg = hdd::xp::loo_task_from_json(parse_config(config_json));
    if (has_seed) cfg.seed = seed;
    hdd::xp::run_loo_task(cfg, out_dir);
  });
}

hdd_status hdd_rmt_run(const char* config_json, const char* out_dir, int has_seed, uint64_t seed) {
  return guard([&] {
    require(out_dir, "out_dir");
    hdd::xp::RmtTaskConfig cfg = hdd::xp::rmt_task_from_json(parse_config(config_json));
    if (has_seed) cfg.seed = seed;
    hdd::xp::run_rmt_task(cfg, out_dir);
  });
}

hdd_status hdd_hessian_run(const char* config_json, const char* out_dir, int has_seed, uint64_t seed) {
  return guard([&] {
    require(out_dir, "out_dir");
    hdd::xp::HessianTaskConfig cfg = hdd::xp::hessian_task_from_json(parse_config(config_json));
    if (has_seed) cfg.sweep.seed = seed;
    hdd::xp::run_hessian_task(cfg, out_dir);
  });
}

hdd_status hdd_report(const char* records_path, const char* out_dir, const char* kind, int log_scale,
                      int smooth) {
  return guard([&] {
    require(records_path, "records_path");
    require(out_dir, "out_dir");
    hdd::xp::ReportOptions opts;
    opts.kind = hdd::xp::report_kind_from_string(kind ? kind : "both");
    opts.log_scale = log_scale != 0;
    opts.smooth = smooth != 0;
    hdd::xp::emit_report(records_path, out_dir, opts);
  });
}

hdd_status hdd_sweep_config_resolve(const char* config_json, const char** out) {
  return guard([&] {
    require(out, "out");
    g_buffer = hdd::xp::to_json(hdd::xp::sweep_config_from_json(parse_config(config_json))).dump(2);
    *out = g_buffer.c_str();
  });
}

}  // extern "C"
