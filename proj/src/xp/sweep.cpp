#include "xp/sweep.hpp"

#include "errors.hpp"
#include "hessian.hpp"
#include "risk.hpp"
#include "rng.hpp"
#include "train.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

namespace hdd::xp {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5f1e;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json spectrum_json(const SpectrumSummary& s) {
  return {{"rank", s.rank},
          {"positive_rank", s.positive_rank},
          {"zero_tol", s.zero_tol},
          {"lambda_max", s.lambda_max},
          {"lambda_min_nonzero", optional_json(s.lambda_min_nonzero)},
          {"trace", s.trace},
          {"nuclear_norm", s.nuclear_norm},
          {"spectral_norm", s.spectral_norm},
          {"condition_number", optional_json(s.condition_number)},
          {"inverse_trace", s.inverse_trace}};
}

json dataset_identity(const Dataset& d) {
  return {{"n", d.size()}, {"d", d.dim()}, {"k", d.k}, {"provenance", d.provenance}};
}

// Runs fn and returns its value, or null (plus a note) when it raises a
// numeric error.
template <typename Fn>
json guarded(Fn fn, json& notes, const char* what) {
  try {
    return json(fn());
  } catch (const NumericError& e) {
    notes.push_back(std::string(what) + ": " + e.what());
    return nullptr;
  }
}

}  // namespace

SweepData make_sweep_data(const SweepConfig& cfg) {
  const DatasetConfig& dc = cfg.dataset;
  if (dc.source == "csv") {
    CsvSchema schema{dc.d, dc.task == "regression" ? TaskKind::regression : TaskKind::classification,
                     dc.k};
    return {load_csv(dc.train_path, schema), load_csv(dc.test_path, schema)};
  }
  ClusterOptions opts;
  opts.mean_scale = dc.mean_scale;
  opts.input_scale = dc.effective_input_scale();
  return {gen_classification(dc.n_train, dc.d, dc.k, dc.label_noise, dc.seed, 0, opts),
          gen_classification(dc.n_test, dc.d, dc.k, 0.0, dc.seed, 1, opts)};
}

MlpSpec model_spec(const SweepConfig& cfg, const std::vector<Index>& hidden, Index d, Index k) {
  MlpSpec spec;
  spec.input_dim = d;
  spec.hidden_widths = hidden;
  spec.output_dim = k;
  spec.activation = cfg.activation;
  spec.bias = cfg.bias;
  spec.output_layer_only = cfg.output_layer_only;
  spec.validate();
  return spec;
}

TrainedModel train_grid_model(const SweepConfig& cfg, const SweepData& data, Index width_index,
                              Index seed_index) {
  const std::uint64_t seed = cfg.seeds.at(static_cast<std::size_t>(seed_index));
  const MlpSpec spec = model_spec(cfg, cfg.widths.at(static_cast<std::size_t>(width_index)),
                                  data.train.dim(), data.train.k);
  SgdSchedule sched = cfg.schedule;
  sched.shuffle_seed = derive_seed(cfg.seed, kShuffleStream, seed);
  const std::uint64_t init_seed =
      derive_seed(derive_seed(cfg.seed, kInitStream, seed), static_cast<std::uint64_t>(width_index));
  return sgd_train(spec, data.train, cfg.loss, sched, init_seed);
}

json run_model(const SweepConfig& cfg, const SweepData& data, Index width_index,
               Index seed_index) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = cfg.seeds.at(static_cast<std::size_t>(seed_index));
  const auto& hidden = cfg.widths.at(static_cast<std::size_t>(width_index));
  const Dataset& train = data.train;
  const Index n = train.size();
  const Index k = train.k;
  const MlpSpec spec = model_spec(cfg, hidden, train.dim(), k);
  const Index p = spec.trainable_count();

  json rec;
  rec["config_index"] = width_index * static_cast<Index>(cfg.seeds.size()) + seed_index;
  rec["width_index"] = width_index;
  rec["seed"] = seed;
  rec["config_hash"] = config_hash(cfg);
  rec["hidden"] = hidden;
  rec["p"] = p;
  rec["n"] = n;
  rec["K"] = k;
  rec["loss"] = to_string(cfg.loss);
  rec["init"] = cfg.init;
  rec["label_noise"] = cfg.dataset.label_noise;
  rec["dataset"] = dataset_identity(train);
  json notes = json::array();

  auto finish = [&](json& r) {
    r["notes"] = notes;
    r["record_hash"] = record_hash(r);
    r["wall_time"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };

  if (p > cfg.param_cap) {
    rec["status"] = "skipped_capacity";
    notes.push_back("parameter count " + std::to_string(p) + " exceeds cap " +
                    std::to_string(cfg.param_cap));
    return finish(rec);
  }

  const TrainedModel model = train_grid_model(cfg, data, width_index, seed_index);
  rec["status"] = to_string(model.status);
  rec["epochs_run"] = model.epochs_run;
  if (model.status == TrainStatus::diverged_nan) {
    for (const char* key : {"train_loss", "train_accuracy", "train_mse", "test_loss",
                            "test_loss_se", "test_accuracy", "test_mse", "spectrum",
                            "outer_spectrum", "rank_law", "bound", "assumptions",
                            "trace_capture"}) {
      rec[key] = nullptr;
    }
    return finish(rec);
  }
  rec["train_loss"] = model.train_loss;
  rec["train_accuracy"] = model.train_accuracy;
  rec["train_mse"] = model.train_mse;

  const MlpParams star = model.optimum();
  const Evaluation test = evaluate(star, data.test, cfg.loss);
  rec["test_loss"] = test.loss;
  rec["test_loss_se"] = test.loss_se;
  rec["test_accuracy"] = test.accuracy;
  rec["test_mse"] = test.mse;

  const HessianParts parts = assemble(star, train, cfg.loss, HessianOptions{cfg.param_cap});
  const EigenDecomposition h_eig = sym_eig(parts.h_loss);
  const SpectrumSummary h_sum = summarize_spectrum(h_eig.values, cfg.zero_tol_rel);
  const SpectrumSummary o_sum =
      summarize_spectrum(sym_eigenvalues(parts.h_outer), cfg.zero_tol_rel);
  rec["spectrum"] = spectrum_json(h_sum);
  rec["outer_spectrum"] = spectrum_json(o_sum);

  const RankLawReport law = rank_law_check(parts, cfg.loss, n, k, p, cfg.zero_tol_rel);
  rec["rank_law"] = {{"measured_rank", law.measured_rank},
                     {"predicted_rank", law.predicted_rank},
                     {"deficit", law.deficit},
                     {"law", law.law}};

  std::vector<Index> eval_rows(
      static_cast<std::size_t>(std::min(cfg.bound_eval_size, data.test.size())));
  std::iota(eval_rows.begin(), eval_rows.end(), Index{0});
  const Dataset eval = subset(data.test, eval_rows);
  const double lambda_r = h_sum.lambda_min_nonzero.value_or(0.0);
  const BoundInputs in =
      estimate_bound_inputs(star, eval, cfg.loss, lambda_r, n, cfg.tau, cfg.zero_tol_rel);
  const LowerBound lb = lower_bound(in, model.train_loss);
  const SymMatrix c_loss = grad_covariance(star, eval, cfg.loss, HessianOptions{cfg.param_cap});

  json bound;
  bound["inputs"] = {{"sigma2_min", in.sigma2_min}, {"sigma2_max", in.sigma2_max},
                     {"alpha", in.alpha},           {"lambda_min_cjac", in.lambda_min_cjac},
                     {"lambda_max_cjac", in.lambda_max_cjac}, {"lambda_r_hess", in.lambda_r_hess},
                     {"n", in.n},                   {"tau", in.tau},
                     {"kept", in.kept},             {"evaluated", in.evaluated}};
  bound["lower_bound"] = optional_json(lb.value);
  bound["divergent"] = lb.divergent;
  bound["inverse_lambda_r"] = optional_json(lb.inverse_lambda_r);
  bound["lambda_reg"] = cfg.lambda_reg;
  bound["complexity_term"] = guarded(
      [&] { return complexity_term(h_eig, c_loss, cfg.lambda_reg, cfg.zero_tol_rel); }, notes,
      "complexity_term");
  bound["lower_bound_complexity"] =
      guarded([&] { return lower_bound_complexity(in, cfg.lambda_reg); }, notes,
              "lower_bound_complexity");
  bound["upper_bound_complexity"] = guarded(
      [&] {
        return upper_bound_complexity(h_eig.values, in.lambda_max_cjac, in.sigma2_max, in.alpha,
                                      cfg.lambda_reg);
      },
      notes, "upper_bound_complexity");
  bound["measured_test_loss"] = test.loss;
  bound["measured_test_loss_se"] = test.loss_se;
  bound["one_sample_train_loss_proxy"] = model.train_loss;
  rec["bound"] = bound;

  const AssumptionReport ar = assumption_report(model, train, cfg.loss, cfg.zero_tol_rel, &parts);
  rec["assumptions"] = {{"hf_ho_ratio", ar.hf_ho_ratio},
                        {"rho", optional_json(ar.rho)},
                        {"grad_norm", ar.grad_norm}};

  json tc = json::array();
  for (const auto& [q, pct] : trace_capture(h_sum, cfg.trace_fractions)) tc.push_back({q, pct});
  rec["trace_capture"] = tc;
  return finish(rec);
}

std::string record_hash(const json& record) {
  json copy = record;
  copy.erase("wall_time");
  copy.erase("record_hash");
  return hex64(fnv1a(copy.dump()));
}

std::string config_hash(const SweepConfig& cfg) {
  json j = to_json(cfg);
  j.erase("workers");
  j.erase("output_dir");
  return hex64(fnv1a(j.dump()));
}

std::vector<json> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records file " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  std::vector<json> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(json::parse(lines[i]));
    } catch (const json::parse_error& e) {
      if (i + 1 == lines.size()) break;
      throw IoError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

SweepResult width_sweep(const SweepConfig& cfg, const std::filesystem::path& records_path,
                        const RecordCallback& on_record) {
  cfg.validate();
  const Index n_seeds = static_cast<Index>(cfg.seeds.size());
  const Index jobs = static_cast<Index>(cfg.widths.size()) * n_seeds;
  const std::string chash = config_hash(cfg);

  std::vector<std::optional<std::string>> slots(static_cast<std::size_t>(jobs));
  SweepResult result;
  result.jobs = jobs;
  if (std::filesystem::exists(records_path)) {
    for (const json& r : read_records(records_path)) {
      if (!r.contains("config_index") || !r.contains("seed") || r.value("config_hash", "") != chash) {
        continue;
      }
      const Index ci = r.at("config_index").get<Index>();
      if (ci < 0 || ci >= jobs) continue;
      if (r.at("seed").get<std::uint64_t>() != cfg.seeds[static_cast<std::size_t>(ci % n_seeds)]) {
        continue;
      }
      if (!slots[static_cast<std::size_t>(ci)]) {
        slots[static_cast<std::size_t>(ci)] = r.dump();
        ++result.reused;
      }
    }
  }
  if (records_path.has_parent_path()) std::filesystem::create_directories(records_path.parent_path());

  const SweepData data = make_sweep_data(cfg);

  std::ofstream out(records_path, std::ios::trunc);
  if (!out) throw IoError("cannot write records file " + records_path.string());

  std::mutex mu;
  std::size_t next_write = 0;
  // Emits every ready slot at the head of the queue; caller holds mu.
  auto drain = [&]() {
    while (next_write < slots.size() && slots[next_write]) {
      out << *slots[next_write] << '\n';
      out.flush();
      if (on_record) on_record(json::parse(*slots[next_write]));
      ++next_write;
    }
  };
  {
    std::lock_guard<std::mutex> lock(mu);
    drain();
  }

  std::vector<Index> todo;
  for (Index ci = 0; ci < jobs; ++ci) {
    if (!slots[static_cast<std::size_t>(ci)]) todo.push_back(ci);
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= todo.size()) return;
      const Index ci = todo[t];
      json rec;
      try {
        rec = run_model(cfg, data, ci / n_seeds, ci % n_seeds);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        cursor.store(todo.size());
        return;
      }
      std::lock_guard<std::mutex> lock(mu);
      if (rec.at("status") == "diverged_nan") ++result.diverged;
      ++result.computed;
      slots[static_cast<std::size_t>(ci)] = rec.dump();
      drain();
    }
  };
  const auto n_workers = static_cast<std::size_t>(
      std::max<Index>(1, std::min<Index>(cfg.workers, static_cast<Index>(todo.size()))));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace hdd::xp
