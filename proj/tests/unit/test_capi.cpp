#include <hdd/hdd.h>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hdd_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HDD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("datasets and models through opaque handles") {
  hdd_dataset* data = nullptr;
  REQUIRE(hdd_dataset_classification(24, 5, 3, 0.0, 7, 0, 0.35, 0.0, &data) == HDD_OK);
  CHECK(hdd_dataset_size(data) == 24);
  CHECK(hdd_dataset_dim(data) == 5);

  hdd_train_options opts = hdd_train_defaults();
  opts.epochs = 30;
  const int64_t hidden[] = {40};
  hdd_model* model = nullptr;
  REQUIRE(hdd_model_train(data, hidden, 1, HDD_LOSS_MSE, &opts, &model) == HDD_OK);
  CHECK(hdd_model_param_count(model) == 40 * 5 + 40 + 3 * 40 + 3);
  CHECK(std::string(hdd_model_status(model)) != "");
  CHECK(std::isfinite(hdd_model_train_loss(model)));

  hdd_spectrum s{};
  REQUIRE(hdd_hessian_spectrum(model, data, HDD_LOSS_MSE, HDD_PART_OUTER, 1e-10, &s) == HDD_OK);
  CHECK(s.dim == hdd_model_param_count(model));
  CHECK(s.rank == 3 * 24);
  CHECK(s.has_lambda_r == 1);

  const fs::path dir = scratch("dump");
  REQUIRE(hdd_hessian_dump(model, data, HDD_LOSS_MSE, HDD_PART_LOSS, (dir / "h.bin").c_str()) == HDD_OK);
  CHECK(fs::file_size(dir / "h.bin") == 16 + static_cast<std::uintmax_t>(s.dim * s.dim * 8));

  hdd_model_free(model);
  hdd_dataset_free(data);
}

TEST_CASE("status codes and last error") {
  hdd_dataset* data = nullptr;
  CHECK(hdd_dataset_classification(0, 5, 3, 0.0, 7, 0, 0.35, 0.0, &data) == HDD_ERR_INPUT);
  CHECK(std::string(hdd_last_error()).size() > 0);
  CHECK(data == nullptr);
  CHECK(hdd_dataset_load_csv("/nonexistent/file.csv", 2, "classification", 2, &data) == HDD_ERR_IO);
  CHECK(hdd_sweep_run("{\"widths\": []}", scratch("bad").c_str(), 0, 0, 0, nullptr, nullptr) == HDD_ERR_CONFIG);
  CHECK(hdd_sweep_run("{not json", scratch("bad2").c_str(), 0, 0, 0, nullptr, nullptr) == HDD_ERR_CONFIG);

  REQUIRE(hdd_dataset_classification(10, 30, 2, 0.0, 7, 0, 0.35, 0.0, &data) == HDD_OK);
  hdd_train_options opts = hdd_train_defaults();
  opts.epochs = 0;
  const int64_t hidden[] = {200};
  hdd_model* model = nullptr;
  REQUIRE(hdd_model_train(data, hidden, 1, HDD_LOSS_MSE, &opts, &model) == HDD_OK);
  hdd_spectrum s{};
  CHECK(hdd_hessian_spectrum(model, data, HDD_LOSS_MSE, HDD_PART_LOSS, 1e-10, &s) == HDD_ERR_CAPACITY);
  hdd_model_free(model);
  hdd_dataset_free(data);

  const char* resolved = nullptr;
  REQUIRE(hdd_sweep_config_resolve("{}", &resolved) == HDD_OK);
  CHECK(std::string(hdd_last_error()).empty());
  CHECK(nlohmann::json::parse(resolved)["tau"] == 1e-3);
}

TEST_CASE("leave-one-out on a linear design") {
  const double x[] = {1, 1, 1};
  const double y[] = {0, 0, 3};
  hdd_loo_result r{};
  double lev[3];
  REQUIRE(hdd_loo_linear(x, 3, 1, y, 0.0, 1, lev, nullptr, &r) == HDD_OK);
  CHECK(r.loo2 == doctest::Approx(4.5));
  CHECK(r.exact_ls == doctest::Approx(4.5));
  CHECK(lev[1] == doctest::Approx(1.0 / 3.0));
  double brute = 0.0;
  REQUIRE(hdd_loo_brute_force(x, 3, 1, y, 0.0, &brute) == HDD_OK);
  CHECK(brute == doctest::Approx(4.5));
  REQUIRE(hdd_loo_linear(x, 3, 1, y, 0.5, 1, nullptr, nullptr, &r) == HDD_OK);
  CHECK(std::isnan(r.exact_ls));
}

TEST_CASE("edge law") {
  hdd_edge_result e{};
  REQUIRE(hdd_rmt_edge(HDD_DIST_RADEMACHER, 100, 400, 3, 1, 1.0, &e) == HDD_OK);
  CHECK(e.gamma == doctest::Approx(0.25));
  CHECK(e.predicted_min == doctest::Approx(0.25));
  CHECK(e.lambda_min_mean < e.lambda_max_mean);
}

TEST_CASE("experiment runners write their files") {
  const fs::path dir = scratch("runners");
  int seen = 0;
  const char* cfg = R"({"dataset": {"n_train": 10, "n_test": 20, "d": 3, "k": 2},
                        "widths": [2, 4], "seeds": [0], "schedule": {"epochs": 5}, "bound_eval_size": 10})";
  REQUIRE(hdd_sweep_run(cfg, (dir / "sweep").c_str(), 1, 1, 5,
                        [](const char*, void* u) { ++*static_cast<int*>(u); }, &seen) == HDD_OK);
  CHECK(seen == 2);
  CHECK(fs::exists(dir / "sweep" / "records.jsonl"));
  CHECK(fs::exists(dir / "sweep" / "config.json"));
  REQUIRE(hdd_report((dir / "sweep" / "records.jsonl").c_str(), (dir / "rep").c_str(), "csv", 1, 0) == HDD_OK);
  CHECK(fs::exists(dir / "rep" / "aggregate.csv"));
  CHECK(hdd_report((dir / "sweep" / "records.jsonl").c_str(), (dir / "rep").c_str(), "pdf", 1, 0) ==
        HDD_ERR_CONFIG);

  REQUIRE(hdd_redundancy_run(R"({"n": 10, "d_base": 20, "betas": [0], "trials": 1, "n_test": 50})",
                             (dir / "red").c_str(), 0, 0, nullptr, nullptr) == HDD_OK);
  CHECK(fs::exists(dir / "red" / "redundancy_peaks.csv"));
  REQUIRE(hdd_loo_run("{}", (dir / "loo").c_str(), 1, 3) == HDD_OK);
  CHECK(fs::exists(dir / "loo" / "loo_samples.csv"));
  REQUIRE(hdd_rmt_run(R"({"n": 200, "gammas": [0.25], "trials": 2, "c": 1.0})", (dir / "rmt").c_str(), 0, 0) == HDD_OK);
  CHECK(fs::exists(dir / "rmt" / "rmt.csv"));
  REQUIRE(hdd_hessian_run(R"({"dataset": {"n_train": 8, "d": 3, "k": 2}, "widths": [3], "schedule": {"epochs": 5},
                               "model": {"width_index": 0, "seed_index": 0, "parts": ["loss", "func"]}})",
                          (dir / "hess").c_str(), 0, 0) == HDD_OK);
  CHECK(fs::exists(dir / "hess" / "hessian_loss.bin"));
  CHECK(fs::exists(dir / "hess" / "hessian_func.bin"));
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  write_text(dir / "ok.json", R"({"dataset": {"n_train": 8, "n_test": 10, "d": 3, "k": 2}, "widths": [2],
                                  "seeds": [0], "schedule": {"epochs": 3}, "bound_eval_size": 5})");
  write_text(dir / "empty.json", R"({"widths": []})");
  write_text(dir / "broken.json", "{");
  CHECK(run_cli("sweep --quiet --config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(run_cli("report --records " + (dir / "o" / "records.jsonl").string() + " --out " + (dir / "r").string()) == 0);
  CHECK(run_cli("sweep --config " + (dir / "empty.json").string() + " --out " + (dir / "o2").string()) == 2);
  CHECK(run_cli("sweep --config " + (dir / "broken.json").string() + " --out " + (dir / "o3").string()) == 2);
  CHECK(run_cli("sweep --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("--version") == 0);
}
