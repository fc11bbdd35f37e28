#include <hdd/hdd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3 };

int exit_code(hdd_status s) {
  switch (s) {
    case HDD_OK: return kOk;
    case HDD_ERR_CONFIG: return kConfig;
    case HDD_ERR_NUMERIC: return kNumeric;
    default: return kFailure;
  }
}

int report(hdd_status s, const std::string& what) {
  if (s != HDD_OK) std::cerr << "hdd " << what << ": " << hdd_last_error() << "\n";
  return exit_code(s);
}

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::string config;
  std::string out = "out";
  long long workers = 0;
  std::optional<unsigned long long> seed;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "JSON configuration file");
  if (needs_config) opt->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", c.workers, "concurrent jobs (overrides the config)");
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
}

// An absent --config means every default.
std::optional<std::string> config_text(const Common& c) {
  if (c.config.empty()) return std::string("{}");
  auto text = slurp(c.config);
  if (!text) std::cerr << "hdd: cannot read config " << c.config << "\n";
  return text;
}

void print_sweep_record(const char* text, void*) {
  const auto r = nlohmann::json::parse(text);
  std::string lr = "-";
  if (r.contains("spectrum") && r["spectrum"].is_object() && r["spectrum"]["lambda_min_nonzero"].is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r["spectrum"]["lambda_min_nonzero"].get<double>());
    lr = buf;
  }
  std::string test = "-";
  if (r.contains("test_loss") && r["test_loss"].is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", r["test_loss"].get<double>());
    test = buf;
  }
  std::cerr << "[" << r.value("config_index", -1) << "] p=" << r.value("p", 0)
            << " seed=" << r.value("seed", 0ull) << " " << r.value("status", std::string("?"))
            << " test=" << test << " lambda_r=" << lr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hessian spectra, influence bounds and double-descent sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hdd_version()));

  Common sweep_o, red_o, loo_o, rmt_o, hess_o;
  auto* sweep = app.add_subcommand("sweep", "train a width grid and write records.jsonl");
  add_common(sweep, sweep_o);
  bool quiet = false;
  sweep->add_flag("--quiet", quiet, "no per-record progress on stderr");
  auto* red = app.add_subcommand("redundancy", "least-squares sweep over redundant feature prefixes");
  add_common(red, red_o);
  auto* loo = app.add_subcommand("loo", "leave-one-out estimates and per-sample leverages");
  add_common(loo, loo_o);
  auto* rmt = app.add_subcommand("rmt", "extreme eigenvalues of sample covariance matrices");
  add_common(rmt, rmt_o);
  auto* hess = app.add_subcommand("hessian", "dump the Hessian of one trained grid model");
  add_common(hess, hess_o);

  std::string records;
  std::string report_out = "report";
  std::string kind = "both";
  bool linear = false;
  bool smooth = false;
  auto* rep = app.add_subcommand("report", "aggregate CSV and SVG plots from a records file");
  rep->add_option("--records", records, "records JSONL file")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", report_out, "output directory")->capture_default_str();
  rep->add_option("--kind", kind, "csv, svg or both")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();
  rep->add_flag("--linear", linear, "linear axes for lambda_r and the bound");
  rep->add_flag("--smooth", smooth, "3-point moving average over successive widths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  auto run = [&](const Common& c, const char* name, auto fn) -> int {
    const auto text = config_text(c);
    if (!text) return kConfig;
    const int has_seed = c.seed ? 1 : 0;
    const unsigned long long seed = c.seed.value_or(0);
    return report(fn(text->c_str(), c.out.c_str(), has_seed, seed), name);
  };

  if (*sweep) {
    return run(sweep_o, "sweep", [&](const char* cfg, const char* out, int hs, unsigned long long s) {
      const hdd_status st = hdd_sweep_run(cfg, out, sweep_o.workers, hs, s,
                                          quiet ? nullptr : print_sweep_record, nullptr);
      if (st == HDD_OK) std::cout << out << "/records.jsonl\n";
      return st;
    });
  }
  if (*red) {
    return run(red_o, "redundancy", [](const char* cfg, const char* out, int hs, unsigned long long s) {
      const hdd_status st = hdd_redundancy_run(cfg, out, hs, s, nullptr, nullptr);
      if (st == HDD_OK) {
        if (auto peaks = slurp(std::string(out) + "/redundancy_peaks.csv")) std::cout << *peaks;
      }
      return st;
    });
  }
  if (*loo) {
    return run(loo_o, "loo", [](const char* cfg, const char* out, int hs, unsigned long long s) {
      const hdd_status st = hdd_loo_run(cfg, out, hs, s);
      if (st == HDD_OK) {
        if (auto summary = slurp(std::string(out) + "/loo_summary.json")) std::cout << *summary;
      }
      return st;
    });
  }
  if (*rmt) {
    return run(rmt_o, "rmt", [](const char* cfg, const char* out, int hs, unsigned long long s) {
      const hdd_status st = hdd_rmt_run(cfg, out, hs, s);
      if (st == HDD_OK) {
        if (auto table = slurp(std::string(out) + "/rmt.csv")) std::cout << *table;
      }
      return st;
    });
  }
  if (*hess) {
    return run(hess_o, "hessian", [](const char* cfg, const char* out, int hs, unsigned long long s) {
      const hdd_status st = hdd_hessian_run(cfg, out, hs, s);
      if (st == HDD_OK) {
        if (auto summary = slurp(std::string(out) + "/hessian.json")) std::cout << *summary;
      }
      return st;
    });
  }
  if (*rep) {
    return report(hdd_report(records.c_str(), report_out.c_str(), kind.c_str(), linear ? 0 : 1,
                             smooth ? 1 : 0),
                  "report");
  }
  return kFailure;
}
