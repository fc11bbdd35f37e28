#include "xp/report.hpp"

#include "errors.hpp"
#include "xp/redundancy.hpp"
#include "xp/svg.hpp"
#include "xp/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace hdd::xp {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// Reads a dotted path; null or missing yields NaN.
double field(const json& r, std::initializer_list<const char*> path) {
  const json* cur = &r;
  for (const char* key : path) {
    if (!cur->is_object() || !cur->contains(key)) return kNaN;
    cur = &cur->at(key);
  }
  return cur->is_number() ? cur->get<double>() : kNaN;
}

std::string hidden_label(const std::vector<Index>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "x" : "") + std::to_string(hidden[i]);
  return s.empty() ? "0" : s;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::vector<double> means(const std::vector<WidthAggregate>& a, Stat WidthAggregate::*m) {
  std::vector<double> v;
  for (const auto& w : a) v.push_back((w.*m).mean);
  return v;
}

std::vector<double> sds(const std::vector<WidthAggregate>& a, Stat WidthAggregate::*m) {
  std::vector<double> v;
  for (const auto& w : a) v.push_back((w.*m).sd);
  return v;
}

std::vector<std::filesystem::path> sweep_report(const std::vector<json>& records,
                                                const std::filesystem::path& dir,
                                                const ReportOptions& opts) {
  std::vector<WidthAggregate> aggs = aggregate_sweep(records);
  if (opts.smooth) moving_average3(aggs);
  std::vector<std::filesystem::path> written;
  if (opts.kind != ReportKind::svg) {
    written.push_back(dir / "aggregate.csv");
    write_file(written.back(), aggregate_csv(aggs));
  }
  if (opts.kind == ReportKind::csv) return written;

  std::vector<double> p;
  for (const auto& w : aggs) p.push_back(static_cast<double>(w.p));
  std::vector<std::pair<double, std::string>> markers;
  if (!aggs.empty()) {
    markers.emplace_back(static_cast<double>(aggs.front().k * aggs.front().n), "Kn");
    markers.emplace_back(static_cast<double>(aggs.front().n), "n");
  }
  // Log-mean lambda_r back on the linear scale, band as the upper spread.
  std::vector<double> lr;
  std::vector<double> lr_band;
  for (const auto& w : aggs) {
    lr.push_back(std::pow(10.0, w.log10_lambda_r.mean));
    lr_band.push_back(lr.back() * (std::pow(10.0, w.log10_lambda_r.sd) - 1.0));
  }
  const std::string suffix = opts.smooth ? " (3-point average)" : "";
  const auto plot = [&](const std::string& file, PlotSpec spec, std::vector<Series> s) {
    spec.title += suffix;
    spec.x_label = "parameters p";
    spec.markers = markers;
    written.push_back(dir / file);
    write_file(written.back(), line_plot_svg(spec, s));
  };
  plot("test_loss.svg", {"Test and train loss", "", "loss", false, {}},
       {{"test", p, means(aggs, &WidthAggregate::test_loss), sds(aggs, &WidthAggregate::test_loss), kPalette[0]},
        {"train", p, means(aggs, &WidthAggregate::train_loss), sds(aggs, &WidthAggregate::train_loss), kPalette[2]}});
  plot("lambda_r.svg", {"Smallest non-zero Hessian eigenvalue", "", "lambda_r", opts.log_scale, {}},
       {{"lambda_r", p, lr, lr_band, kPalette[1]}});
  plot("bound.svg", {"Lower bound and test loss", "", "loss", opts.log_scale, {}},
       {{"test", p, means(aggs, &WidthAggregate::test_loss), sds(aggs, &WidthAggregate::test_loss), kPalette[0]},
        {"lower bound", p, means(aggs, &WidthAggregate::lower_bound), sds(aggs, &WidthAggregate::lower_bound), kPalette[3]}});
  plot("trace_capture.svg", {"Inverse trace held by the lowest 5% of eigenvalues", "", "percent", false, {}},
       {{"q = 0.05", p, means(aggs, &WidthAggregate::trace_capture_q05), sds(aggs, &WidthAggregate::trace_capture_q05), kPalette[4]}});
  return written;
}

std::vector<std::filesystem::path> redundancy_report(const std::vector<json>& records,
                                                     const std::filesystem::path& dir,
                                                     const ReportOptions& opts) {
  const std::vector<RedundancyCurve> curves = redundancy_curves(records);
  std::vector<std::filesystem::path> written;
  if (opts.kind != ReportKind::svg) {
    std::ostringstream o;
    o << "beta,features,test_mse_mean,test_mse_sd\n";
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.features.size(); ++i) {
        o << c.beta << "," << c.features[i] << "," << fmt(c.test_mse_mean[i]) << ","
          << fmt(c.test_mse_sd[i]) << "\n";
      }
    }
    written.push_back(dir / "redundancy.csv");
    write_file(written.back(), o.str());
  }
  if (opts.kind != ReportKind::csv) {
    std::vector<Series> s;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      Series ser;
      ser.name = "beta = " + std::to_string(curves[i].beta);
      for (Index j : curves[i].features) ser.x.push_back(static_cast<double>(j));
      ser.y = curves[i].test_mse_mean;
      ser.band = curves[i].test_mse_sd;
      ser.color = kPalette[i % std::size(kPalette)];
      s.push_back(std::move(ser));
    }
    written.push_back(dir / "redundancy.svg");
    write_file(written.back(),
               line_plot_svg({"Least-squares test error vs included features", "features",
                              "test MSE", opts.log_scale, {}},
                             s));
  }
  return written;
}

}  // namespace

Stat summarize(const std::vector<double>& values) {
  Stat s;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++s.count;
  }
  if (s.count == 0) return {kNaN, kNaN, 0};
  s.mean = sum / static_cast<double>(s.count);
  double var = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) var += (v - s.mean) * (v - s.mean);
  }
  s.sd = s.count > 1 ? std::sqrt(var / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

std::vector<WidthAggregate> aggregate_sweep(const std::vector<json>& records) {
  if (records.empty()) throw InputError("report: no records");
  struct Acc {
    WidthAggregate agg;
    std::vector<double> train, test, loglr, lb, hf, rho, tc;
  };
  std::vector<Index> order;
  std::map<Index, Acc> groups;
  for (const json& r : records) {
    const Index wi = r.at("width_index").get<Index>();
    if (!groups.count(wi)) {
      order.push_back(wi);
      Acc& a = groups[wi];
      a.agg.width_index = wi;
      a.agg.hidden = r.at("hidden").get<std::vector<Index>>();
      a.agg.p = r.at("p").get<Index>();
      a.agg.n = r.at("n").get<Index>();
      a.agg.k = r.at("K").get<Index>();
    }
    Acc& a = groups[wi];
    const std::string status = r.at("status").get<std::string>();
    if (status != "converged" && status != "interpolated") {
      ++a.agg.excluded;
      continue;
    }
    ++a.agg.models;
    if (status == "interpolated") ++a.agg.interpolated;
    if (r.contains("bound") && r["bound"].value("divergent", false)) ++a.agg.divergent;
    a.train.push_back(field(r, {"train_loss"}));
    a.test.push_back(field(r, {"test_loss"}));
    a.loglr.push_back(std::log10(field(r, {"spectrum", "lambda_min_nonzero"})));
    a.lb.push_back(field(r, {"bound", "lower_bound"}));
    a.hf.push_back(field(r, {"assumptions", "hf_ho_ratio"}));
    a.rho.push_back(field(r, {"assumptions", "rho"}));
    double tc = kNaN;
    if (r.contains("trace_capture") && r["trace_capture"].is_array()) {
      for (const auto& e : r["trace_capture"]) {
        if (std::abs(e.at(0).get<double>() - 0.05) < 1e-12) tc = e.at(1).get<double>();
      }
    }
    a.tc.push_back(tc);
  }
  std::vector<WidthAggregate> out;
  for (Index wi : order) {
    Acc& a = groups[wi];
    a.agg.train_loss = summarize(a.train);
    a.agg.test_loss = summarize(a.test);
    a.agg.log10_lambda_r = summarize(a.loglr);
    a.agg.lower_bound = summarize(a.lb);
    a.agg.hf_ho_ratio = summarize(a.hf);
    a.agg.rho = summarize(a.rho);
    a.agg.trace_capture_q05 = summarize(a.tc);
    out.push_back(a.agg);
  }
  return out;
}

void moving_average3(std::vector<WidthAggregate>& aggs) {
  const std::vector<WidthAggregate> src = aggs;
  const auto n = src.size();
  for (Stat WidthAggregate::*m :
       {&WidthAggregate::train_loss, &WidthAggregate::test_loss, &WidthAggregate::log10_lambda_r,
        &WidthAggregate::lower_bound, &WidthAggregate::hf_ho_ratio, &WidthAggregate::rho,
        &WidthAggregate::trace_capture_q05}) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      int cnt = 0;
      for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(n - 1, i + 1); ++j) {
        if (std::isfinite((src[j].*m).mean)) {
          sum += (src[j].*m).mean;
          ++cnt;
        }
      }
      (aggs[i].*m).mean = cnt ? sum / cnt : kNaN;
    }
  }
}

const std::vector<std::string>& aggregate_csv_columns() {
  static const std::vector<std::string> cols = {
      "width_index",         "hidden",
      "p",                   "models",
      "excluded",            "interpolated",
      "divergent",           "train_loss_mean",
      "train_loss_sd",       "test_loss_mean",
      "test_loss_sd",        "log10_lambda_r_mean",
      "log10_lambda_r_sd",   "lower_bound_mean",
      "lower_bound_sd",      "hf_ho_ratio_mean",
      "rho_mean",            "rho_sd",
      "trace_capture_q05_mean"};
  return cols;
}

std::string aggregate_csv(const std::vector<WidthAggregate>& aggs) {
  std::ostringstream o;
  const auto& cols = aggregate_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
  o << "\n";
  for (const auto& w : aggs) {
    o << w.width_index << "," << hidden_label(w.hidden) << "," << w.p << "," << w.models << ","
      << w.excluded << "," << w.interpolated << "," << w.divergent << "," << fmt(w.train_loss.mean)
      << "," << fmt(w.train_loss.sd) << "," << fmt(w.test_loss.mean) << "," << fmt(w.test_loss.sd)
      << "," << fmt(w.log10_lambda_r.mean) << "," << fmt(w.log10_lambda_r.sd) << ","
      << fmt(w.lower_bound.mean) << "," << fmt(w.lower_bound.sd) << "," << fmt(w.hf_ho_ratio.mean)
      << "," << fmt(w.rho.mean) << "," << fmt(w.rho.sd) << "," << fmt(w.trace_capture_q05.mean)
      << "\n";
  }
  return o.str();
}

ReportKind report_kind_from_string(const std::string& s) {
  if (s == "csv") return ReportKind::csv;
  if (s == "svg") return ReportKind::svg;
  if (s == "both") return ReportKind::both;
  throw ConfigError("unknown report kind '" + s + "' (expected csv, svg or both)");
}

std::vector<std::filesystem::path> emit_report(const std::filesystem::path& records_path,
                                               const std::filesystem::path& out_dir,
                                               const ReportOptions& opts) {
  const std::vector<json> records = read_records(records_path);
  if (records.empty()) throw InputError("report: " + records_path.string() + " holds no records");
  std::filesystem::create_directories(out_dir);
  if (records.front().contains("beta")) return redundancy_report(records, out_dir, opts);
  return sweep_report(records, out_dir, opts);
}

}  // namespace hdd::xp
