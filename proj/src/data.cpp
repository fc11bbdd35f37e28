#include "data.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace hdd {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, Index row, std::size_t col, const std::string& name) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError("csv row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                     " (" + name + "): cannot parse '" + cell + "' as a finite number");
  }
  return value;
}

}  // namespace

std::string to_string(TaskKind t) {
  return t == TaskKind::classification ? "classification" : "regression";
}

Target Dataset::target(Index i) const {
  Target t;
  t.y = y.row(i).transpose();
  if (task == TaskKind::classification) t.label = labels[static_cast<std::size_t>(i)];
  return t;
}

void Dataset::validate() const {
  if (x.rows() < 1) throw InputError("dataset is empty");
  if (!x.allFinite() || !y.allFinite()) throw InputError("dataset has non-finite entries");
  if (y.rows() != x.rows() || y.cols() != k) throw InputError("dataset target shape mismatch");
  if (task == TaskKind::classification) {
    if (static_cast<Index>(labels.size()) != x.rows()) {
      throw InputError("dataset label count mismatch");
    }
    for (Index l : labels) {
      if (l < 0 || l >= k) throw InputError("class index " + std::to_string(l) + " >= K");
    }
  }
}

Dataset make_classification(Matrix x, std::vector<Index> labels, Index k) {
  Dataset d;
  d.task = TaskKind::classification;
  d.k = k;
  d.y = Matrix::Zero(x.rows(), k);
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw InputError("make_classification: label count mismatch");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw InputError("class index " + std::to_string(labels[i]) + " >= K = " +
                       std::to_string(k));
    }
    d.y(static_cast<Index>(i), labels[i]) = 1.0;
  }
  d.x = std::move(x);
  d.labels = std::move(labels);
  d.validate();
  return d;
}

Dataset make_regression(Matrix x, Matrix y) {
  Dataset d;
  d.task = TaskKind::regression;
  d.k = y.cols();
  d.x = std::move(x);
  d.y = std::move(y);
  d.validate();
  return d;
}

Dataset subset(const Dataset& data, const std::vector<Index>& rows) {
  Dataset out;
  out.task = data.task;
  out.k = data.k;
  out.x.resize(static_cast<Index>(rows.size()), data.dim());
  out.y.resize(static_cast<Index>(rows.size()), data.k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= data.size()) throw InputError("subset: row index out of range");
    out.x.row(static_cast<Index>(i)) = data.x.row(r);
    out.y.row(static_cast<Index>(i)) = data.y.row(r);
    if (data.task == TaskKind::classification) {
      out.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
    }
  }
  out.provenance = {{"subset_of", data.provenance}, {"rows", rows.size()}};
  return out;
}

Dataset gen_classification(Index n, Index d, Index k, double noise_rate, std::uint64_t seed,
                           std::uint64_t stream, const ClusterOptions& opts) {
  if (n < 1 || d < 1 || k < 1) throw InputError("gen_classification: n, d, K must be >= 1");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw InputError("gen_classification: noise rate must lie in [0, 1]");
  }
  if (!(opts.input_scale > 0.0) || !std::isfinite(opts.input_scale)) {
    throw InputError("gen_classification: input_scale must be a positive finite number");
  }
  Rng mean_rng(derive_seed(seed, 0xC1A55));
  Matrix means(k, d);
  for (Index c = 0; c < k; ++c) {
    for (Index j = 0; j < d; ++j) means(c, j) = opts.mean_scale * standard_normal(mean_rng);
  }

  Rng rng(derive_seed(seed, 0x5A3B1E, stream));
  Matrix x(n, d);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index c = i % k;  // balanced classes before shuffling the rows
    labels[static_cast<std::size_t>(i)] = c;
    for (Index j = 0; j < d; ++j) x(i, j) = means(c, j) + standard_normal(rng);
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  shuffle(order, rng);
  Matrix xs(n, d);
  std::vector<Index> ls(labels.size());
  for (Index i = 0; i < n; ++i) {
    xs.row(i) = opts.input_scale * x.row(order[static_cast<std::size_t>(i)]);
    ls[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }

  const auto n_noisy = static_cast<Index>(std::llround(noise_rate * static_cast<double>(n)));
  if (n_noisy > 0) {
    Rng noise_rng(derive_seed(seed, 0x7015E, stream));
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    shuffle(idx, noise_rng);
    for (Index i = 0; i < n_noisy; ++i) {
      ls[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] =
          static_cast<Index>(uniform_index(noise_rng, static_cast<std::uint64_t>(k)));
    }
  }

  Dataset out = make_classification(std::move(xs), std::move(ls), k);
  out.provenance = {{"source", "synthetic_classification"},
                    {"seed", seed},
                    {"stream", stream},
                    {"n", n},
                    {"d", d},
                    {"k", k},
                    {"label_noise", noise_rate},
                    {"label_noise_mode", "uniform_over_all_classes"},
                    {"mean_scale", opts.mean_scale},
                    {"input_scale", opts.input_scale}};
  return out;
}

RedundantDesign gen_redundant_regression(Index n, Index d, Index beta, double noise_sd,
                                         std::uint64_t seed, std::uint64_t stream) {
  if (n < 1 || d < 1 || beta < 0) throw InputError("gen_redundant_regression: bad sizes");
  if (!(noise_sd >= 0.0)) throw InputError("gen_redundant_regression: noise_sd must be >= 0");
  const Index group = beta + 1;

  // Fixed model: mixing coefficients and planted weights depend on seed only.
  Rng model_rng(derive_seed(seed, 0xDE5164));
  Matrix mix = Matrix::Zero(d * beta, 3);
  for (Index i = 0; i < mix.rows(); ++i) {
    for (Index t = 0; t < 3; ++t) mix(i, t) = standard_normal(model_rng);
  }
  Vector planted(d);
  for (Index j = 0; j < d; ++j) planted(j) = standard_normal(model_rng) / std::sqrt(double(d));

  Rng rng(derive_seed(seed, 0x2A3B, stream));
  Matrix base(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) base(i, j) = standard_normal(rng);
  }
  Vector y = base * planted;
  for (Index i = 0; i < n; ++i) y(i) += noise_sd * standard_normal(rng);

  Matrix x(n, d * group);
  for (Index g = 0; g < d; ++g) {
    x.col(g * group) = base.col(g);
    for (Index b = 0; b < beta; ++b) {
      Vector col = Vector::Zero(n);
      for (Index t = 0; t < 3 && t <= g; ++t) col += mix(g * beta + b, t) * base.col(g - t);
      x.col(g * group + 1 + b) = col;
    }
  }

  RedundantDesign out;
  out.base_dim = d;
  out.beta = beta;
  out.x = std::move(x);
  out.y = std::move(y);
  out.planted = std::move(planted);
  out.provenance = {{"source", "synthetic_redundant_regression"},
                    {"seed", seed},
                    {"stream", stream},
                    {"n", n},
                    {"d", d},
                    {"beta", beta},
                    {"noise_sd", noise_sd}};
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (schema.d < 1 || schema.k < 1) throw InputError("csv schema: d and K must be >= 1");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open csv file " + path.string());

  std::vector<std::string> expected;
  for (Index j = 0; j < schema.d; ++j) expected.push_back("x" + std::to_string(j));
  if (schema.task == TaskKind::classification) {
    expected.emplace_back("y");
  } else {
    for (Index j = 0; j < schema.k; ++j) expected.push_back("y" + std::to_string(j));
  }

  std::string line;
  if (!std::getline(in, line)) throw InputError("csv " + path.string() + ": missing header");
  const auto header = split_csv_line(line);
  if (header != expected) {
    throw InputError("csv " + path.string() + ": header does not match schema (d = " +
                     std::to_string(schema.d) + ", " + to_string(schema.task) +
                     "); expected " + std::to_string(expected.size()) + " columns '" +
                     expected.front() + ".." + expected.back() + "', got " +
                     std::to_string(header.size()));
  }

  std::vector<std::vector<double>> rows;
  std::vector<Index> labels;
  Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size()) {
      throw InputError("csv row " + std::to_string(row) + ": has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(expected.size()));
    }
    std::vector<double> values;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(parse_cell(cells[c], row, c, expected[c]));
    }
    if (schema.task == TaskKind::classification) {
      const double v = values.back();
      if (v < 0 || v != std::floor(v)) {
        throw InputError("csv row " + std::to_string(row) + ", column " +
                         std::to_string(cells.size()) + " (y): class label must be a "
                         "non-negative integer");
      }
      if (v >= static_cast<double>(schema.k)) {
        throw InputError("csv row " + std::to_string(row) + ", column " +
                         std::to_string(cells.size()) + " (y): class index " + cells.back() +
                         " >= K = " + std::to_string(schema.k));
      }
      labels.push_back(static_cast<Index>(v));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InputError("csv " + path.string() + ": no data rows");

  const auto n = static_cast<Index>(rows.size());
  Matrix x(n, schema.d);
  Matrix y(n, schema.k);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < schema.d; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
    if (schema.task == TaskKind::regression) {
      for (Index j = 0; j < schema.k; ++j) y(i, j) = r[static_cast<std::size_t>(schema.d + j)];
    }
  }
  Dataset out = schema.task == TaskKind::classification
                    ? make_classification(std::move(x), std::move(labels), schema.k)
                    : make_regression(std::move(x), std::move(y));
  out.provenance = {{"source", "csv"}, {"path", path.string()}, {"rows", n}};
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write csv file " + path.string());
  for (Index j = 0; j < data.dim(); ++j) out << (j ? "," : "") << 'x' << j;
  if (data.task == TaskKind::classification) {
    out << ",y\n";
  } else {
    for (Index j = 0; j < data.k; ++j) out << ",y" << j;
    out << '\n';
  }
  out << std::setprecision(17);
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) out << (j ? "," : "") << data.x(i, j);
    if (data.task == TaskKind::classification) {
      out << ',' << data.labels[static_cast<std::size_t>(i)];
    } else {
      for (Index j = 0; j < data.k; ++j) out << ',' << data.y(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing csv file " + path.string());
}

void write_provenance_sidecar(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path.string() + ".json");
  if (!out) throw IoError("cannot write provenance sidecar for " + path.string());
  nlohmann::json doc = {{"task", to_string(data.task)},
                        {"n", data.size()},
                        {"d", data.dim()},
                        {"k", data.k},
                        {"provenance", data.provenance}};
  out << doc.dump(2) << '\n';
}

}  // namespace hdd
