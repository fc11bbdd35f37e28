#include "data.hpp"
#include "errors.hpp"
#include "linalg.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

using namespace hdd;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("hdd_test_" + name); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string error_of(const fs::path& p, const CsvSchema& s) {
  try {
    load_csv(p, s);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// Plug-in mutual information (nats) between two label vectors.
double mutual_information(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::map<std::pair<Index, Index>, double> joint;
  std::map<Index, double> pa, pb;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1 / n;
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
  }
  double mi = 0.0;
  for (const auto& [key, p] : joint) mi += p * std::log(p / (pa[key.first] * pb[key.second]));
  return mi;
}

}  // namespace

TEST_CASE("gen_classification: reproducible and shaped") {
  const Dataset a = gen_classification(50, 7, 3, 0.2, 11);
  const Dataset b = gen_classification(50, 7, 3, 0.2, 11);
  CHECK(a.size() == 50);
  CHECK(a.dim() == 7);
  CHECK((a.x.array() == b.x.array()).all());
  CHECK(a.labels == b.labels);
  CHECK((a.x - gen_classification(50, 7, 3, 0.2, 12).x).norm() > 0.0);
  CHECK((a.x - gen_classification(50, 7, 3, 0.2, 11, 1).x).norm() > 0.0);
  for (Index i = 0; i < 50; ++i) CHECK(a.y.row(i).sum() == 1.0);
  CHECK(a.provenance["label_noise"] == 0.2);
}

TEST_CASE("gen_classification: clean labels follow the clusters") {
  // Well separated clusters: a nearest-mean rule fitted on stream 0 labels
  // stream 1 almost perfectly.
  const ClusterOptions wide{6.0, 1.0};
  const Dataset train = gen_classification(400, 10, 4, 0.0, 3, 0, wide);
  const Dataset test = gen_classification(400, 10, 4, 0.0, 3, 1, wide);
  Matrix means = Matrix::Zero(4, 10);
  Vector counts = Vector::Zero(4);
  for (Index i = 0; i < 400; ++i) {
    means.row(train.labels[static_cast<std::size_t>(i)]) += train.x.row(i);
    counts(train.labels[static_cast<std::size_t>(i)]) += 1;
  }
  for (Index c = 0; c < 4; ++c) means.row(c) /= counts(c);
  int right = 0;
  for (Index i = 0; i < 400; ++i) {
    Index best = 0;
    (means.rowwise() - test.x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    right += best == test.labels[static_cast<std::size_t>(i)];
  }
  CHECK(right >= 396);
}

TEST_CASE("gen_classification: label noise") {
  const Dataset clean = gen_classification(5000, 5, 4, 0.0, 9);
  const Dataset noisy = gen_classification(5000, 5, 4, 0.2, 9);
  const Dataset random = gen_classification(5000, 5, 4, 1.0, 9);
  CHECK((clean.x.array() == noisy.x.array()).all());
  int changed = 0;
  for (std::size_t i = 0; i < 5000; ++i) changed += clean.labels[i] != noisy.labels[i];
  // 1000 resampled labels, each kept with probability 1/4.
  CHECK(changed <= 1000);
  CHECK(std::abs(changed - 750) <= 60);
  CHECK(mutual_information(clean.labels, random.labels) <= 0.01);
  CHECK(mutual_information(clean.labels, clean.labels) == doctest::Approx(std::log(4.0)).epsilon(1e-3));
  CHECK_THROWS_AS(gen_classification(10, 2, 2, 1.5, 0), InputError);
}

TEST_CASE("gen_classification: input scale multiplies every coordinate") {
  const Dataset a = gen_classification(20, 4, 2, 0.0, 5, 0, {0.35, 1.0});
  const Dataset b = gen_classification(20, 4, 2, 0.0, 5, 0, {0.35, 0.5});
  CHECK((b.x - 0.5 * a.x).norm() <= 1e-15);
}

TEST_CASE("gen_redundant_regression: ranks of prefixes") {
  const RedundantDesign plain = gen_redundant_regression(50, 8, 0, 0.1, 1);
  CHECK(plain.x.cols() == 8);
  CHECK(matrix_rank(plain.x) == 8);

  for (Index beta : {1, 2, 3}) {
    const RedundantDesign r = gen_redundant_regression(100, 20, beta, 0.1, 2);
    CHECK(r.x.cols() == 20 * (beta + 1));
    CHECK(matrix_rank(r.x) == 20);
    for (Index j = 1; j <= r.x.cols(); j += 3) {
      const Index expect = (j + beta) / (beta + 1);
      CHECK(matrix_rank(r.x.leftCols(j)) == expect);
    }
  }
  const RedundantDesign one = gen_redundant_regression(100, 20, 1, 0.1, 3);
  CHECK(matrix_rank(one.x.leftCols(10)) == 5);
  const RedundantDesign wide = gen_redundant_regression(10, 20, 1, 0.1, 3);
  CHECK(matrix_rank(wide.x) == 10);
}

TEST_CASE("csv: round trip and sidecar") {
  const fs::path p = temp_file("round.csv");
  const Dataset a = gen_classification(30, 3, 3, 0.1, 4);
  write_csv(a, p);
  const Dataset b = load_csv(p, {3, TaskKind::classification, 3});
  CHECK((a.x.array() == b.x.array()).all());
  CHECK(a.labels == b.labels);

  const Dataset r = make_regression(a.x, a.x.leftCols(2) * 1.7);
  write_csv(r, p);
  const Dataset r2 = load_csv(p, {3, TaskKind::regression, 2});
  CHECK((r.y.array() == r2.y.array()).all());

  write_provenance_sidecar(a, p);
  std::ifstream side(p.string() + ".json");
  const auto doc = nlohmann::json::parse(side);
  CHECK(doc["provenance"]["source"] == "synthetic_classification");
  fs::remove(p);
  fs::remove(p.string() + ".json");
}

TEST_CASE("csv: diagnostics") {
  const fs::path p = temp_file("bad.csv");
  const CsvSchema s{2, TaskKind::classification, 3};
  std::string good = "x0,x1,y\n";
  for (int i = 0; i < 6; ++i) good += "0.5,1.5,1\n";

  write_text(p, good + "0.5,1.5\n");
  CHECK(error_of(p, s).find("row 7") != std::string::npos);

  write_text(p, good + "0.5,abc,1\n");
  const std::string bad_cell = error_of(p, s);
  CHECK(bad_cell.find("row 7") != std::string::npos);
  CHECK(bad_cell.find("column 2") != std::string::npos);

  write_text(p, good + "0.5,1.5,3\n");
  CHECK(error_of(p, s).find("row 7") != std::string::npos);

  write_text(p, good);
  CHECK(error_of(p, {3, TaskKind::classification, 3}).find("header") != std::string::npos);
  CHECK(load_csv(p, s).size() == 6);

  CHECK_THROWS_AS(load_csv(temp_file("missing.csv"), s), IoError);
  fs::remove(p);
}

TEST_CASE("dataset validation and subsets") {
  CHECK_THROWS_AS(make_classification(Matrix::Zero(2, 2), {0, 5}, 3), InputError);
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = NAN;
  CHECK_THROWS_AS(make_regression(x, Matrix::Zero(2, 1)), InputError);
  const Dataset a = gen_classification(10, 2, 2, 0.0, 1);
  const Dataset s = subset(a, {3, 7});
  CHECK(s.size() == 2);
  CHECK((s.x.row(1).array() == a.x.row(7).array()).all());
  CHECK(s.labels[0] == a.labels[3]);
}
