#include "xp/redundancy.hpp"

#include "data.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "loo.hpp"
#include "rng.hpp"

#include <cmath>
#include <map>

namespace hdd::xp {

using nlohmann::json;

std::vector<json> redundancy_sweep(const RedundancyConfig& cfg) {
  cfg.validate();
  std::vector<json> out;
  for (Index beta : cfg.betas) {
    const std::vector<Index> grid = cfg.prefix_grid(beta);
    for (Index t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(beta),
                                             static_cast<std::uint64_t>(t));
      const RedundantDesign train = gen_redundant_regression(cfg.n, cfg.d_base, beta, cfg.noise_sd, seed, 0);
      const RedundantDesign test =
          gen_redundant_regression(cfg.n_test, cfg.d_base, beta, cfg.noise_sd, seed, 1);
      for (Index j : grid) {
        const Matrix xtr = train.x.leftCols(j);
        const Vector theta = fit_linear(xtr, train.y, 0.0);
        const double train_mse = (xtr * theta - train.y).squaredNorm() / static_cast<double>(cfg.n);
        const double test_mse = (test.x.leftCols(j) * theta - test.y).squaredNorm() /
                                static_cast<double>(cfg.n_test);
        out.push_back({{"beta", beta},
                       {"trial", t},
                       {"features", j},
                       {"effective_features", (j + beta) / (beta + 1)},
                       {"threshold", cfg.n * (beta + 1)},
                       {"train_mse", train_mse},
                       {"test_mse", test_mse},
                       {"theta_norm", theta.norm()}});
      }
    }
  }
  return out;
}

std::vector<RedundancyCurve> redundancy_curves(const std::vector<json>& records) {
  if (records.empty()) throw InputError("redundancy_curves: no records");
  std::vector<Index> order;
  std::map<Index, std::map<Index, std::vector<double>>> by_beta;
  for (const json& r : records) {
    const Index beta = r.at("beta").get<Index>();
    if (!by_beta.count(beta)) order.push_back(beta);
    by_beta[beta][r.at("features").get<Index>()].push_back(r.at("test_mse").get<double>());
  }
  std::vector<RedundancyCurve> curves;
  for (Index beta : order) {
    RedundancyCurve c;
    c.beta = beta;
    double best = -1.0;
    for (const auto& [j, vals] : by_beta[beta]) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
      c.features.push_back(j);
      c.test_mse_mean.push_back(mean);
      c.test_mse_sd.push_back(sd);
      if (mean > best) {
        best = mean;
        c.peak_features = j;
      }
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace hdd::xp
