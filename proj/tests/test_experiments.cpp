#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "lepskii/experiments.hpp"

using namespace lepskii;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.model = make_polynomial_model(2.0, 60, HolderSource{0.5, 1.0}, NoiseModel{0.3, 0.3});
  cfg.n_values = {64, 128};
  cfg.replications = 2;
  cfg.seed_base = 7;
  cfg.balancing.sigma = 0.3;
  cfg.balancing.M_bound = 0.3;
  cfg.filters = {kTikhonov, kLandweber};
  return cfg;
}

std::string csv_of(std::span<const ExperimentRow> rows) {
  std::ostringstream out;
  write_results_csv(out, rows);
  return out.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("zero replications give no rows") {
  ExperimentConfig cfg = small_config();
  cfg.replications = 0;
  CHECK(run_experiment(cfg).empty());
  cfg.filters.clear();
  CHECK_THROWS_AS(run_experiment(cfg), Error);
}

TEST_CASE("runs are deterministic, thread-count independent and round-trip through CSV") {
  ExperimentConfig cfg = small_config();
  const auto a = run_experiment(cfg);
  REQUIRE(a.size() == 2 * 2 * 2);
  const auto b = run_experiment(cfg);
  CHECK(csv_of(a) == csv_of(b));
  cfg.threads = 3;
  CHECK(csv_of(run_experiment(cfg)) == csv_of(a));

  for (const auto& row : a) CHECK(row.ok());
  CHECK(a[0].n == 64);
  CHECK(a[0].replication == 0);
  CHECK(a[0].filter == kTikhonov);
  CHECK(a[1].filter == kLandweber);

  std::istringstream in(csv_of(a));
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == a.size());
  CHECK(csv_of(back) == csv_of(a));
  CHECK(back[3].err_s12_at_hat == a[3].err_s12_at_hat);

  std::istringstream header_only("n,replication\n");
  CHECK_THROWS_AS(read_results_csv(header_only), Error);
  CHECK(kResultColumns.size() == 17);
  CHECK(column_value(a[0], "lambda_hat_half") == a[0].lambda_hat_half);
  CHECK_THROWS_AS(column_value(a[0], "status"), Error);
}

TEST_CASE("minimum property holds on every row") {
  ExperimentConfig cfg = small_config();
  cfg.n_values = {50, 100, 200};
  cfg.replications = 4;
  cfg.filters = {kTikhonov, kSpectralCutoff, kLandweber};
  for (const auto& row : run_experiment(cfg)) {
    REQUIRE(row.ok());
    CHECK(row.err_min_over_grid_s12 <= row.err_s12_at_hat);
    CHECK(row.err_min_over_grid_s0 <= row.err_s0_at_hat);
    CHECK(row.err_min_over_grid_s0 <= row.err_s0_at_hat_half);
    CHECK(row.err_min_over_grid_s12 <= row.err_at_holdout);
    CHECK(row.lambda_hat_half > 0.0);
    CHECK(row.lambda_hat_half <= 1.0);
    CHECK(std::isfinite(row.lambda_oracle));
  }
}

TEST_CASE("failed replications are recorded, not dropped") {
  ExperimentConfig cfg = small_config();
  cfg.lambda0_method = Lambda0Method::Fixed;
  cfg.lambda0_value = 1.5;
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 8);
  for (const auto& row : rows) {
    CHECK_FALSE(row.ok());
    CHECK(row.status.rfind("error: ", 0) == 0);
    CHECK(row.status.find(',') == std::string::npos);
    CHECK(std::isnan(row.err_s12_at_hat));
  }
  std::istringstream in(csv_of(rows));
  CHECK(read_results_csv(in)[0].status == rows[0].status);
}

TEST_CASE("lambda0 method names") {
  for (auto m : {Lambda0Method::Heuristic, Lambda0Method::Empirical, Lambda0Method::Theoretical, Lambda0Method::Fixed})
    CHECK(parse_lambda0_method(to_string(m)) == m);
  CHECK(parse_lambda0_method("auto") == Lambda0Method::Heuristic);
  CHECK_THROWS_AS(parse_lambda0_method("guess"), Error);
}

TEST_CASE("holdout_select examples") {
  const auto constant = KernelSpec::explicit_spectrum(Eigen::VectorXd::Ones(1));
  const Grid grid = Grid::from_values({0.125, 0.25, 0.5, 1.0});
  // Prediction is mean(y_train) / (1 + lambda) = 2 / 1.25 = 1.6 at lambda = 1/4.
  const Dataset d{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {2.0, 2.0, 2.0, 1.6, 1.6, 1.6}};
  CHECK(holdout_select(d, 0.5, grid, constant, kTikhonov) == 0.25);

  const Dataset zeros{{0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 0.0, 0.0}};
  CHECK(holdout_select(zeros, 0.5, grid, KernelSpec::gaussian(0.2), kTikhonov) == 1.0);

  CHECK(kind_of([&] { holdout_select(d, 0.99, grid, constant, kTikhonov); }) == ErrorKind::DegenerateSplit);
  CHECK(kind_of([&] { holdout_select(d, 0.0, grid, constant, kTikhonov); }) == ErrorKind::DegenerateSplit);
}

TEST_CASE("holdout_select matches exhaustive validation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  const Grid grid = geometric_grid(1e-3, 2.0);
  for (int rep = 0; rep < 30; ++rep) {
    Dataset d;
    for (int i = 0; i < 40; ++i) {
      d.xs.push_back(u(rng));
      d.ys.push_back(std::sin(4.0 * d.xs.back()) + noise(rng));
    }
    const auto k = KernelSpec::gaussian(0.1 + 0.01 * rep);
    const double fraction = rep % 2 ? 0.5 : 0.7;
    const int train = int(std::ceil(fraction * 40));
    const std::vector<double> tx(d.xs.begin(), d.xs.begin() + train), vx(d.xs.begin() + train, d.xs.end());
    const Eigen::Map<const Eigen::VectorXd> ty(d.ys.data(), train);
    const Eigen::Map<const Eigen::VectorXd> vy(d.ys.data() + train, 40 - train);
    const Eigen::MatrixXd K = gram_matrix(k, tx);
    const Eigen::MatrixXd cross = cross_kernel(k, tx, vx);
    double best = std::numeric_limits<double>::infinity(), chosen = 0.0;
    for (double l : grid.lambdas) {
      Eigen::MatrixXd system = K;
      system.diagonal().array() += train * l;
      const Eigen::VectorXd c = system.ldlt().solve(ty);
      const double mse = (cross * c - vy).squaredNorm() / double(vy.size());
      if (mse <= best) {
        best = mse;
        chosen = l;
      }
    }
    CAPTURE(rep);
    CHECK(holdout_select(d, fraction, grid, k, kTikhonov) == chosen);
  }
}

TEST_CASE("fit_rate examples") {
  const std::vector<long> ns = {256, 512, 1024, 2048, 4096};
  std::vector<double> errs;
  for (long n : ns) errs.push_back(std::pow(double(n), -0.4));
  const auto exact = fit_rate(ns, errs);
  CHECK(std::abs(exact.slope + 0.4) <= 1e-12);
  CHECK(std::abs(exact.intercept) <= 1e-11);
  CHECK(exact.r2 == doctest::Approx(1.0));

  const std::vector<long> two = {10, 100};
  const std::vector<double> e2 = {1.0, 0.1};
  CHECK(fit_rate(two, e2).slope == doctest::Approx(-1.0).epsilon(1e-12));

  // Several replications per n: the fit uses the median per n.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<long> many_n;
  std::vector<double> many_e;
  for (long n : ns) {
    for (int r = 0; r < 21; ++r) {
      many_n.push_back(n);
      many_e.push_back(std::pow(double(n), -0.4) * (1.0 + 0.01 * normal(rng)));
    }
  }
  CHECK(std::abs(fit_rate(many_n, many_e).slope + 0.4) <= 0.02);

  const std::vector<long> one = {100, 100};
  const std::vector<double> e1 = {0.1, 0.2};
  CHECK(kind_of([&] { fit_rate(one, e1); }) == ErrorKind::InsufficientData);

  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({1.0, std::nan(""), 3.0}) == 2.0);
  CHECK(std::isnan(median({})));
}

TEST_CASE("bernstein bound") {
  CHECK(bernstein_bound(4, 0.0, 1.0, 2.0 / std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bernstein_bound(50, 50.0, 0.0, 0.1) == doctest::Approx(2.0 * std::log(20.0)));
  CHECK(kind_of([] { bernstein_bound(10, 1.0, 1.0, 0.0); }) == ErrorKind::InvalidEta);
  CHECK(kind_of([] { bernstein_bound(10, 1.0, 1.0, 1.0); }) == ErrorKind::InvalidEta);

  for (auto family : {BoundedFamily::Rademacher, BoundedFamily::Uniform, BoundedFamily::SparseBernoulli}) {
    for (double eta : {0.05, 0.2}) {
      const auto check = bernstein_monte_carlo(family, 50, 2.0, eta, 2000, 17);
      CHECK(check.trials == 2000);
      CHECK(check.frequency() <= eta);
      const auto again = bernstein_monte_carlo(family, 50, 2.0, eta, 2000, 17);
      CHECK(again.exceedances == check.exceedances);
    }
  }
  CHECK(bernstein_monte_carlo(BoundedFamily::Rademacher, 10, 2.0, 0.1, 1, 1).sigma == doctest::Approx(1.0));
  CHECK(bernstein_monte_carlo(BoundedFamily::Uniform, 10, 2.0, 0.1, 1, 1).sigma == doctest::Approx(std::sqrt(1.0 / 3.0)));
}

TEST_CASE("concentration equality case on an exact design") {
  const auto model = make_polynomial_model(2.0, 41, HolderSource{0.5, 1.0}, NoiseModel{0.3, 0.3});
  ConcentrationConfig cfg;
  cfg.n_values = {100, 200};
  cfg.lambdas = {1e-3, 1e-2, 0.1, 0.5};
  cfg.replications = 3;
  cfg.design = Design::Equispaced;
  const auto summary = concentration_experiment(model, cfg);
  CHECK(summary.cells.size() == 8);
  for (const auto& cell : summary.cells) CHECK(cell.frequency() == 1.0);
  for (const auto& e : summary.events) CHECK(e.frequency() == 1.0);
  CHECK(equispaced_design(4) == std::vector<double>{0.0, 0.25, 0.5, 0.75});
}

TEST_CASE("concentration frequency does not drop as n grows") {
  const auto model = make_polynomial_model(2.0, 400, HolderSource{0.5, 1.0}, NoiseModel{0.3, 0.3});
  ConcentrationConfig cfg;
  cfg.n_values = {50, 200, 800};
  cfg.lambdas = {0.002, 0.005, 0.01, 0.02, 0.05};
  cfg.replications = 20;
  cfg.seed_base = 3;
  const auto summary = concentration_experiment(model, cfg);
  std::vector<double> medians;
  for (long n : cfg.n_values) {
    std::vector<double> freqs;
    for (const auto& cell : summary.cells)
      if (cell.n == n) freqs.push_back(cell.frequency());
    medians.push_back(median(freqs));
  }
  CHECK(medians[1] >= medians[0]);
  CHECK(medians[2] >= medians[1]);
}

TEST_CASE("summarize") {
  auto row = [](long n, double hat, double min, double s0_half, double s0, double star, double lhat) {
    ExperimentRow r;
    r.n = n;
    r.filter = kTikhonov;
    r.err_s12_at_hat = hat;
    r.err_min_over_grid_s12 = min;
    r.err_s0_at_hat_half = s0_half;
    r.err_s0_at_hat = s0;
    r.err_at_holdout = 2.0 * min;
    r.lambda_star = star;
    r.lambda_hat_half = lhat;
    return r;
  };
  std::vector<ExperimentRow> rows = {row(100, 2.0, 1.0, 3.0, 1.0, 0.1, 0.2), row(100, 4.0, 1.0, 1.0, 1.0, 0.5, 0.2),
                                     row(400, 1.0, 0.5, 2.0, 1.0, std::nan(""), 0.2)};
  ExperimentRow bad;
  bad.n = 400;
  bad.filter = kTikhonov;
  bad.status = "error: boom";
  rows.push_back(bad);
  const auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].rows == 4);
  CHECK(s[0].failures == 1);
  CHECK(s[0].median_oracle_factor == 2.0);
  CHECK(s[0].median_one_for_all == 2.0);
  CHECK(s[0].median_holdout_factor == 2.0);
  CHECK(s[0].inclusion_frequency == 0.5);
  REQUIRE(s[0].adaptive_rate.has_value());
  CHECK(s[0].adaptive_rate->slope == doctest::Approx(std::log(1.0 / 3.0) / std::log(4.0)));
}
