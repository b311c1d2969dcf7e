// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Usage: acceptance [criterion ...]   (default: all, plus the supplementary check)

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "lepskii/cli.hpp"
#include "lepskii/config_io.hpp"
#include "lepskii/experiments.hpp"
#include "lepskii/format.hpp"
#include "oracles.hpp"

using namespace lepskii;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

int worker_threads() { return std::max(1, int(std::thread::hardware_concurrency())); }

SyntheticModel regular_model() {
  return make_polynomial_model(2.0, 1000, HolderSource{0.5, 1.0}, NoiseModel{0.3, 0.3});
}

ExperimentConfig regular_experiment(std::vector<long> ns, long reps) {
  ExperimentConfig cfg;
  cfg.model = regular_model();
  cfg.n_values = std::move(ns);
  cfg.replications = reps;
  cfg.seed_base = 1;
  cfg.grid_q = 2.0;
  cfg.balancing.sigma = 0.3;
  cfg.balancing.M_bound = 0.3;
  cfg.balancing.c_s = 1.0;
  cfg.balancing.bal_factor = 20.0;
  cfg.balancing.constant_mode = ConstantMode::Practical;
  cfg.filters = {kTikhonov};
  cfg.threads = worker_threads();
  return cfg;
}

const FilterSummary& only(const std::vector<FilterSummary>& s) {
  if (s.size() != 1) throw std::runtime_error("expected one filter summary");
  return s.front();
}

// Criteria 2 and 3 share one run.
const std::vector<ExperimentRow>& oracle_run() {
  static const std::vector<ExperimentRow> rows = run_experiment(regular_experiment({1024}, 100));
  return rows;
}

long failures(std::span<const ExperimentRow> rows) {
  return std::count_if(rows.begin(), rows.end(), [](const ExperimentRow& r) { return !r.ok(); });
}

Outcome criterion1() {
  ConcentrationConfig cfg;
  cfg.n_values = {500, 2000};
  cfg.eta = 0.1;
  cfg.replications = 200;
  cfg.q = 2.0;
  cfg.seed_base = 1;
  const auto summary = concentration_experiment(regular_model(), cfg);
  bool pass = !summary.events.empty();
  std::string detail;
  for (const auto& e : summary.events) {
    pass = pass && e.frequency() >= 0.9;
    detail += "n=" + std::to_string(e.n) + ": event frequency " + num(e.frequency()) + "; ";
  }
  return {pass, detail + "required >= 0.9"};
}

Outcome criterion2() {
  const auto& rows = oracle_run();
  const auto& s = only(summarize(rows));
  const bool pass = std::isfinite(s.median_oracle_factor) && s.median_oracle_factor <= 10.0 && failures(rows) == 0;
  return {pass, "median oracle factor " + num(s.median_oracle_factor) + " (required <= 10), failed rows " +
                    std::to_string(failures(rows)) + ", holdout factor " + num(s.median_holdout_factor)};
}

Outcome criterion3() {
  const auto& rows = oracle_run();
  const auto& s = only(summarize(rows));
  const bool pass = std::isfinite(s.median_one_for_all) && s.median_one_for_all <= 3.0 && failures(rows) == 0;
  return {pass, "median err_s0(hat_1/2) / err_s0(hat_0) " + num(s.median_one_for_all) + " (required <= 3)"};
}

Outcome criterion4() {
  const auto rows = run_experiment(regular_experiment({256, 512, 1024, 2048, 4096}, 50));
  const RateFit adaptive = fit_rate(rows, "err_s12_at_hat");
  const RateFit grid_min = fit_rate(rows, "err_min_over_grid_s12");
  const bool pass = std::abs(adaptive.slope + 0.4) <= 0.15 && failures(rows) == 0;
  return {pass, "adaptive slope " + num(adaptive.slope) + " (required -0.4 +- 0.15), r2 " + num(adaptive.r2) +
                    "; grid-minimum slope " + num(grid_min.slope)};
}

Outcome criterion5() {
  const auto model = regular_model();
  std::vector<long> ns = {100, 1000, 10000, 100000};
  std::vector<double> l0;
  for (long n : ns) l0.push_back(lambda0_from_effdim([&](double l) { return model_effdim(model.t_bar, l); }, n));
  const RateFit fit = fit_rate(ns, l0);
  return {std::abs(fit.slope + 2.0 / 3.0) <= 0.05, "slope " + num(fit.slope, 6) + " (required -2/3 +- 0.05)"};
}

Outcome criterion6() {
  ExperimentConfig cfg = regular_experiment({1024}, 100);
  cfg.balancing.constant_mode = ConstantMode::Theoretical;
  cfg.balancing.eta = 0.2;
  const auto rows = run_experiment(cfg);
  const auto& s = only(summarize(rows));
  return {s.inclusion_frequency >= 0.8 && failures(rows) == 0,
          "inclusion frequency " + num(s.inclusion_frequency) + " (required >= 0.8)"};
}

Outcome criterion7() {
  std::vector<std::string> failed;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 0.3);
  auto random_dataset = [&](int n) {
    Dataset d;
    for (int i = 0; i < n; ++i) {
      d.xs.push_back(u(rng));
      d.ys.push_back(std::cos(5.0 * d.xs.back()) + normal(rng));
    }
    return d;
  };

  // Tikhonov fit against a direct solve.
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = random_dataset(25);
    const auto k = KernelSpec::gaussian(0.1 + 0.01 * rep);
    for (double lambda : {0.5, 0.05, 0.005}) {
      Eigen::MatrixXd system = gram_matrix(k, d.xs);
      system.diagonal().array() += 25.0 * lambda;
      const Eigen::Map<const Eigen::VectorXd> y(d.ys.data(), 25);
      const Eigen::VectorXd direct = system.partialPivLu().solve(y);
      const double diff = (fit(d, k, kTikhonov, lambda).c - direct).norm();
      require(diff <= 1e-8 * std::max(1.0, direct.norm()), "tikhonov direct solve");
    }
  }

  // Eigenvalue-sum effective dimension against the trace of a linear solve.
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = random_dataset(40);
    const auto k = KernelSpec::gaussian(0.05 + 0.02 * rep);
    const Eigen::MatrixXd g = normalized_gram(k, d.xs);
    const Eigen::VectorXd mu = normalized_gram_eigenvalues(k, d.xs);
    for (double lambda : {1.0, 0.1, 1e-3}) {
      Eigen::MatrixXd shifted = g;
      shifted.diagonal().array() += lambda;
      const double trace = shifted.ldlt().solve(g).trace();
      require(std::abs(empirical_effdim(mu, lambda) - trace) <= 1e-9 * std::max(1.0, trace), "effdim trace");
    }
  }

  // Grid ratio property, monotonicity of lambda^s S and lambda N(lambda).
  for (double b : {1.5, 2.0, 3.0}) {
    const auto model = make_polynomial_model(b, 1000, HolderSource{0.5, 1.0}, NoiseModel{0.3, 0.3});
    auto N = [&](double l) { return model_effdim(model.t_bar, l); };
    for (long n : {100L, 1000L, 100000L}) {
      const SampleErrorParams p{0.3, 0.3, n};
      auto stilde = [&](double l) { return sample_error(p, effdim_clamped(N(l)), l, true); };
      for (double q : {1.5, 2.0, 4.0}) {
        const Grid g = geometric_grid(lambda0_from_effdim(N, n), q);
        for (std::size_t j = 0; j + 1 < g.size(); ++j)
          require(stilde(g.lambdas[j]) < q * stilde(g.lambdas[j + 1]), "grid ratio property");
      }
      for (double s : {0.0, 0.25, 0.5}) {
        double prev = std::numeric_limits<double>::infinity(), prev_ln = 0.0;
        for (int k = 0; k <= 300; ++k) {
          const double l = std::pow(10.0, -6.0 + 6.0 * k / 300.0);
          const double v = std::pow(l, s) * stilde(l);
          require(v < prev, "lambda^s S strictly decreasing");
          require(l * N(l) >= prev_ln * (1 - 1e-14), "lambda N nondecreasing");
          prev = v;
          prev_ln = l * N(l);
        }
      }
    }
  }

  // Interpolation inequality on random instances.
  for (int rep = 0; rep < 100; ++rep) {
    const Dataset d = random_dataset(15);
    const GramSystem system = gram_system(KernelSpec::gaussian(0.15), d.xs);
    Eigen::VectorXd a(15);
    for (auto& v : a) v = normal(rng);
    const double s = 0.5 * u(rng);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(15);
    const double mid = weighted_diff_norm(a, z, system, 0.0, s);
    const double top = weighted_diff_norm(a, z, system, 0.0, 0.5);
    const double bottom = weighted_diff_norm(a, z, system, 0.0, 0.0);
    require(mid <= std::pow(top, 2 * s) * std::pow(bottom, 1 - 2 * s) * (1 + 1e-9), "interpolation inequality");
  }

  // Balancing selection against the brute-force enumeration.
  const Grid grid = geometric_grid(1.0 / 32.0, 2.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset d = random_dataset(30);
    const auto k = KernelSpec::gaussian(0.1 + 0.002 * double(seed));
    const GramSystem system = gram_system(k, d.xs);
    BalancingConfig cfg;
    cfg.sigma = 0.3;
    cfg.M_bound = seed % 2 ? 0.3 : 0.0;
    cfg.s = std::vector<double>{0.0, 0.25, 0.5, 0.1}[seed % 4];
    cfg.bal_factor = std::vector<double>{0.05, 0.3, 1.0, 20.0}[(seed / 4) % 4];
    const FilterMethod m = std::vector<FilterMethod>{kTikhonov, kSpectralCutoff, kLandweber}[seed % 3];
    const auto diag = balancing_select(grid, fit_grid(system, d.ys, m, grid), system, cfg);
    const auto oracle = testing::brute_force_jplus(d, k, grid, m, cfg);
    require(diag.lambda_hat == oracle.lambda_hat && diag.in_jplus == oracle.accepted, "brute-force J+");
  }

  std::string detail = failed.empty() ? "all property checks hold" : "failed:";
  for (const auto& f : failed) detail += " " + f + ";";
  return {failed.empty(), detail};
}

Outcome criterion8() {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<BoundedFamily, const char*>> families = {
      {BoundedFamily::Rademacher, "rademacher"}, {BoundedFamily::Uniform, "uniform"},
      {BoundedFamily::SparseBernoulli, "sparse"}};
  for (const auto& [family, name] : families) {
    for (double eta : {0.05, 0.2}) {
      const auto c = bernstein_monte_carlo(family, 100, 2.0, eta, 10000, 11);
      pass = pass && c.frequency() <= eta;
      detail += std::string(name) + " eta=" + num(eta) + ": " + num(c.frequency()) + "; ";
    }
  }
  return {pass, detail + "required <= eta"};
}

Outcome criterion9() {
  const fs::path dir = fs::temp_directory_path() / ("lepskii_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream(dir / name, std::ios::binary) << content;
    return (dir / name).string();
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string model_doc = R"({"spectrum": {"type": "poly", "b": 2, "D": 300},
      "source": {"type": "holder", "r": 0.5, "R": 1}, "noise": {"sigma": 0.3}})";
  const std::string model = write("model.json", model_doc);
  const std::string config = write("exp.json", R"({"model": )" + model_doc + R"(,
      "n_values": [64, 128], "replications": 3, "seed_base": 2, "filters": ["tikhonov", "landweber"]})");
  const std::string query = write("query.csv", "x\n0.2\n0.4\n0.6\n");
  const std::string data = (dir / "data.csv").string();

  std::vector<std::string> failed;
  auto run = [&](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return std::make_pair(code, out.str());
  };
  auto twice = [&](const std::string& name, std::vector<std::string> args, const std::vector<std::string>& files) {
    const auto a = run(args);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(slurp(f));
    const auto b = run(args);
    bool same = a.first == 0 && a == b;
    for (std::size_t i = 0; i < files.size(); ++i) same = same && !first[i].empty() && slurp(files[i]) == first[i];
    if (!same) failed.push_back(name);
  };

  twice("simulate", {"simulate", "--model", model, "--n", "150", "--seed", "3", "--out", data}, {data});
  twice("effdim", {"effdim", "--model", model, "--n", "400", "--seed", "5"}, {});
  twice("grid", {"grid", "--lambda0", "auto", "--data", data, "--kernel", "spectrum:2:300"}, {});
  const std::string pred = (dir / "pred.csv").string();
  twice("fit", {"fit", "--data", data, "--kernel", "gaussian:0.2", "--lambda", "0.01", "--query", query,
                "--predictions", pred},
        {pred});
  twice("balance", {"balance", "--data", data, "--kernel", "spectrum:2:300", "--sigma", "0.3", "--M", "0.3"}, {});
  const fs::path out_dir = dir / "exp";
  twice("experiment", {"experiment", "--config", config, "--out-dir", out_dir.string()},
        {(out_dir / "results.csv").string(), (out_dir / "summary.json").string()});
  twice("rate", {"rate", "--results", (out_dir / "results.csv").string()}, {});

  std::error_code ec;
  fs::remove_all(dir, ec);
  std::string detail = failed.empty() ? "all 7 commands byte-identical across two runs" : "differs:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

// Regular model, n = 512, 50 replications: median oracle factor finite and <= 10.
Outcome supplementary() {
  const auto rows = run_experiment(regular_experiment({512}, 50));
  const auto& s = only(summarize(rows));
  return {std::isfinite(s.median_oracle_factor) && s.median_oracle_factor <= 10.0,
          "n=512 median oracle factor " + num(s.median_oracle_factor) + " (required <= 10)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Outcome()>> criteria = {
      {"1", criterion1}, {"2", criterion2}, {"3", criterion3}, {"4", criterion4}, {"5", criterion5},
      {"6", criterion6}, {"7", criterion7}, {"8", criterion8}, {"9", criterion9}, {"extra", supplementary}};
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty()) selected = {"1", "2", "3", "4", "5", "6", "7", "8", "9", "extra"};

  int failed = 0;
  for (const auto& id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = it->second();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!result.pass) ++failed;
    std::cout << "criterion " << id << ": " << (result.pass ? "PASS" : "FAIL") << "  " << result.detail << "  ["
              << num(seconds, 3) << " s]" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
