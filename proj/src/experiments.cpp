#include "lepskii/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "lepskii/format.hpp"

namespace lepskii {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(Lambda0Method m) {
  switch (m) {
    case Lambda0Method::Heuristic: return "heuristic";
    case Lambda0Method::Empirical: return "empirical";
    case Lambda0Method::Theoretical: return "theoretical";
    case Lambda0Method::Fixed: return "fixed";
  }
  return "unknown";
}

Lambda0Method parse_lambda0_method(std::string_view name) {
  if (name == "heuristic" || name == "auto") return Lambda0Method::Heuristic;
  if (name == "empirical") return Lambda0Method::Empirical;
  if (name == "theoretical") return Lambda0Method::Theoretical;
  if (name == "fixed") return Lambda0Method::Fixed;
  throw Error(ErrorKind::ParseError, "unknown lambda0 method '" + std::string(name) + "'");
}

double choose_lambda0(const ExperimentConfig& cfg, const GramSystem& system, long n) {
  switch (cfg.lambda0_method) {
    case Lambda0Method::Heuristic:
      return heuristic_lambda0(system.spectrum, n, cfg.grid_q, cfg.heuristic);
    case Lambda0Method::Empirical: {
      const Eigen::VectorXd& mu = system.spectrum.values;
      return lambda0_from_effdim([&](double l) { return empirical_effdim(mu, l); }, n);
    }
    case Lambda0Method::Theoretical: {
      const Eigen::VectorXd& t_bar = cfg.model.t_bar;
      return lambda0_from_effdim([&](double l) { return model_effdim(t_bar, l); }, n);
    }
    case Lambda0Method::Fixed:
      return cfg.lambda0_value;
  }
  return cfg.lambda0_value;
}

namespace {

double model_oracle_lambda(const SyntheticModel& model, long n) {
  double lambda = kNaN;
  if (const auto* holder = std::get_if<HolderSource>(&model.source); holder && model.b_exponent) {
    lambda = oracle_lambda_regular(holder->r, *model.b_exponent, model.noise.sigma, holder->R, n);
  } else if (model.b_exponent) {
    lambda = oracle_lambda_general(std::get<IndexFunctionSource>(model.source).A,
                                   *model.b_exponent, n);
  } else {
    lambda = oracle_lambda_balance(model_approx_tilde(model, n), model_sample_tilde(model, n));
  }
  return std::clamp(lambda, 1e-16, 1.0);
}

std::string sanitize(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return "error: " + text;
}

// All rows (one per filter) for one (n, replication) pair.
std::vector<ExperimentRow> run_replication(const ExperimentConfig& cfg, long n, long rep) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ExperimentRow> rows;
  rows.reserve(cfg.filters.size());
  for (FilterMethod filter : cfg.filters) {
    ExperimentRow row;
    row.n = n;
    row.replication = rep;
    row.filter = filter;
    rows.push_back(row);
  }
  try {
    const SyntheticModel& model = cfg.model;
    const SyntheticSample sample = generate(model, n, cfg.seed_base + std::uint64_t(rep));
    const KernelSpec kernel = model.kernel();
    const GramSystem system = gram_system(kernel, sample.data.xs);
    const Grid grid = geometric_grid(choose_lambda0(cfg, system, n), cfg.grid_q);
    const Eigen::MatrixXd features = trig_features(sample.data.xs, model.dim());
    const Eigen::VectorXd& target = sample.target_coeffs;

    double lambda_star_value = kNaN;
    try {
      lambda_star_value = lambda_star(grid, model_approx_tilde(model, n), model_sample_tilde(model, n));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyJ && e.kind() != ErrorKind::FullJ) throw;
    }
    double lambda_oracle = kNaN;
    try {
      lambda_oracle = model_oracle_lambda(model, n);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoCrossing) throw;
    }

    BalancingConfig half = cfg.balancing;
    half.s = 0.5;
    BalancingConfig zero = cfg.balancing;
    zero.s = 0.0;

    for (ExperimentRow& row : rows) {
      const auto fits = fit_grid(system, sample.data.ys, row.filter, grid);
      std::vector<double> err0(grid.size()), err12(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const Eigen::VectorXd coeffs = expand_in_model_basis(model, fits[k].c, features);
        err0[k] = true_error_norm(coeffs, target, model.t_bar, 0.0);
        err12[k] = true_error_norm(coeffs, target, model.t_bar, 0.5);
      }
      const BalancingDiagnostics by_half = balancing_select(grid, fits, system, half);
      const BalancingDiagnostics by_zero = balancing_select(grid, fits, system, zero);
      row.lambda_hat_half = by_half.lambda_hat;
      row.lambda_hat_zero = by_zero.lambda_hat;
      row.lambda_star = lambda_star_value;
      row.lambda_oracle = lambda_oracle;
      row.err_s0_at_hat = err0[by_zero.index_hat];
      row.err_s12_at_hat = err12[by_half.index_hat];
      row.err_s0_at_hat_half = err0[by_half.index_hat];
      row.err_min_over_grid_s0 = *std::min_element(err0.begin(), err0.end());
      row.err_min_over_grid_s12 = *std::min_element(err12.begin(), err12.end());
      if (std::isfinite(lambda_oracle)) {
        const auto at_oracle = fit(system, sample.data.ys, row.filter, lambda_oracle);
        row.err_at_oracle =
            true_error_norm(expand_in_model_basis(model, at_oracle.c, features), target, model.t_bar, 0.5);
      } else {
        row.err_at_oracle = kNaN;
      }
      row.holdout_lambda = holdout_select(sample.data, cfg.holdout_fraction, grid, kernel, row.filter);
      const auto pos = std::find(grid.lambdas.begin(), grid.lambdas.end(), row.holdout_lambda);
      row.err_at_holdout = err12[static_cast<std::size_t>(pos - grid.lambdas.begin())];
    }
  } catch (const std::exception& e) {
    for (ExperimentRow& row : rows) {
      const long keep_n = row.n, keep_rep = row.replication;
      const FilterMethod keep_filter = row.filter;
      row = ExperimentRow{};
      row.n = keep_n;
      row.replication = keep_rep;
      row.filter = keep_filter;
      for (double* field : {&row.lambda_hat_half, &row.lambda_hat_zero, &row.lambda_star,
                            &row.lambda_oracle, &row.err_s0_at_hat, &row.err_s12_at_hat,
                            &row.err_min_over_grid_s0, &row.err_min_over_grid_s12,
                            &row.err_at_oracle, &row.holdout_lambda, &row.err_at_holdout,
                            &row.err_s0_at_hat_half}) {
        *field = kNaN;
      }
      row.status = sanitize(e.what());
    }
  }
  if (cfg.record_timing) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (ExperimentRow& row : rows) row.wall_time_ms = ms;
  }
  return rows;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  validate(cfg.model);
  validate(cfg.balancing);
  if (cfg.filters.empty()) throw Error(ErrorKind::InvalidArgument, "experiment needs at least one filter");
  if (cfg.replications < 0) throw Error(ErrorKind::InvalidArgument, "replications must be >= 0");

  struct Task {
    long n;
    long rep;
  };
  std::vector<Task> tasks;
  for (long n : cfg.n_values) {
    for (long rep = 0; rep < cfg.replications; ++rep) tasks.push_back({n, rep});
  }
  std::vector<std::vector<ExperimentRow>> results(tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      results[i] = run_replication(cfg, tasks[i].n, tasks[i].rep);
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        *progress << "replication " << finished << "/" << tasks.size() << '\n';
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ExperimentRow> rows;
  for (auto& chunk : results) {
    for (auto& row : chunk) rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<std::string> kResultColumns = {
    "n", "replication", "filter", "lambda_hat_half", "lambda_hat_zero", "lambda_star",
    "lambda_oracle", "err_s0_at_hat", "err_s12_at_hat", "err_min_over_grid_s0",
    "err_min_over_grid_s12", "err_at_oracle", "holdout_lambda", "err_at_holdout",
    "wall_time_ms", "err_s0_at_hat_half", "status"};

double column_value(const ExperimentRow& row, std::string_view column) {
  if (column == "n") return double(row.n);
  if (column == "replication") return double(row.replication);
  if (column == "lambda_hat_half") return row.lambda_hat_half;
  if (column == "lambda_hat_zero") return row.lambda_hat_zero;
  if (column == "lambda_star") return row.lambda_star;
  if (column == "lambda_oracle") return row.lambda_oracle;
  if (column == "err_s0_at_hat") return row.err_s0_at_hat;
  if (column == "err_s12_at_hat") return row.err_s12_at_hat;
  if (column == "err_min_over_grid_s0") return row.err_min_over_grid_s0;
  if (column == "err_min_over_grid_s12") return row.err_min_over_grid_s12;
  if (column == "err_at_oracle") return row.err_at_oracle;
  if (column == "holdout_lambda") return row.holdout_lambda;
  if (column == "err_at_holdout") return row.err_at_holdout;
  if (column == "wall_time_ms") return row.wall_time_ms;
  if (column == "err_s0_at_hat_half") return row.err_s0_at_hat_half;
  throw Error(ErrorKind::InvalidArgument, "unknown numeric column '" + std::string(column) + "'");
}

void write_results_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  for (std::size_t i = 0; i < kResultColumns.size(); ++i) {
    out << (i ? "," : "") << kResultColumns[i];
  }
  out << '\n';
  for (const ExperimentRow& row : rows) {
    out << row.n << ',' << row.replication << ',' << to_string(row.filter);
    for (std::size_t i = 3; i + 1 < kResultColumns.size(); ++i) {
      out << ',' << format_double(column_value(row, kResultColumns[i]));
    }
    out << ',' << row.status << '\n';
  }
}

namespace {

double parse_field(const std::string& text) {
  if (text == "nan") return kNaN;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, "cannot parse results field '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<ExperimentRow> read_results_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected;
  for (std::size_t i = 0; i < kResultColumns.size(); ++i) expected += (i ? "," : "") + kResultColumns[i];
  if (line != expected) throw Error(ErrorKind::ParseError, "results CSV header does not match");

  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != kResultColumns.size()) {
      throw Error(ErrorKind::ParseError, "results CSV row has " + std::to_string(fields.size()) + " fields");
    }
    ExperimentRow row;
    row.n = static_cast<long>(parse_field(fields[0]));
    row.replication = static_cast<long>(parse_field(fields[1]));
    row.filter = parse_filter(fields[2]);
    double* targets[] = {&row.lambda_hat_half, &row.lambda_hat_zero, &row.lambda_star,
                         &row.lambda_oracle, &row.err_s0_at_hat, &row.err_s12_at_hat,
                         &row.err_min_over_grid_s0, &row.err_min_over_grid_s12,
                         &row.err_at_oracle, &row.holdout_lambda, &row.err_at_holdout,
                         &row.wall_time_ms, &row.err_s0_at_hat_half};
    for (std::size_t i = 0; i < std::size(targets); ++i) *targets[i] = parse_field(fields[3 + i]);
    row.status = fields.back();
    rows.push_back(std::move(row));
  }
  return rows;
}

double holdout_select(const Dataset& data, double split_fraction, const Grid& grid,
                      const KernelSpec& k, FilterMethod m) {
  validate(data);
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw Error(ErrorKind::DegenerateSplit, "split fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::ceil(split_fraction * double(n)));
  if (n_train < 1 || n_train >= n) {
    throw Error(ErrorKind::DegenerateSplit, "hold-out split leaves an empty part");
  }
  const std::span<const double> train_x(data.xs.data(), n_train);
  const std::span<const double> train_y(data.ys.data(), n_train);
  const std::span<const double> valid_x(data.xs.data() + n_train, n - n_train);
  const Eigen::Map<const Eigen::VectorXd> valid_y(data.ys.data() + n_train,
                                                  static_cast<Eigen::Index>(n - n_train));

  const GramSystem system = gram_system(k, train_x);
  const CrossEvaluator evaluator(k, train_x, valid_x);
  double best_lambda = grid.lambdas.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double lambda : grid.lambdas) {
    const EstimatorCoefficients e = fit(system, train_y, m, lambda);
    const double mse = (evaluator.apply(e.c) - valid_y).squaredNorm() / double(n - n_train);
    if (mse <= best_mse) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

RateFit fit_rate(std::span<const long> ns, std::span<const double> errors) {
  if (ns.size() != errors.size()) throw Error(ErrorKind::DimensionMismatch, "fit_rate: length mismatch");
  std::map<long, std::vector<double>> groups;
  for (std::size_t i = 0; i < ns.size(); ++i) groups[ns[i]].push_back(errors[i]);
  std::vector<double> xs, ys;
  for (const auto& [n, errs] : groups) {
    const double m = median(errs);
    if (n > 0 && std::isfinite(m) && m > 0.0) {
      xs.push_back(std::log(double(n)));
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() < 2) throw Error(ErrorKind::InsufficientData, "fit_rate needs at least two distinct n");
  const double count = double(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i] / count;
    mean_y += ys[i] / count;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    syy += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  RateFit out;
  out.slope = sxy / sxx;
  out.intercept = mean_y - out.slope * mean_x;
  out.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

RateFit fit_rate(std::span<const ExperimentRow> rows, std::string_view error_column,
                 std::optional<FilterMethod> filter) {
  std::vector<long> ns;
  std::vector<double> errors;
  for (const ExperimentRow& row : rows) {
    if (!row.ok() || (filter && row.filter != *filter)) continue;
    ns.push_back(row.n);
    errors.push_back(column_value(row, error_column));
  }
  return fit_rate(ns, errors);
}

double bernstein_bound(long n, double L, double sigma, double eta) {
  require_eta(eta, "bernstein_bound");
  return 2.0 * std::log(2.0 / eta) * (L / double(n) + sigma / std::sqrt(double(n)));
}

BernsteinCheck bernstein_monte_carlo(BoundedFamily family, long n, double L, double eta,
                                     long trials, std::uint64_t seed) {
  constexpr double kSparseP = 0.1;
  const double half = 0.5 * L;
  double mean = 0.0, second = 0.0;
  switch (family) {
    case BoundedFamily::Rademacher: mean = 0.0; second = half * half; break;
    case BoundedFamily::Uniform: mean = 0.0; second = half * half / 3.0; break;
    case BoundedFamily::SparseBernoulli: mean = kSparseP * half; second = kSparseP * half * half; break;
  }
  BernsteinCheck out;
  out.sigma = std::sqrt(second);
  out.bound = bernstein_bound(n, L, out.sigma, eta);
  out.trials = trials;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (long t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (long j = 0; j < n; ++j) {
      const double u = uniform(rng);
      switch (family) {
        case BoundedFamily::Rademacher: sum += u < 0.5 ? -half : half; break;
        case BoundedFamily::Uniform: sum += (2.0 * u - 1.0) * half; break;
        case BoundedFamily::SparseBernoulli: sum += u < kSparseP ? half : 0.0; break;
      }
    }
    if (std::abs(sum / double(n) - mean) > out.bound) ++out.exceedances;
  }
  return out;
}

std::vector<double> equispaced_design(long n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) xs[static_cast<std::size_t>(j)] = double(j) / double(n);
  return xs;
}

ConcentrationSummary concentration_experiment(const SyntheticModel& model,
                                              const ConcentrationConfig& cfg) {
  require_eta(cfg.eta, "concentration_experiment");
  const KernelSpec kernel = model.kernel();
  ConcentrationSummary out;
  for (long n : cfg.n_values) {
    std::map<double, ConcentrationCell> cells;
    ConcentrationEvent event{n, 0, 0};
    for (long rep = 0; rep < cfg.replications; ++rep) {
      const std::vector<double> xs = cfg.design == Design::Equispaced
                                         ? equispaced_design(n)
                                         : generate(model, n, cfg.seed_base + std::uint64_t(rep)).data.xs;
      const Eigen::VectorXd mu = normalized_gram_eigenvalues(kernel, xs);
      const std::vector<double> lambdas =
          cfg.lambdas.empty() ? geometric_grid(heuristic_lambda0(mu, n, cfg.q, cfg.heuristic), cfg.q).lambdas
                              : cfg.lambdas;
      bool all_hold = true;
      for (double lambda : lambdas) {
        const TwoSidedCheck check =
            two_sided_check(model_effdim(model.t_bar, lambda), empirical_effdim(mu, lambda), n, lambda, cfg.eta);
        ConcentrationCell& cell = cells[lambda];
        cell.n = n;
        cell.lambda = lambda;
        cell.delta = check.delta;
        if (!check.factor5_applicable) continue;
        ++cell.applicable;
        if (check.factor5_holds) {
          ++cell.holds;
        } else {
          all_hold = false;
        }
      }
      ++event.replications;
      if (all_hold) ++event.event_holds;
    }
    for (auto& [lambda, cell] : cells) out.cells.push_back(cell);
    out.events.push_back(event);
  }
  return out;
}

std::vector<FilterSummary> summarize(std::span<const ExperimentRow> rows) {
  std::vector<FilterSummary> out;
  for (FilterMethod filter : {kTikhonov, kSpectralCutoff, kLandweber}) {
    FilterSummary summary;
    summary.filter = filter;
    std::vector<double> oracle_factor, one_for_all, holdout_factor;
    long inclusion_total = 0, inclusion_hits = 0;
    for (const ExperimentRow& row : rows) {
      if (row.filter != filter) continue;
      ++summary.rows;
      if (!row.ok()) {
        ++summary.failures;
        continue;
      }
      oracle_factor.push_back(row.err_s12_at_hat / row.err_min_over_grid_s12);
      one_for_all.push_back(row.err_s0_at_hat_half / row.err_s0_at_hat);
      holdout_factor.push_back(row.err_at_holdout / row.err_min_over_grid_s12);
      if (std::isfinite(row.lambda_star)) {
        ++inclusion_total;
        if (row.lambda_star <= row.lambda_hat_half) ++inclusion_hits;
      }
    }
    if (summary.rows == 0) continue;
    summary.median_oracle_factor = median(oracle_factor);
    summary.median_one_for_all = median(one_for_all);
    summary.median_holdout_factor = median(holdout_factor);
    summary.inclusion_frequency =
        inclusion_total ? double(inclusion_hits) / double(inclusion_total) : kNaN;
    try {
      summary.adaptive_rate = fit_rate(rows, "err_s12_at_hat", filter);
      summary.grid_min_rate = fit_rate(rows, "err_min_over_grid_s12", filter);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
    }
    out.push_back(summary);
  }
  return out;
}

}  // namespace lepskii
