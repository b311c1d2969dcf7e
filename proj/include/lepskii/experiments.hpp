#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lepskii/balancing.hpp"
#include "lepskii/synthetic.hpp"

namespace lepskii {

enum class Lambda0Method {
  Heuristic,    // downward walk on the empirical sample-error statistic
  Empirical,    // n lambda = N_x(lambda)
  Theoretical,  // n lambda = N(lambda) from the model spectrum
  Fixed,
};

std::string_view to_string(Lambda0Method m);
Lambda0Method parse_lambda0_method(std::string_view name);

struct ExperimentConfig {
  SyntheticModel model;
  std::vector<long> n_values;
  long replications = 1;
  std::uint64_t seed_base = 0;
  double grid_q = 2.0;
  Lambda0Method lambda0_method = Lambda0Method::Heuristic;
  double lambda0_value = 0.0;
  HeuristicOptions heuristic;
  /// s is ignored: every run balances at s = 1/2 and s = 0.
  BalancingConfig balancing;
  std::vector<FilterMethod> filters{kTikhonov};
  double holdout_fraction = 0.5;
  bool record_timing = false;
  int threads = 1;
};

/// One (n, replication, filter) outcome. err_s0_at_hat is measured at
/// lambda_hat_zero, err_s12_at_hat and err_s0_at_hat_half at
/// lambda_hat_half. Errors are ||Bbar^s (fhat - f)||_H.
struct ExperimentRow {
  long n = 0;
  long replication = 0;
  FilterMethod filter;
  double lambda_hat_half = 0.0;
  double lambda_hat_zero = 0.0;
  double lambda_star = 0.0;
  double lambda_oracle = 0.0;
  double err_s0_at_hat = 0.0;
  double err_s12_at_hat = 0.0;
  double err_min_over_grid_s0 = 0.0;
  double err_min_over_grid_s12 = 0.0;
  double err_at_oracle = 0.0;
  double holdout_lambda = 0.0;
  double err_at_holdout = 0.0;
  double wall_time_ms = 0.0;
  double err_s0_at_hat_half = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Selects the grid value used as lambda_0 for one design.
double choose_lambda0(const ExperimentConfig& cfg, const GramSystem& system, long n);

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          std::ostream* progress = nullptr);

extern const std::vector<std::string> kResultColumns;
void write_results_csv(std::ostream& out, std::span<const ExperimentRow> rows);
std::vector<ExperimentRow> read_results_csv(std::istream& in);
double column_value(const ExperimentRow& row, std::string_view column);

/// Trains on the first ceil(fraction n) points, validates on the rest and
/// returns the grid value with the smallest validation MSE (ties go to the
/// larger lambda).
double holdout_select(const Dataset& data, double split_fraction, const Grid& grid,
                      const KernelSpec& k, FilterMethod m);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

double median(std::vector<double> values);

/// OLS of log(median error per n) on log n.
RateFit fit_rate(std::span<const long> ns, std::span<const double> errors);
RateFit fit_rate(std::span<const ExperimentRow> rows, std::string_view error_column,
                 std::optional<FilterMethod> filter = std::nullopt);

/// 2 log(2/eta) (L / n + sigma / sqrt(n)).
double bernstein_bound(long n, double L, double sigma, double eta);

enum class BoundedFamily { Rademacher, Uniform, SparseBernoulli };

struct BernsteinCheck {
  double bound = 0.0;
  double sigma = 0.0;
  long exceedances = 0;
  long trials = 0;
  double frequency() const { return trials ? double(exceedances) / double(trials) : 0.0; }
};

/// Monte-Carlo frequency with which |mean - E xi| exceeds bernstein_bound for
/// i.i.d. draws bounded by L/2 (sigma^2 = E xi^2 of the family).
BernsteinCheck bernstein_monte_carlo(BoundedFamily family, long n, double L, double eta,
                                     long trials, std::uint64_t seed);

enum class Design { UniformRandom, Equispaced };

struct ConcentrationCell {
  long n = 0;
  double lambda = 0.0;
  double delta = 0.0;
  long applicable = 0;
  long holds = 0;
  double frequency() const { return applicable ? double(holds) / double(applicable) : 1.0; }
};

struct ConcentrationEvent {
  long n = 0;
  long replications = 0;
  long event_holds = 0;
  double frequency() const { return replications ? double(event_holds) / double(replications) : 1.0; }
};

struct ConcentrationSummary {
  std::vector<ConcentrationCell> cells;
  std::vector<ConcentrationEvent> events;
};

struct ConcentrationConfig {
  std::vector<long> n_values;
  /// Empty: a data-driven geometric grid per replication.
  std::vector<double> lambdas;
  double eta = 0.1;
  long replications = 1;
  double q = 2.0;
  std::uint64_t seed_base = 0;
  HeuristicOptions heuristic;
  Design design = Design::UniformRandom;
};

/// Frequency of the factor-5 comparison between N(lambda) and N_x(lambda)
/// over replications, restricted to grid points with delta <= 1. The event
/// counts a replication when every applicable grid point satisfies it.
ConcentrationSummary concentration_experiment(const SyntheticModel& model,
                                              const ConcentrationConfig& cfg);

std::vector<double> equispaced_design(long n);

struct FilterSummary {
  FilterMethod filter;
  long rows = 0;
  long failures = 0;
  std::optional<RateFit> adaptive_rate;  // err_s12_at_hat
  std::optional<RateFit> grid_min_rate;  // err_min_over_grid_s12
  double median_oracle_factor = 0.0;     // err_s12_at_hat / err_min_over_grid_s12
  double median_one_for_all = 0.0;       // err_s0_at_hat_half / err_s0_at_hat
  double inclusion_frequency = 0.0;      // lambda_star <= lambda_hat_half
  double median_holdout_factor = 0.0;    // err_at_holdout / err_min_over_grid_s12
};

std::vector<FilterSummary> summarize(std::span<const ExperimentRow> rows);

}  // namespace lepskii
