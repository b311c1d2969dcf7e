#include "lepskii/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "lepskii/config_io.hpp"
#include "lepskii/format.hpp"

namespace lepskii {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  write(file);
}

void emit_json(const std::string& path, std::ostream& fallback, const Json& doc) {
  emit(path, fallback, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
}

double parse_lambda0_flag(const std::string& text) {
  if (text == "auto") return 0.0;
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    require_lambda(value, "--lambda0");
    return value;
  } catch (const std::logic_error&) {
    throw UsageError("--lambda0 expects 'auto' or a number, got '" + text + "'");
  }
}

std::vector<double> read_query_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> xs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string field = line.substr(0, line.find(','));
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorKind::ParseError, "bad query point '" + field + "'");
    }
    xs.push_back(value);
  }
  return xs;
}

int env_threads() {
  if (const char* env = std::getenv("LEPSKII_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw UsageError(std::string("LEPSKII_THREADS is not an integer: ") + env);
    }
  }
  return 0;
}

}  // namespace

std::vector<EffdimRow> effdim_table(const SyntheticModel& model, long n, std::uint64_t seed,
                                    double q, double lambda0, double eta) {
  require_eta(eta, "effdim_table");
  const SyntheticSample sample = generate(model, n, seed);
  const Eigen::VectorXd mu = normalized_gram_eigenvalues(model.kernel(), sample.data.xs);
  const Grid grid = geometric_grid(lambda0 > 0.0 ? lambda0 : heuristic_lambda0(mu, n, q), q);
  std::vector<EffdimRow> rows;
  for (double lambda : grid.lambdas) {
    EffdimRow row;
    row.lambda = lambda;
    row.N_model = model_effdim(model.t_bar, lambda);
    row.N_emp = empirical_effdim(mu, lambda);
    const TwoSidedCheck check = two_sided_check(row.N_model, row.N_emp, n, lambda, eta);
    row.delta = check.delta;
    if (check.factor5_applicable) row.factor5_holds = check.factor5_holds;
    rows.push_back(row);
  }
  return rows;
}

void write_effdim_csv(std::ostream& out, const std::vector<EffdimRow>& rows) {
  out << "lambda,N_model,N_emp,delta,factor5_holds\n";
  for (const EffdimRow& row : rows) {
    out << format_double(row.lambda) << ',' << format_double(row.N_model) << ','
        << format_double(row.N_emp) << ',' << format_double(row.delta) << ','
        << (row.factor5_holds ? (*row.factor5_holds ? "1" : "0") : "na") << '\n';
  }
}

std::vector<EffdimRow> read_effdim_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "lambda,N_model,N_emp,delta,factor5_holds") {
    throw Error(ErrorKind::ParseError, "effdim CSV header does not match");
  }
  std::vector<EffdimRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw Error(ErrorKind::ParseError, "effdim CSV row needs 5 fields");
    EffdimRow row;
    double* targets[] = {&row.lambda, &row.N_model, &row.N_emp, &row.delta};
    for (std::size_t i = 0; i < 4; ++i) {
      auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), *targets[i]);
      if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
        throw Error(ErrorKind::ParseError, "bad effdim field '" + fields[i] + "'");
      }
    }
    if (fields[4] == "1") {
      row.factor5_holds = true;
    } else if (fields[4] == "0") {
      row.factor5_holds = false;
    } else if (fields[4] != "na") {
      throw Error(ErrorKind::ParseError, "bad factor5_holds field '" + fields[4] + "'");
    }
    rows.push_back(row);
  }
  return rows;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive regularization-parameter selection for spectral kernel regression", "lepskii"};
  app.require_subcommand(1);

  // effdim
  std::string model_path, out_path;
  long n = 0;
  std::uint64_t seed = 0;
  double q = 2.0, eta = 0.1;
  std::string lambda0_text = "auto";
  auto* effdim = app.add_subcommand("effdim", "Effective-dimension curves N(lambda) and N_x(lambda) on a grid");
  effdim->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  effdim->add_option("--n", n, "Sample size")->required()->check(CLI::PositiveNumber);
  effdim->add_option("--seed", seed, "Design seed");
  effdim->add_option("--q", q, "Grid ratio")->capture_default_str();
  effdim->add_option("--lambda0", lambda0_text, "Smallest grid value or 'auto'")->capture_default_str();
  effdim->add_option("--eta", eta, "Confidence level")->capture_default_str();
  effdim->add_option("--out", out_path, "Output CSV (default stdout)");

  // grid
  std::string data_path, kernel_text;
  long grid_n = 0;
  auto* grid = app.add_subcommand("grid", "Geometric grid and its validity conditions");
  grid->add_option("--lambda0", lambda0_text, "Target lambda_0 or 'auto' (needs --data and --kernel)")->required();
  grid->add_option("--q", q, "Grid ratio")->capture_default_str();
  grid->add_option("--n", grid_n, "Sample size for the condition checks (default: data size)");
  grid->add_option("--eta", eta, "Confidence level")->capture_default_str();
  grid->add_option("--data", data_path, "Dataset CSV (x,y)")->check(CLI::ExistingFile);
  grid->add_option("--kernel", kernel_text, "Kernel spec, e.g. gaussian:0.2");
  grid->add_option("--out", out_path, "Output JSON (default stdout)");

  // fit
  double lambda = 0.0;
  std::string filter_text = "tikhonov", query_path, predictions_path;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one estimator at a fixed lambda");
  fit_cmd->add_option("--data", data_path, "Dataset CSV (x,y)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--kernel", kernel_text, "Kernel spec")->required();
  fit_cmd->add_option("--lambda", lambda, "Regularization parameter in (0, 1]")->required();
  fit_cmd->add_option("--filter", filter_text, "tikhonov, cutoff or landweber")->capture_default_str();
  fit_cmd->add_option("--out", out_path, "Coefficient CSV x,y,c,fitted (default stdout)");
  fit_cmd->add_option("--query", query_path, "CSV whose first column holds query points")->check(CLI::ExistingFile);
  fit_cmd->add_option("--predictions", predictions_path, "Prediction CSV x,prediction");

  // balance
  BalancingConfig bal;
  std::string mode_text = "practical";
  auto* balance = app.add_subcommand("balance", "Balancing-principle selection with diagnostics");
  balance->add_option("--data", data_path, "Dataset CSV (x,y)")->required()->check(CLI::ExistingFile);
  balance->add_option("--kernel", kernel_text, "Kernel spec")->required();
  balance->add_option("--sigma", bal.sigma, "Noise level")->required();
  balance->add_option("--M", bal.M_bound, "Noise bound M")->capture_default_str();
  balance->add_option("--s", bal.s, "Norm index in [0, 1/2]")->capture_default_str();
  balance->add_option("--eta", bal.eta, "Confidence level")->capture_default_str();
  balance->add_option("--q", q, "Grid ratio")->capture_default_str();
  balance->add_option("--lambda0", lambda0_text, "Smallest grid value or 'auto'")->capture_default_str();
  balance->add_option("--constant-mode", mode_text, "practical or theoretical")->capture_default_str();
  balance->add_option("--bal-factor", bal.bal_factor, "Threshold factor")->capture_default_str();
  balance->add_option("--c-s", bal.c_s, "Threshold constant c_s")->capture_default_str();
  balance->add_option("--filter", filter_text, "tikhonov, cutoff or landweber")->capture_default_str();
  balance->add_option("--out", out_path, "Diagnostics JSON (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic dataset");
  simulate->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--n", n, "Sample size")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_option("--out", out_path, "Dataset CSV (default stdout)");

  // experiment
  std::string config_path, out_dir;
  int threads = 0;
  bool timing = false;
  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo run over n and replications");
  experiment->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  experiment->add_option("--out-dir", out_dir, "Directory for results.csv and summary.json")->required();
  experiment->add_option("--threads", threads, "Worker threads (fallback: LEPSKII_THREADS)")->check(CLI::PositiveNumber);
  experiment->add_flag("--timing", timing, "Record wall time per replication");

  // rate
  std::string results_path, column = "err_s12_at_hat", rate_filter;
  auto* rate = app.add_subcommand("rate", "Fit log median error against log n");
  rate->add_option("--results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  rate->add_option("--column", column, "Error column")->capture_default_str();
  rate->add_option("--filter", rate_filter, "Restrict to one filter");
  rate->add_option("--out", out_path, "Output JSON (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  }

  try {
    if (effdim->parsed()) {
      const SyntheticModel model = model_from_json(read_json_file(model_path));
      const auto rows = effdim_table(model, n, seed, q, parse_lambda0_flag(lambda0_text), eta);
      emit(out_path, out, [&](std::ostream& os) { write_effdim_csv(os, rows); });
    } else if (grid->parsed()) {
      const double lambda0 = parse_lambda0_flag(lambda0_text);
      std::optional<Dataset> data;
      if (!data_path.empty()) data = read_dataset_csv(data_path);
      double target = lambda0;
      if (lambda0 == 0.0) {
        if (!data || kernel_text.empty()) throw UsageError("--lambda0 auto needs --data and --kernel");
        const GramSystem system = gram_system(parse_kernel(kernel_text), data->xs);
        target = heuristic_lambda0(system.spectrum, long(data->size()), q);
      }
      const long size = grid_n > 0 ? grid_n : (data ? long(data->size()) : 0);
      if (size < 1) throw UsageError("grid needs --n or --data");
      const Grid g = geometric_grid(target, q);
      const GridConditions conditions = validate_grid_conditions(g, size, eta);
      Json doc = grid_to_json(g);
      doc["lambda0_target"] = target;
      doc["n"] = size;
      doc["eta"] = eta;
      doc["conditions"] = Json{{"nlam0_ok", conditions.nlam0_ok}, {"logterm_ok", conditions.logterm_ok}};
      emit_json(out_path, out, doc);
    } else if (fit_cmd->parsed()) {
      const Dataset data = read_dataset_csv(data_path);
      const KernelSpec kernel = parse_kernel(kernel_text);
      const EstimatorCoefficients e = fit(data, kernel, parse_filter(filter_text), lambda);
      const Eigen::VectorXd fitted = predict(e, kernel, data.xs, data.xs);
      emit(out_path, out, [&](std::ostream& os) {
        os << "x,y,c,fitted\n";
        for (std::size_t j = 0; j < data.size(); ++j) {
          const auto i = static_cast<Eigen::Index>(j);
          os << format_double(data.xs[j]) << ',' << format_double(data.ys[j]) << ','
             << format_double(e.c(i)) << ',' << format_double(fitted(i)) << '\n';
        }
      });
      if (!query_path.empty()) {
        if (predictions_path.empty()) throw UsageError("--query needs --predictions");
        const std::vector<double> xs = read_query_points(query_path);
        const Eigen::VectorXd values = predict(e, kernel, data.xs, xs);
        emit(predictions_path, out, [&](std::ostream& os) {
          os << "x,prediction\n";
          for (std::size_t j = 0; j < xs.size(); ++j) {
            os << format_double(xs[j]) << ',' << format_double(values(Eigen::Index(j))) << '\n';
          }
        });
      }
    } else if (balance->parsed()) {
      bal.constant_mode = parse_constant_mode(mode_text);
      validate(bal);
      const Dataset data = read_dataset_csv(data_path);
      const GramSystem system = gram_system(parse_kernel(kernel_text), data.xs);
      const long size = long(data.size());
      const double lambda0 = parse_lambda0_flag(lambda0_text);
      const Grid g = geometric_grid(lambda0 > 0.0 ? lambda0 : heuristic_lambda0(system.spectrum, size, q), q);
      const auto fits = fit_grid(system, data.ys, parse_filter(filter_text), g);
      const BalancingDiagnostics d = balancing_select(g, fits, system, bal);
      emit_json(out_path, out, diagnostics_to_json(d, bal));
    } else if (simulate->parsed()) {
      const SyntheticModel model = model_from_json(read_json_file(model_path));
      const SyntheticSample sample = generate(model, n, seed);
      emit(out_path, out, [&](std::ostream& os) { write_dataset_csv(os, sample.data); });
    } else if (experiment->parsed()) {
      ExperimentConfig cfg = experiment_config_from_json(read_json_file(config_path));
      if (threads > 0) {
        cfg.threads = threads;
      } else if (const int from_env = env_threads(); from_env > 0) {
        cfg.threads = from_env;
      }
      if (timing) cfg.record_timing = true;
      const auto rows = run_experiment(cfg, &err);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      emit((dir / "results.csv").string(), out, [&](std::ostream& os) { write_results_csv(os, rows); });
      emit_json((dir / "summary.json").string(), out, summary_to_json(summarize(rows)));
    } else if (rate->parsed()) {
      std::ifstream in(results_path);
      if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + results_path + "'");
      const auto rows = read_results_csv(in);
      std::optional<FilterMethod> filter;
      if (!rate_filter.empty()) filter = parse_filter(rate_filter);
      if (column == "n" || column == "replication" || column == "filter" || column == "status") {
        throw UsageError("--column must name an error or lambda column");
      }
      const RateFit result = fit_rate(rows, column, filter);
      Json doc = rate_to_json(result);
      doc["column"] = column;
      emit_json(out_path, out, doc);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace lepskii
