#include "lepskii/config_io.hpp"

#include <fstream>
#include <limits>

namespace lepskii {

namespace {

template <typename T>
T value_or(const Json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  return doc.at(key).get<T>();
}

const Json& required(const Json& doc, const char* key, const char* where) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw Error(ErrorKind::ParseError, std::string(where) + ": missing '" + key + "'");
  }
  return doc.at(key);
}

Eigen::VectorXd to_vector(const Json& array) {
  const auto values = array.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json from_vector(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

SyntheticModel model_from_json_impl(const Json& doc) {
  const Json& spectrum = required(doc, "spectrum", "model");
  const Json& source_doc = required(doc, "source", "model");
  const Json noise_doc = doc.value("noise", Json::object());

  NoiseModel noise;
  noise.sigma = value_or(noise_doc, "sigma", 0.0);
  noise.M_bound = value_or(noise_doc, "M", noise.sigma);

  SourceCondition source;
  const std::string source_type = value_or<std::string>(source_doc, "type", "holder");
  if (source_type == "holder") {
    source = HolderSource{value_or(source_doc, "r", 0.5), value_or(source_doc, "R", 1.0)};
  } else if (source_type == "index") {
    source = parse_index_function(required(source_doc, "A", "source").get<std::string>());
  } else {
    throw Error(ErrorKind::ParseError, "unknown source type '" + source_type + "'");
  }

  const std::string type = required(spectrum, "type", "spectrum").get<std::string>();
  Eigen::VectorXd t;
  std::optional<double> b;
  if (type == "poly") {
    b = required(spectrum, "b", "spectrum").get<double>();
    const auto dim = required(spectrum, "D", "spectrum").get<long>();
    if (!(*b > 0.0) || dim < 1) throw Error(ErrorKind::InvalidArgument, "poly spectrum needs b > 0, D >= 1");
    t.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) t(i) = std::pow(double(i + 1), -*b);
  } else if (type == "custom") {
    t = to_vector(required(spectrum, "t", "spectrum"));
  } else {
    throw Error(ErrorKind::ParseError, "unknown spectrum type '" + type + "'");
  }

  Eigen::VectorXd h;
  const Json h_doc = source_doc.contains("h") ? source_doc.at("h") : doc.value("h", Json("single"));
  if (h_doc.is_array()) {
    h = to_vector(h_doc);
  } else {
    const std::string shape = h_doc.get<std::string>();
    if (shape == "single") {
      h = source_profile(SourceShape::SingleMode, t.size());
    } else if (shape == "spread") {
      h = source_profile(SourceShape::Spread, t.size());
    } else {
      throw Error(ErrorKind::ParseError, "unknown source profile '" + shape + "'");
    }
  }
  SyntheticModel model = make_custom_model(std::move(t), std::move(source), noise, std::move(h));
  model.b_exponent = b;
  return model;
}

// Rewraps library JSON exceptions as parse errors so callers see one idiom.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace

double json_number(const Json& value) {
  if (value.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return value.get<double>();
}

SyntheticModel model_from_json(const Json& doc) {
  return guarded([&] { return model_from_json_impl(doc); });
}

std::string_view to_string(ConstantMode mode) {
  return mode == ConstantMode::Practical ? "practical" : "theoretical";
}

ConstantMode parse_constant_mode(std::string_view name) {
  if (name == "practical") return ConstantMode::Practical;
  if (name == "theoretical") return ConstantMode::Theoretical;
  throw Error(ErrorKind::ParseError, "unknown constant mode '" + std::string(name) + "'");
}

ExperimentConfig experiment_config_from_json(const Json& doc) {
  return guarded([&] {
    ExperimentConfig cfg;
    cfg.model = model_from_json_impl(required(doc, "model", "experiment"));
    cfg.n_values = required(doc, "n_values", "experiment").get<std::vector<long>>();
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
      if (cfg.n_values[i] < 1 || (i > 0 && cfg.n_values[i] <= cfg.n_values[i - 1])) {
        throw Error(ErrorKind::InvalidArgument, "n_values must be positive and increasing");
      }
    }
    cfg.replications = value_or(doc, "replications", 1L);
    if (cfg.replications < 0) throw Error(ErrorKind::InvalidArgument, "replications must be >= 0");
    cfg.seed_base = value_or<std::uint64_t>(doc, "seed_base", 0);
    cfg.grid_q = value_or(doc, "grid_q", 2.0);
    if (!(cfg.grid_q > 1.0)) throw Error(ErrorKind::InvalidRatio, "grid_q must exceed 1");

    const Json lambda0 = doc.value("lambda0", Json::object());
    cfg.lambda0_method = parse_lambda0_method(value_or<std::string>(lambda0, "method", "heuristic"));
    cfg.lambda0_value = value_or(lambda0, "value", 0.0);
    if (cfg.lambda0_method == Lambda0Method::Fixed) require_lambda(cfg.lambda0_value, "lambda0.value");

    const Json heuristic = doc.value("heuristic", Json::object());
    cfg.heuristic.threshold = value_or(heuristic, "threshold", cfg.heuristic.threshold);
    const std::string scale = value_or<std::string>(heuristic, "scale", "sigma_free");
    if (scale == "sigma_free") {
      cfg.heuristic.scale = HeuristicScale::SigmaFree;
    } else if (scale == "sigma_scaled") {
      cfg.heuristic.scale = HeuristicScale::SigmaScaled;
    } else {
      throw Error(ErrorKind::ParseError, "unknown heuristic scale '" + scale + "'");
    }
    cfg.heuristic.sigma = value_or(heuristic, "sigma", cfg.model.noise.sigma);

    const Json bal = doc.value("balancing", Json::object());
    cfg.balancing.eta = value_or(bal, "eta", cfg.balancing.eta);
    cfg.balancing.sigma = value_or(bal, "sigma", cfg.model.noise.sigma);
    cfg.balancing.M_bound = value_or(bal, "M", cfg.model.noise.M_bound);
    cfg.balancing.c_s = value_or(bal, "c_s", cfg.balancing.c_s);
    cfg.balancing.bal_factor = value_or(bal, "bal_factor", cfg.balancing.bal_factor);
    cfg.balancing.constant_mode =
        parse_constant_mode(value_or<std::string>(bal, "constant_mode", "practical"));
    validate(cfg.balancing);

    if (doc.contains("filters")) {
      cfg.filters.clear();
      for (const auto& name : doc.at("filters").get<std::vector<std::string>>()) {
        cfg.filters.push_back(parse_filter(name));
      }
    }
    cfg.holdout_fraction = value_or(doc, "holdout_fraction", cfg.holdout_fraction);
    cfg.record_timing = value_or(doc, "record_timing", false);
    cfg.threads = value_or(doc, "threads", 1);
    return cfg;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return guarded([&] { return Json::parse(in); });
}

Json diagnostics_to_json(const BalancingDiagnostics& d, const BalancingConfig& cfg) {
  Json pairwise = Json::array();
  for (Eigen::Index k = 0; k < d.pairwise_norms.rows(); ++k) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(d.pairwise_norms(k, j));
    pairwise.push_back(std::move(row));
  }
  Json in_jplus = Json::array();
  for (bool b : d.in_jplus) in_jplus.push_back(b);
  return Json{{"lambda_hat", d.lambda_hat},
              {"index_hat", d.index_hat},
              {"lambdas", from_vector(d.lambdas)},
              {"in_jplus", in_jplus},
              {"thresholds", from_vector(d.thresholds)},
              {"pairwise_norms", pairwise},
              {"s", cfg.s},
              {"eta", cfg.eta},
              {"sigma", cfg.sigma},
              {"M", cfg.M_bound},
              {"c_s", cfg.c_s},
              {"bal_factor", cfg.bal_factor},
              {"constant_mode", std::string(to_string(cfg.constant_mode))}};
}

BalancingDiagnostics diagnostics_from_json(const Json& doc) {
  return guarded([&] {
    BalancingDiagnostics d;
    d.lambda_hat = required(doc, "lambda_hat", "diagnostics").get<double>();
    d.index_hat = required(doc, "index_hat", "diagnostics").get<std::size_t>();
    d.lambdas = required(doc, "lambdas", "diagnostics").get<std::vector<double>>();
    d.in_jplus = required(doc, "in_jplus", "diagnostics").get<std::vector<bool>>();
    d.thresholds = required(doc, "thresholds", "diagnostics").get<std::vector<double>>();
    const auto m = static_cast<Eigen::Index>(d.lambdas.size());
    d.pairwise_norms = Eigen::MatrixXd::Zero(m, m);
    const Json& pairwise = required(doc, "pairwise_norms", "diagnostics");
    for (Eigen::Index k = 0; k < m && k < static_cast<Eigen::Index>(pairwise.size()); ++k) {
      const Json& row = pairwise.at(static_cast<std::size_t>(k));
      for (Eigen::Index j = 0; j < k; ++j) d.pairwise_norms(k, j) = json_number(row.at(std::size_t(j)));
    }
    return d;
  });
}

Json grid_to_json(const Grid& g) {
  return Json{{"q", g.q}, {"lambdas", from_vector(g.lambdas)}};
}

Grid grid_from_json(const Json& doc) {
  return guarded([&] {
    Grid g = Grid::from_values(required(doc, "lambdas", "grid").get<std::vector<double>>());
    g.q = value_or(doc, "q", g.q);
    return g;
  });
}

Json rate_to_json(const RateFit& fit) {
  return Json{{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
}

RateFit rate_from_json(const Json& doc) {
  return guarded([&] {
    return RateFit{required(doc, "slope", "rate").get<double>(),
                   required(doc, "intercept", "rate").get<double>(),
                   required(doc, "r2", "rate").get<double>()};
  });
}

Json summary_to_json(const std::vector<FilterSummary>& summaries) {
  Json filters = Json::array();
  for (const FilterSummary& s : summaries) {
    Json entry{{"filter", std::string(to_string(s.filter))},
               {"rows", s.rows},
               {"failures", s.failures},
               {"median_oracle_factor", s.median_oracle_factor},
               {"median_one_for_all", s.median_one_for_all},
               {"inclusion_frequency", s.inclusion_frequency},
               {"median_holdout_factor", s.median_holdout_factor}};
    entry["adaptive_rate"] = s.adaptive_rate ? rate_to_json(*s.adaptive_rate) : Json();
    entry["grid_min_rate"] = s.grid_min_rate ? rate_to_json(*s.grid_min_rate) : Json();
    filters.push_back(std::move(entry));
  }
  return Json{{"filters", filters}};
}

}  // namespace lepskii
