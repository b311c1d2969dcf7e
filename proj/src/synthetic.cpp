#include "lepskii/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace lepskii {

IndexFunctionSource parse_index_function(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> args;
  std::size_t start = colon;
  while (start != std::string::npos) {
    const std::size_t next = spec.find(':', start + 1);
    const std::string piece = spec.substr(start + 1, next == std::string::npos ? std::string::npos
                                                                               : next - start - 1);
    try {
      args.push_back(std::stod(piece));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad index function parameter '" + piece + "'");
    }
    start = next;
  }
  if (name == "power" && (args.size() == 1 || args.size() == 2) && args[0] > 0.0) {
    const double r = args[0];
    const double R = args.size() == 2 ? args[1] : 1.0;
    return IndexFunctionSource{[r, R](double t) { return R * std::pow(t, r); }, spec};
  }
  if (name == "log" && args.size() == 1 && args[0] > 0.0) {
    const double p = args[0];
    return IndexFunctionSource{
        [p](double t) { return t <= 0.0 ? 0.0 : std::pow(std::log(std::numbers::e / t), -p); },
        spec};
  }
  throw Error(ErrorKind::ParseError, "unknown index function '" + spec + "'");
}

KernelSpec SyntheticModel::kernel() const { return KernelSpec::explicit_spectrum(kappa2 * t_bar); }

Eigen::VectorXd SyntheticModel::target_coefficients() const {
  Eigen::VectorXd a(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (const auto* holder = std::get_if<HolderSource>(&source)) {
      a(i) = holder->R * std::pow(t_bar(i), holder->r) * h(i);
    } else {
      a(i) = std::get<IndexFunctionSource>(source).A(t_bar(i)) * h(i);
    }
  }
  return a;
}

double SyntheticModel::target(double x) const {
  const Eigen::VectorXd a = target_coefficients();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    sum += a(i) * std::sqrt(kappa2 * t_bar(i)) * trig_basis(i, x);
  }
  return sum;
}

Eigen::VectorXd source_profile(SourceShape shape, Eigen::Index dim) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
  if (shape == SourceShape::SingleMode) {
    h(0) = 1.0;
  } else {
    for (Eigen::Index i = 0; i < dim; ++i) h(i) = 1.0 / double(i + 1);
    h /= h.norm();
  }
  return h;
}

namespace {

SyntheticModel normalized_model(Eigen::VectorXd t, SourceCondition source, NoiseModel noise,
                                Eigen::VectorXd h) {
  const KernelSpec k = KernelSpec::explicit_spectrum(t);
  SyntheticModel model;
  model.kappa2 = kappa_squared(k);
  model.t_bar = t / model.kappa2;
  model.source = std::move(source);
  model.noise = noise;
  model.h = std::move(h);
  validate(model);
  return model;
}

}  // namespace

SyntheticModel make_polynomial_model(double b, Eigen::Index dim, SourceCondition source,
                                     NoiseModel noise, SourceShape shape) {
  if (!(b > 0.0) || dim < 1) {
    throw Error(ErrorKind::InvalidArgument, "polynomial model needs b > 0 and D >= 1");
  }
  Eigen::VectorXd t(dim);
  for (Eigen::Index i = 0; i < dim; ++i) t(i) = std::pow(double(i + 1), -b);
  SyntheticModel model =
      normalized_model(std::move(t), std::move(source), noise, source_profile(shape, dim));
  model.b_exponent = b;
  return model;
}

SyntheticModel make_custom_model(Eigen::VectorXd t, SourceCondition source, NoiseModel noise,
                                 Eigen::VectorXd h) {
  return normalized_model(std::move(t), std::move(source), noise, std::move(h));
}

void validate(const SyntheticModel& model) {
  if (model.t_bar.size() == 0) throw Error(ErrorKind::EmptySpectrum, "model spectrum is empty");
  for (Eigen::Index i = 0; i < model.dim(); ++i) {
    if (!(model.t_bar(i) > 0.0 && model.t_bar(i) <= 1.0) ||
        (i > 0 && model.t_bar(i) > model.t_bar(i - 1))) {
      throw Error(ErrorKind::InvalidArgument, "normalized spectrum must be nonincreasing in (0, 1]");
    }
  }
  if (model.h.size() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "source profile length differs from spectrum");
  }
  if (model.h.squaredNorm() > 1.0 + 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "source profile must have norm <= 1");
  }
  if (!(model.noise.sigma >= 0.0) || !(model.noise.M_bound >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise parameters must be nonnegative");
  }
  if (const auto* holder = std::get_if<HolderSource>(&model.source)) {
    if (!(holder->r > 0.0) || !(holder->R > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "Holder source needs r > 0 and R > 0");
    }
  }
}

SyntheticSample generate(const SyntheticModel& model, long n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "generate needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticSample out;
  out.target_coeffs = model.target_coefficients();
  out.data.xs.resize(static_cast<std::size_t>(n));
  out.data.ys.resize(static_cast<std::size_t>(n));
  for (auto& x : out.data.xs) x = uniform(rng);
  for (auto& e : out.data.ys) e = model.noise.sigma * normal(rng);

  const Eigen::VectorXd weights =
      out.target_coeffs.cwiseProduct((model.kappa2 * model.t_bar).cwiseSqrt());
  const Eigen::MatrixXd features = trig_features(out.data.xs, model.dim());
  const Eigen::VectorXd signal = features * weights;
  for (long j = 0; j < n; ++j) out.data.ys[static_cast<std::size_t>(j)] += signal(j);
  return out;
}

Eigen::VectorXd expand_in_model_basis(const SyntheticModel& model, const Eigen::VectorXd& c,
                                      const Eigen::MatrixXd& features) {
  if (features.rows() != c.size() || features.cols() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix does not match coefficients/model");
  }
  return (features.transpose() * c).cwiseProduct((model.kappa2 * model.t_bar).cwiseSqrt());
}

Eigen::VectorXd expand_in_model_basis(const SyntheticModel& model, const Eigen::VectorXd& c,
                                      std::span<const double> xs) {
  return expand_in_model_basis(model, c, trig_features(xs, model.dim()));
}

double true_error_norm(const Eigen::VectorXd& est_coeffs, const Eigen::VectorXd& target_coeffs,
                       const Eigen::VectorXd& t_bar, double s) {
  if (est_coeffs.size() != target_coeffs.size() || t_bar.size() != target_coeffs.size()) {
    throw Error(ErrorKind::DimensionMismatch, "true_error_norm: lengths differ");
  }
  const Eigen::ArrayXd diff = (est_coeffs - target_coeffs).array();
  return std::sqrt((t_bar.array().pow(2.0 * s) * diff.square()).sum());
}

double approx_error(const SyntheticModel& model, double lambda) {
  require_lambda(lambda, "approx_error");
  if (const auto* holder = std::get_if<HolderSource>(&model.source)) {
    return holder->R * std::pow(lambda, holder->r);
  }
  return std::get<IndexFunctionSource>(model.source).A(lambda);
}

ApproxErrorOracle approx_oracle(const SyntheticModel& model, double d2_constant) {
  if (const auto* holder = std::get_if<HolderSource>(&model.source)) {
    const HolderSource copy = *holder;
    return ApproxErrorOracle{[copy](double l) { return copy.R * std::pow(l, copy.r); }, d2_constant};
  }
  return ApproxErrorOracle{std::get<IndexFunctionSource>(model.source).A, d2_constant};
}

double oracle_lambda_regular(double r, double b, double sigma, double R, long n) {
  return std::pow(sigma * sigma / (R * R * double(n)), b / (2.0 * b * r + b + 1.0));
}

namespace {

// Root of an increasing function on [1e-16, 1] by bisection in log lambda.
double increasing_root(const std::function<double(double)>& f, const char* what) {
  double lo = 1e-16;
  double hi = 1.0;
  if (f(lo) > 0.0) throw Error(ErrorKind::NoCrossing, std::string(what) + ": no crossing above 1e-16");
  if (f(hi) < 0.0) throw Error(ErrorKind::NoCrossing, std::string(what) + ": no crossing below 1");
  for (int it = 0; it < 300 && hi / lo - 1.0 > 1e-10; ++it) {
    const double mid = std::sqrt(lo * hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double oracle_lambda_balance(const std::function<double(double)>& approx_tilde,
                             const std::function<double(double)>& sample_tilde) {
  return increasing_root([&](double l) { return approx_tilde(l) - sample_tilde(l); },
                         "oracle_lambda_balance");
}

double oracle_lambda_balance(const ApproxErrorOracle& oracle,
                             const std::function<double(double)>& effdim_fn,
                             const SampleErrorParams& params, bool include_remainder) {
  const long n = params.n;
  auto approx = [&](double l) {
    return include_remainder ? oracle(l, n) : oracle.A_fn(l);
  };
  auto sample = [&](double l) {
    return sample_error(params, effdim_clamped(effdim_fn(l)), l, include_remainder);
  };
  return oracle_lambda_balance(approx, sample);
}

double oracle_lambda_general(const std::function<double(double)>& A, double b, long n) {
  const double exponent = 0.5 * (1.0 / b + 1.0);
  const double target = 1.0 / std::sqrt(double(n));
  return increasing_root([&](double t) { return A(t) * std::pow(t, exponent) - target; },
                         "oracle_lambda_general");
}

double rate_exponent(double r, double b, double s) {
  return b * (r + s) / (2.0 * b * r + b + 1.0);
}

double lambda_star(const Grid& grid, const std::function<double(double)>& approx_tilde,
                   const std::function<double(double)>& sample_tilde) {
  std::optional<double> best;
  std::size_t members = 0;
  for (double lambda : grid.lambdas) {
    if (approx_tilde(lambda) <= sample_tilde(lambda)) {
      ++members;
      best = lambda;
    }
  }
  if (members == 0) throw Error(ErrorKind::EmptyJ, "approximation bound exceeds sample bound on the whole grid");
  if (members == grid.size()) throw Error(ErrorKind::FullJ, "grid does not bracket the crossing");
  return *best;
}

std::function<double(double)> model_approx_tilde(const SyntheticModel& model, long n,
                                                 double d2_constant) {
  ApproxErrorOracle oracle = approx_oracle(model, d2_constant);
  return [oracle, n](double lambda) { return oracle(lambda, n); };
}

std::function<double(double)> model_sample_tilde(const SyntheticModel& model, long n) {
  const SampleErrorParams params{model.noise.sigma, model.noise.M_bound, n};
  const Eigen::VectorXd t_bar = model.t_bar;
  return [params, t_bar](double lambda) {
    return sample_error(params, effdim_clamped(model_effdim(t_bar, lambda)), lambda, true);
  };
}

}  // namespace lepskii
