#include "lepskii/kernels.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lepskii/format.hpp"

namespace lepskii {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorKind::InvalidArgument, "gaussian bandwidth must be positive");
  }
  return KernelSpec(GaussianKernel{bandwidth});
}

KernelSpec KernelSpec::polynomial(int degree, double offset, double domain_radius) {
  if (degree < 1) throw Error(ErrorKind::InvalidArgument, "polynomial degree must be >= 1");
  if (!(offset >= 0.0)) throw Error(ErrorKind::InvalidArgument, "polynomial offset must be >= 0");
  if (!(domain_radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "polynomial domain radius must be positive");
  }
  return KernelSpec(PolynomialKernel{degree, offset, domain_radius});
}

KernelSpec KernelSpec::explicit_spectrum(Eigen::VectorXd t) {
  if (t.size() == 0) throw Error(ErrorKind::EmptySpectrum, "explicit spectrum is empty");
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (!(t(i) > 0.0) || !std::isfinite(t(i))) {
      throw Error(ErrorKind::InvalidArgument, "explicit spectrum entries must be positive");
    }
    if (i > 0 && t(i) > t(i - 1)) {
      throw Error(ErrorKind::InvalidArgument, "explicit spectrum must be nonincreasing");
    }
  }
  return KernelSpec(ExplicitSpectrumKernel{std::move(t)});
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view text, const char* what) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

KernelSpec parse_kernel(std::string_view flag) {
  const auto parts = split(flag, ':');
  const std::string_view name = parts.front();
  auto arg = [&](std::size_t i) { return parse_number(parts.at(i), "kernel parameter"); };
  if (name == "gaussian" && parts.size() == 2) return KernelSpec::gaussian(arg(1));
  if ((name == "poly" || name == "polynomial") && parts.size() >= 2 && parts.size() <= 4) {
    const double degree = arg(1);
    if (degree != std::floor(degree)) {
      throw Error(ErrorKind::ParseError, "polynomial degree must be an integer");
    }
    return KernelSpec::polynomial(static_cast<int>(degree), parts.size() > 2 ? arg(2) : 1.0,
                                  parts.size() > 3 ? arg(3) : 1.0);
  }
  if (name == "spectrum" && parts.size() == 3) {
    const double b = arg(1);
    const double count = arg(2);
    if (!(b > 0.0) || !(count >= 1.0) || count != std::floor(count)) {
      throw Error(ErrorKind::ParseError, "spectrum kernel needs b > 0 and integer D >= 1");
    }
    Eigen::VectorXd t(static_cast<Eigen::Index>(count));
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = std::pow(double(i + 1), -b);
    return KernelSpec::explicit_spectrum(std::move(t));
  }
  throw Error(ErrorKind::ParseError, "unrecognized kernel spec '" + std::string(flag) + "'");
}

std::string describe(const KernelSpec& k) {
  struct Visitor {
    std::string operator()(const GaussianKernel& g) const {
      return "gaussian:" + format_double(g.bandwidth);
    }
    std::string operator()(const PolynomialKernel& p) const {
      return "poly:" + std::to_string(p.degree) + ":" + format_double(p.offset) + ":" +
             format_double(p.domain_radius);
    }
    std::string operator()(const ExplicitSpectrumKernel& e) const {
      return "spectrum[D=" + std::to_string(e.t.size()) + "]";
    }
  };
  return std::visit(Visitor{}, k.variant());
}

void validate(const Dataset& data) {
  if (data.xs.size() != data.ys.size()) {
    throw Error(ErrorKind::DimensionMismatch, "dataset xs and ys differ in length");
  }
  if (data.xs.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  for (std::size_t i = 0; i < data.xs.size(); ++i) {
    if (!std::isfinite(data.xs[i]) || !std::isfinite(data.ys[i])) {
      throw Error(ErrorKind::NonFinite, "dataset row " + std::to_string(i) + " is not finite");
    }
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y") {
    throw Error(ErrorKind::ParseError, "dataset CSV must start with header 'x,y'");
  }
  Dataset data;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      throw Error(ErrorKind::ParseError, "dataset CSV row " + std::to_string(row) +
                                             " does not have two fields");
    }
    data.xs.push_back(parse_number(fields[0], "x"));
    data.ys.push_back(parse_number(fields[1], "y"));
  }
  validate(data);
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "x,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.xs[i]) << ',' << format_double(data.ys[i]) << '\n';
  }
}

double trig_basis(Eigen::Index index, double x) {
  if (index == 0) return 1.0;
  const double k = double((index + 1) / 2);
  const double arg = 2.0 * std::numbers::pi * k * x;
  return std::numbers::sqrt2 * ((index % 2 == 1) ? std::cos(arg) : std::sin(arg));
}

Eigen::MatrixXd trig_features(std::span<const double> xs, Eigen::Index count) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd phi(n, count);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = xs[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < count; ++i) phi(j, i) = trig_basis(i, x);
  }
  return phi;
}

void check_domain(const KernelSpec& k, double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::DomainViolation, "point is not finite");
  if (const auto* p = std::get_if<PolynomialKernel>(&k.variant())) {
    if (std::abs(x) > p->domain_radius) {
      throw Error(ErrorKind::DomainViolation,
                  "point " + format_double(x) + " outside polynomial kernel domain");
    }
  } else if (k.has_explicit_spectrum()) {
    if (x < 0.0 || x > 1.0) {
      throw Error(ErrorKind::DomainViolation, "point " + format_double(x) + " outside [0, 1]");
    }
  }
}

double kernel_eval(const KernelSpec& k, double x, double y) {
  check_domain(k, x);
  check_domain(k, y);
  struct Visitor {
    double x, y;
    double operator()(const GaussianKernel& g) const {
      const double d = (x - y) / g.bandwidth;
      return std::exp(-0.5 * d * d);
    }
    double operator()(const PolynomialKernel& p) const {
      return std::pow(p.offset + x * y, p.degree);
    }
    double operator()(const ExplicitSpectrumKernel& e) const {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < e.t.size(); ++i) sum += e.t(i) * trig_basis(i, x) * trig_basis(i, y);
      return sum;
    }
  };
  return std::visit(Visitor{x, y}, k.variant());
}

double kappa_squared(const KernelSpec& k) {
  struct Visitor {
    double operator()(const GaussianKernel&) const { return 1.0; }
    double operator()(const PolynomialKernel& p) const {
      return std::pow(p.offset + p.domain_radius * p.domain_radius, p.degree);
    }
    // e_1^2 = 1 and e_i^2 <= 2 for i >= 2.
    double operator()(const ExplicitSpectrumKernel& e) const {
      return e.t(0) + 2.0 * e.t.tail(e.t.size() - 1).sum();
    }
  };
  return std::visit(Visitor{}, k.variant());
}

namespace {

// Phi * diag(sqrt(t)) so that K = F F^T.
Eigen::MatrixXd spectrum_factor(const ExplicitSpectrumKernel& e, std::span<const double> xs) {
  Eigen::MatrixXd phi = trig_features(xs, e.t.size());
  return phi * e.t.cwiseSqrt().asDiagonal();
}

void check_points(const KernelSpec& k, std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorKind::InvalidArgument, "point set is empty");
  for (double x : xs) check_domain(k, x);
}

}  // namespace

SymMatrix gram_matrix(const KernelSpec& k, std::span<const double> xs) {
  check_points(k, xs);
  if (const auto* e = k.spectrum()) {
    const Eigen::MatrixXd f = spectrum_factor(*e, xs);
    return f * f.transpose();
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  SymMatrix gram(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      gram(i, j) = kernel_eval(k, xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

SymMatrix normalized_gram(const KernelSpec& k, std::span<const double> xs) {
  return gram_matrix(k, xs) / (double(xs.size()) * kappa_squared(k));
}

Eigen::MatrixXd cross_kernel(const KernelSpec& k, std::span<const double> train,
                             std::span<const double> query) {
  for (double x : train) check_domain(k, x);
  for (double x : query) check_domain(k, x);
  if (const auto* e = k.spectrum()) {
    return spectrum_factor(*e, query) * spectrum_factor(*e, train).transpose();
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(query.size()), static_cast<Eigen::Index>(train.size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = kernel_eval(k, query[static_cast<std::size_t>(i)], train[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

CrossEvaluator::CrossEvaluator(const KernelSpec& k, std::span<const double> train,
                               std::span<const double> query) {
  for (double x : train) check_domain(k, x);
  for (double x : query) check_domain(k, x);
  if (const auto* e = k.spectrum()) {
    query_factor_ = spectrum_factor(*e, query);
    train_factor_ = spectrum_factor(*e, train);
  } else {
    query_factor_ = cross_kernel(k, train, query);
  }
}

Eigen::VectorXd CrossEvaluator::apply(const Eigen::VectorXd& c) const {
  if (train_factor_.size() == 0) return query_factor_ * c;
  return query_factor_ * (train_factor_.transpose() * c);
}

GramSystem gram_system(const KernelSpec& k, std::span<const double> xs) {
  check_points(k, xs);
  const double kappa2 = kappa_squared(k);
  const double scale = double(xs.size()) * kappa2;
  if (const auto* e = k.spectrum()) {
    const Eigen::MatrixXd factor = spectrum_factor(*e, xs) / std::sqrt(scale);
    return GramSystem{factor_eigendecompose(factor, true), scale, kappa2};
  }
  DecomposeOptions options;
  options.normalized_gram = true;
  return GramSystem{sym_eigendecompose(normalized_gram(k, xs), options), scale, kappa2};
}

Eigen::VectorXd normalized_gram_eigenvalues(const KernelSpec& k, std::span<const double> xs) {
  check_points(k, xs);
  const double scale = double(xs.size()) * kappa_squared(k);
  if (const auto* e = k.spectrum()) {
    return factor_eigenvalues(spectrum_factor(*e, xs) / std::sqrt(scale), true);
  }
  DecomposeOptions options;
  options.normalized_gram = true;
  return sym_eigenvalues(normalized_gram(k, xs), options);
}

}  // namespace lepskii
