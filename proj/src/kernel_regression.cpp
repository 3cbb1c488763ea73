#include "lab/kernel_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lab/error.hpp"
#include "lab/markov_solver.hpp"
#include "lab/random.hpp"
#include "lab/simd/kernels.hpp"

namespace lab::kreg {

using spectral::KernelKind;
using spectral::MercerKernel;

namespace {

void require_closed_form(const MercerKernel& k) {
  if (!k.has_closed_form())
    throw CapabilityError("kernel regression needs a kernel with a closed-form evaluator");
}

void check_data(const Dataset1D& data) {
  if (data.x.empty()) throw InputError("dataset is empty");
  if (data.x.size() != data.y.size()) throw InputError("dataset: |X| != |Y|");
  for (double v : data.x)
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("dataset: input outside [0,1]");
}

Eigen::MatrixXd assemble(const MercerKernel& k, std::span<const double> x) {
  require_closed_form(k);
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  const auto& kt = simd::active();
  const bool bridge = k.kind == KernelKind::BrownianBridge;
  for (Eigen::Index j = 0; j < n; ++j)
    kt.brownian_row(x[static_cast<std::size_t>(j)], x.data(), x.size(), bridge, K.col(j).data());
  return K;
}

bool use_tridiagonal(const MercerKernel& k, const Dataset1D& data, SolverPath path) {
  switch (path) {
    case SolverPath::Dense:
      return false;
    case SolverPath::Tridiagonal:
      if (!markov::applicable(k, data.x))
        throw InputError("tridiagonal path needs k1/k2 and distinct inputs inside (0,1)");
      return true;
    case SolverPath::Auto:
      break;
  }
  return data.size() > kAutoTridiagonalAbove && markov::applicable(k, data.x);
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> as_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// LDL^T solve with the condition guard shared by KRR and interpolation.
std::vector<double> guarded_solve(const Eigen::MatrixXd& A, const std::vector<double>& y,
                                  const char* what) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rcond * kConditionLimit >= 1.0))
    throw NumericalError(std::string(what) + ": system is ill-conditioned",
                         rcond > 0.0 ? 1.0 / rcond : INFINITY);
  return as_std(ldlt.solve(as_vector(y)));
}

bool has_duplicates(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  return std::adjacent_find(x.begin(), x.end()) != x.end();
}

}  // namespace

Dataset1D make_dataset(const std::function<double(double)>& f, int n, double sigma0,
                       std::uint64_t seed) {
  if (n < 1) throw InputError("make_dataset: n must be positive");
  if (!(sigma0 >= 0.0)) throw InputError("make_dataset: sigma0 must be >= 0");
  Dataset1D d;
  d.sigma0 = sigma0;
  d.x.resize(static_cast<std::size_t>(n));
  d.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = rng::uniform(seed, rng::kInputs, static_cast<std::uint64_t>(i));
    d.x[static_cast<std::size_t>(i)] = x;
    d.y[static_cast<std::size_t>(i)] =
        f(x) + sigma0 * rng::normal(seed, rng::kLabelNoise, static_cast<std::uint64_t>(i));
  }
  return d;
}

Gram gram(const MercerKernel& k, std::span<const double> x) {
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("gram: input outside [0,1]");
  Gram g{assemble(k, x), 0.0};
  if (g.matrix.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix, Eigen::EigenvaluesOnly);
    g.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  return g;
}

KernelEstimator::KernelEstimator(Kind kind, double parameter, MercerKernel kernel,
                                 std::vector<double> x, std::vector<double> weights,
                                 std::string diagnostic)
    : kind_(kind),
      parameter_(parameter),
      kernel_(kernel),
      x_(std::move(x)),
      w_(std::move(weights)),
      diagnostic_(std::move(diagnostic)) {
  for (double v : w_)
    if (!std::isfinite(v)) throw NumericalError("estimator: non-finite dual weight");
}

double KernelEstimator::predict(double x) const {
  return predict(std::span<const double>(&x, 1)).front();
}

std::vector<double> KernelEstimator::predict(std::span<const double> x) const {
  const auto& kt = simd::active();
  const bool bridge = kernel_.kind == KernelKind::BrownianBridge;
  std::vector<double> row(x_.size()), out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw InputError("predict: input outside [0,1]");
    kt.brownian_row(x[i], x_.data(), x_.size(), bridge, row.data());
    out[i] = kt.dot(row.data(), w_.data(), x_.size());
  }
  return out;
}

KernelEstimator krr_fit(const MercerKernel& k, const Dataset1D& data, double lambda,
                        SolverPath path) {
  require_closed_form(k);
  check_data(data);
  if (!(lambda > 0.0) || std::isinf(lambda)) throw InputError("krr_fit: lambda must be > 0");
  const double mu = static_cast<double>(data.size()) * lambda;
  std::vector<double> w;
  if (use_tridiagonal(k, data, path)) {
    w = markov::ridge_weights(markov::prepare(k, data.x), data.y, mu);
  } else {
    Eigen::MatrixXd A = assemble(k, data.x);
    A.diagonal().array() += mu;
    w = guarded_solve(A, data.y, "krr_fit");
  }
  return {Kind::Krr, lambda, k, data.x, std::move(w)};
}

KernelEstimator kgf_predict(const MercerKernel& k, const Dataset1D& data, double t, KgfMode mode,
                            double eta, SolverPath path) {
  require_closed_form(k);
  check_data(data);
  if (!(t >= 0.0) || std::isinf(t)) throw InputError("kgf_predict: t must be finite and >= 0");
  const std::size_t n = data.size();
  const double tau = t / static_cast<double>(n);
  if (t == 0.0) return {Kind::Kgf, t, k, data.x, std::vector<double>(n, 0.0)};

  if (mode == KgfMode::Euler) {
    if (!(eta > 0.0)) throw InputError("kgf_predict: euler mode needs eta > 0");
    const Eigen::MatrixXd K = assemble(k, data.x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    if (eta * lmax / static_cast<double>(n) > 1.0)
      throw StepSizeError("kgf_predict: eta exceeds 1/lambda_max(K/n)",
                          eta * lmax / static_cast<double>(n));
    const Eigen::VectorXd y = as_vector(data.y);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const long steps = static_cast<long>(std::ceil(t / eta - 1e-9));
    double elapsed = 0.0;
    for (long s = 0; s < steps; ++s) {
      const double h = std::min(eta, t - elapsed);
      c += (h / static_cast<double>(n)) * (y - K * c);
      elapsed += h;
    }
    return {Kind::Kgf, t, k, data.x, as_std(c)};
  }

  if (use_tridiagonal(k, data, path))
    return {Kind::Kgf, t, k, data.x, markov::flow_weights(markov::prepare(k, data.x), data.y, tau)};

  // g(mu) = (1 - exp(-mu tau)) / mu, continuous at mu = 0 with g(0) = tau.
  const Eigen::MatrixXd K = assemble(k, data.x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::VectorXd& mu = es.eigenvalues();
  const double floor = mu.cwiseAbs().maxCoeff() * 1e-14;
  Eigen::VectorXd g(mu.size());
  int singular = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) <= floor) {
      g(i) = tau;
      ++singular;
    } else {
      g(i) = -std::expm1(-mu(i) * tau) / mu(i);
    }
  }
  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::VectorXd w = V * (g.asDiagonal() * (V.transpose() * as_vector(data.y)));
  std::string diag;
  if (singular > 0)
    diag = "singular Gram: " + std::to_string(singular) +
           " null eigenvalue(s) handled by the limit g(0) = t/n";
  return {Kind::Kgf, t, k, data.x, as_std(w), diag};
}

KernelEstimator interpolate(const MercerKernel& k, const Dataset1D& data, SolverPath path) {
  require_closed_form(k);
  check_data(data);
  if (has_duplicates(data.x)) throw InputError("interpolate: inputs must be distinct");
  std::vector<double> w;
  if (use_tridiagonal(k, data, path)) {
    const auto p = markov::prepare(k, data.x);
    const double cond = markov::condition_bound(k, p);
    if (!(cond <= kConditionLimit))
      throw NumericalError("interpolate: Gram matrix is ill-conditioned", cond);
    w = markov::interpolation_weights(p, data.y);
  } else {
    w = guarded_solve(assemble(k, data.x), data.y, "interpolate");
  }
  return {Kind::Interpolation, 0.0, k, data.x, std::move(w)};
}

std::vector<double> estimator_coefficients(const KernelEstimator& est, int J) {
  const auto basis = spectral::eigensystem(est.kernel(), J);
  std::vector<double> c = spectral::eigenfunction_sums(basis, est.inputs(), est.weights(), J);
  for (int j = 0; j < J; ++j) c[static_cast<std::size_t>(j)] *= basis.eigenvalues()[static_cast<std::size_t>(j)];
  return c;
}

double estimator_norm_sq(const KernelEstimator& est) {
  // For a <= b:  int_0^1 min(x,a) min(x,b) dx = -a^3/6 + ab - ab^2/2.
  // The bridge adds -(2/3) ab + (a^3 b + a b^3)/6, which is separable.
  const auto& x = est.inputs();
  const auto& w = est.weights();
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  double diag = 0.0, cross = 0.0, p1 = 0.0, p3 = 0.0;
  for (std::size_t idx : order) {
    const double a = x[idx], wi = w[idx];
    diag += wi * wi * (a * a - 2.0 * a * a * a / 3.0);
    cross += wi * (-p3 / 6.0 + a * p1 - 0.5 * a * a * p1);
    p1 += wi * a;
    p3 += wi * a * a * a;
  }
  double total = diag + 2.0 * cross;
  if (est.kernel().kind == KernelKind::BrownianBridge) total += -2.0 / 3.0 * p1 * p1 + p1 * p3 / 3.0;
  return total;
}

RiskEstimate risk(const KernelEstimator& est, const spectral::CoefficientVector& truth,
                  const RiskMethod& method) {
  if (truth.basis.kernel().kind != est.kernel().kind)
    throw InputError("risk: truth is expressed in a different eigenbasis");

  if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
    const spectral::CoefficientVector& c = truth;
    return risk(est, [&c](double x) { return spectral::expand(c, x); }, *mc);
  }

  const int J = std::get<Basis>(method).J;
  if (J < 1) throw InputError("risk: basis truncation must be positive");
  const std::vector<double> fhat = estimator_coefficients(est, J);
  double inside = 0.0, fhat_mass = 0.0, truth_beyond = truth.tail;
  for (int j = 0; j < J; ++j) {
    const double th = j < truth.size() ? truth.theta[static_cast<std::size_t>(j)] : 0.0;
    const double d = fhat[static_cast<std::size_t>(j)] - th;
    inside += d * d;
    fhat_mass += fhat[static_cast<std::size_t>(j)] * fhat[static_cast<std::size_t>(j)];
  }
  for (int j = J; j < truth.size(); ++j)
    truth_beyond += truth.theta[static_cast<std::size_t>(j)] * truth.theta[static_cast<std::size_t>(j)];
  const double fhat_tail = std::max(0.0, estimator_norm_sq(est) - fhat_mass);
  return {inside + fhat_tail + truth_beyond, 0.0};
}

RiskEstimate risk(const KernelEstimator& est, const std::function<double(double)>& truth,
                  MonteCarlo method) {
  if (method.samples < 2) throw InputError("risk: monte-carlo needs at least 2 samples");
  const std::size_t M = static_cast<std::size_t>(method.samples);
  std::vector<double> xs(M);
  for (std::size_t m = 0; m < M; ++m) xs[m] = rng::uniform(method.seed, rng::kTestInputs, m);
  const std::vector<double> pred = est.predict(xs);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double e = pred[m] - truth(xs[m]);
    const double v = e * e;
    const double delta = v - mean;
    mean += delta / static_cast<double>(m + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(M - 1);
  return {mean, std::sqrt(var / static_cast<double>(M))};
}

NtkComplexity ntk_complexity(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y) {
  if (gram.rows() != gram.cols() || gram.rows() != y.size() || y.size() == 0)
    throw InputError("ntk_complexity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd& lam = es.eigenvalues();
  if (!(lam.minCoeff() > lam.cwiseAbs().maxCoeff() * 1e-14))
    throw NumericalError("ntk_complexity: Gram matrix is not strictly positive definite",
                         lam.minCoeff());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double quad = y.dot(ldlt.solve(y));
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * y;
  const double spectral = (proj.array().square() / lam.array()).sum();
  return {std::sqrt(quad / static_cast<double>(y.size())), quad, spectral};
}

}  // namespace lab::kreg
