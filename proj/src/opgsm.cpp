#include "lab/opgsm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lab/error.hpp"
#include "lab/gsm.hpp"

namespace lab::opgsm {

namespace {

void check_dims(const OpGsmState& s, const Eigen::VectorXd& z) {
  const Eigen::Index N = s.D.size();
  if (s.A.rows() != N || s.A.cols() != N || s.alpha.size() != N || z.size() != N)
    throw InputError("opgsm: dimension mismatch");
}

}  // namespace

OpGsmState initial_state(const Eigen::VectorXd& lambda) {
  const Eigen::Index N = lambda.size();
  if (N < 1) throw InputError("opgsm: N must be >= 1");
  if ((lambda.array() < 0.0).any()) throw InputError("opgsm: lambda must be non-negative");
  return {Eigen::MatrixXd::Identity(N, N), lambda.cwiseSqrt(), Eigen::VectorXd::Zero(N), 0};
}

double loss(const OpGsmState& s, const Eigen::VectorXd& z) {
  check_dims(s, z);
  return (z - s.A * s.D.cwiseProduct(s.alpha)).squaredNorm();
}

GradientNorms gradient_norms(const OpGsmState& s, const Eigen::VectorXd& z) {
  check_dims(s, z);
  const Eigen::VectorXd w = s.D.cwiseProduct(s.alpha);
  const Eigen::VectorXd c = s.A.transpose() * (z - s.A * w);
  GradientNorms g;
  g.alpha = 4.0 * s.D.cwiseProduct(c).squaredNorm();
  g.D = 4.0 * c.cwiseProduct(s.alpha).squaredNorm();
  // |c w^T - w c^T|_F^2
  const double cw = c.dot(w);
  g.A = 2.0 * (c.squaredNorm() * w.squaredNorm() - cw * cw);
  return g;
}

OpGsmState constrained_step(const OpGsmState& s, const Eigen::VectorXd& z, double eta,
                            const StepOptions& opt) {
  check_dims(s, z);
  if (!(eta >= 0.0) || std::isinf(eta)) throw InputError("constrained_step: eta must be >= 0");
  const Eigen::VectorXd w = s.D.cwiseProduct(s.alpha);
  const Eigen::VectorXd aw = s.A * w;
  const Eigen::VectorXd r = z - aw;
  const double before = r.squaredNorm();
  const Eigen::VectorXd c = s.A.transpose() * r;

  OpGsmState next = s;
  next.step = s.step + 1;
  next.alpha += 2.0 * eta * s.D.cwiseProduct(c);
  if (!opt.freeze_D) next.D += 2.0 * eta * c.cwiseProduct(s.alpha);

  if (!opt.freeze_A) {
    // A <- A exp(Omega), Omega = u v^T - v u^T with u = eta c, v = w.
    // exp(Omega) = I + (sin th / th) Omega + ((1 - cos th) / th^2) Omega^2,
    // th^2 = |u|^2 |v|^2 - (u.v)^2.
    const double uu = eta * eta * c.squaredNorm();
    const double vv = w.squaredNorm();
    const double uv = eta * c.dot(w);
    const double th2 = std::max(0.0, uu * vv - uv * uv);
    if (th2 > 0.0) {
      const double th = std::sqrt(th2);
      double s1, s2;
      if (th < 1e-4) {
        s1 = 1.0 - th2 / 6.0;
        s2 = 0.5 - th2 / 24.0;
      } else {
        s1 = std::sin(th) / th;
        s2 = (1.0 - std::cos(th)) / th2;
      }
      const Eigen::VectorXd au = eta * (s.A * c);
      const Eigen::VectorXd& av = aw;
      // A Omega = (Au) v^T - (Av) u^T
      // A Omega^2 = (Au (u.v) - Av |u|^2) v^T + (Av (u.v) - Au |v|^2) u^T
      const Eigen::VectorXd p = s1 * au + s2 * (uv * au - uu * av);
      const Eigen::VectorXd q = -s1 * av + s2 * (uv * av - vv * au);
      next.A.noalias() += p * w.transpose();
      next.A.noalias() += (eta * q) * c.transpose();
    }
  }

  const double after = loss(next, z);
  if (!std::isfinite(after)) throw InstabilityError("constrained_step: loss is not finite");
  if (after > before + opt.loss_tolerance)
    throw StepSizeError("constrained_step: loss increased; reduce eta", after - before);
  return next;
}

double orthogonality_drift(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(A.cols(), A.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
  g.diagonal().array() -= 1.0;
  // Frobenius norm from the lower triangle.
  double s = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    s += g(j, j) * g(j, j);
    for (Eigen::Index i = j + 1; i < g.rows(); ++i) s += 2.0 * g(i, j) * g(i, j);
  }
  return std::sqrt(s);
}

std::vector<double> sorted_projections(const OpGsmState& s, const Eigen::VectorXd& theta) {
  if (theta.size() != s.D.size() || s.A.rows() != theta.size())
    throw InputError("alignment: dimension mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s.D.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return s.D(a) > s.D(b); });
  std::vector<double> f(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) f[j] = s.A.col(order[j]).dot(theta);
  return f;
}

std::vector<double> alignment_fractions(const OpGsmState& s, const Eigen::VectorXd& theta,
                                        const std::vector<int>& p_list) {
  const std::vector<double> f = sorted_projections(s, theta);
  const int N = static_cast<int>(f.size());
  for (int p : p_list)
    if (p < 1 || p > N) throw InputError("alignment: p must lie in [1, N]");
  std::vector<double> cum(f.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) cum[j] = acc += f[j] * f[j];
  if (!(acc > 0.0)) throw InputError("alignment: fraction undefined for theta = 0");
  std::vector<double> out;
  for (int p : p_list) out.push_back(cum[static_cast<std::size_t>(p - 1)] / acc);
  return out;
}

double alignment(const OpGsmState& s, const Eigen::VectorXd& theta, int p) {
  return alignment_fractions(s, theta, {p}).front();
}

OpGsmConfig reference_config(int N) {
  OpGsmConfig cfg;
  cfg.N = N;
  cfg.theta.resize(N);
  cfg.lambda.resize(N);
  for (int j = 1; j <= N; ++j) {
    cfg.theta(j - 1) = 1.0 / (N - j + 2.0);
    cfg.lambda(j - 1) = 1.0 / ((j + 5.0) * (j + 5.0));
  }
  return cfg;
}

AlignmentReport simulate(const OpGsmConfig& cfg,
                         const std::function<void(const StepRecord&)>& on_record) {
  if (cfg.N < 1 || cfg.theta.size() != cfg.N || cfg.lambda.size() != cfg.N)
    throw InputError("simulate: theta and lambda must have length N");
  if (!(cfg.eta > 0.0)) throw InputError("simulate: eta must be > 0");
  if (cfg.steps < 0 || cfg.record_every < 1) throw InputError("simulate: bad step counts");

  gsm::GsmInstance inst;
  inst.theta.assign(cfg.theta.data(), cfg.theta.data() + cfg.N);
  inst.lambda.assign(cfg.lambda.data(), cfg.lambda.data() + cfg.N);
  inst.n = cfg.n;
  inst.seed = cfg.seed;
  inst.noise_var = cfg.noise_var;
  const std::vector<double> zs = gsm::sample(inst);

  AlignmentReport rep;
  rep.z = Eigen::Map<const Eigen::VectorXd>(zs.data(), cfg.N);
  OpGsmState state = initial_state(cfg.lambda);
  const StepOptions opt{cfg.freeze_A, cfg.freeze_D};

  double last_drift = 0.0;
  auto record = [&](const OpGsmState& s) {
    StepRecord r;
    r.step = s.step;
    r.loss = loss(s, rep.z);
    r.fractions = alignment_fractions(s, cfg.theta, cfg.p_list);
    r.min_diag = s.D.minCoeff();
    r.max_diag = s.D.maxCoeff();
    r.drift = cfg.freeze_A ? 0.0 : orthogonality_drift(s.A);
    r.sign_flips = static_cast<int>((s.D.array() < 0.0).count());
    const long since = rep.records.empty() ? 1 : std::max<long>(1, s.step - rep.records.back().step);
    if (r.drift > last_drift + 1e-10 * static_cast<double>(since))
      throw NumericalError("simulate: orthogonality drift jumped", r.drift);
    last_drift = r.drift;
    rep.records.push_back(r);
    if (on_record) on_record(rep.records.back());
  };

  record(state);
  for (long k = 1; k <= cfg.steps; ++k) {
    state = constrained_step(state, rep.z, cfg.eta, opt);
    if (k % cfg.record_every == 0 || k == cfg.steps) record(state);
  }
  rep.final_projections = sorted_projections(state, cfg.theta);
  rep.final_state = std::move(state);
  return rep;
}

DiagTrajectory diag_only_flow(const std::vector<double>& z, const std::vector<double>& a0,
                              double eta, long T) {
  if (z.size() != a0.size()) throw InputError("diag_only_flow: length mismatch");
  if (!(eta >= 0.0) || T < 0) throw InputError("diag_only_flow: bad eta or T");
  for (double v : a0)
    if (!(v > 0.0)) throw InputError("diag_only_flow: a0 must be positive");
  const std::size_t N = z.size();
  std::vector<double> a = a0, b(N, 0.0);
  DiagTrajectory tr;
  tr.theta.reserve(static_cast<std::size_t>(T) + 1);
  tr.conserved.reserve(static_cast<std::size_t>(T) + 1);
  auto push = [&] {
    std::vector<double> th(N), q(N);
    for (std::size_t j = 0; j < N; ++j) {
      th[j] = a[j] * b[j];
      q[j] = a[j] * a[j] - b[j] * b[j];
    }
    tr.theta.push_back(std::move(th));
    tr.conserved.push_back(std::move(q));
  };
  push();
  for (long k = 0; k < T; ++k) {
    for (std::size_t j = 0; j < N; ++j) {
      const double r = z[j] - a[j] * b[j];
      const double an = a[j] + eta * r * b[j];
      const double bn = b[j] + eta * r * a[j];
      if (!(std::abs(an) <= 1e12) || !(std::abs(bn) <= 1e12))
        throw InstabilityError("diag_only_flow: iterates diverged", std::max(std::abs(an), std::abs(bn)));
      a[j] = an;
      b[j] = bn;
    }
    push();
  }
  return tr;
}

}  // namespace lab::opgsm
