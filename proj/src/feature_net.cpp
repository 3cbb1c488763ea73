#include "lab/feature_net.hpp"

#include <algorithm>
#include <cmath>

#include "lab/error.hpp"
#include "lab/linalg.hpp"
#include "lab/random.hpp"
#include "lab/simd/kernels.hpp"

namespace lab::fnet {

namespace {

constexpr int kOversample = 8;
constexpr int kMaxIterations = 20000;
constexpr std::uint64_t kStartSeed = 0x5eed5eed5eedULL;

void check_data(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() != net.dim()) throw InputError("feature net: input dimension mismatch");
  if (X.rows() != y.size()) throw InputError("feature net: |X| != |y|");
  if (net.W.cols() != net.width()) throw InputError("feature net: W and a disagree on width");
}

// Pre-activations H = X W.
Eigen::MatrixXd preactivations(const TwoLayerNet& net, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd H(X.rows(), net.width());
  H.noalias() = X * net.W;
  return H;
}

Eigen::MatrixXd relu_scaled(const Eigen::MatrixXd& H, double scale) {
  Eigen::MatrixXd S(H.rows(), H.cols());
  simd::active().relu_scaled(H.data(), static_cast<std::size_t>(H.size()), scale, S.data());
  return S;
}

}  // namespace

TwoLayerNet init_net(int d, int m, Init init, std::uint64_t seed, double readout_sd) {
  if (d < 1 || m < 1) throw InputError("init_net: d and m must be positive");
  if (!(readout_sd >= 0.0)) throw InputError("init_net: readout_sd must be >= 0");
  if (init == Init::Symmetric && (m < 2 || m % 2 != 0))
    throw InputError("init_net: symmetric initialization needs an even width m >= 2");
  TwoLayerNet net{Eigen::MatrixXd(d, m), Eigen::VectorXd(m)};
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  const int stride = init == Init::Symmetric ? 2 : 1;
  for (int k = 0; k < m; k += stride) {
    const std::uint64_t unit = static_cast<std::uint64_t>(k / stride);
    for (int i = 0; i < d; ++i)
      net.W(i, k) = sd * rng::normal(seed, rng::kWeights, unit * static_cast<std::uint64_t>(d) + i);
    net.a(k) = readout_sd * rng::normal(seed, rng::kReadout, unit);
    if (stride == 2) {
      net.W.col(k + 1) = net.W.col(k);
      net.a(k + 1) = -net.a(k);
    }
  }
  return net;
}

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.dim()) throw InputError("forward: dimension mismatch");
  return forward(net, Eigen::MatrixXd(x.transpose()))(0);
}

Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& X) {
  if (X.cols() != net.dim()) throw InputError("forward: dimension mismatch");
  const Eigen::MatrixXd S = relu_scaled(preactivations(net, X), 1.0 / std::sqrt(double(net.width())));
  return S * net.a;
}

double train_loss(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_data(net, X, y);
  return 0.5 * (forward(net, X) - y).squaredNorm() / static_cast<double>(y.size());
}

Gradient loss_gradient(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_data(net, X, y);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.width()));
  const Eigen::MatrixXd H = preactivations(net, X);
  const Eigen::MatrixXd S = relu_scaled(H, inv_sqrt_m);
  const Eigen::VectorXd e = (S * net.a - y) / static_cast<double>(y.size());
  Gradient g;
  g.a = S.transpose() * e;
  // dL/dH_ik = e_i a_k / sqrt(m) [H_ik > 0]
  Eigen::MatrixXd M = e * (inv_sqrt_m * net.a).transpose();
  M = (H.array() > 0.0).select(M, 0.0);
  g.W.noalias() = X.transpose() * M;
  return g;
}

SingleIndexTask make_task(int d, double sigma0, std::uint64_t seed) {
  if (d < 1) throw InputError("make_task: d must be positive");
  SingleIndexTask t;
  t.d = d;
  t.sigma0 = sigma0;
  t.beta.resize(d);
  for (int i = 0; i < d; ++i) t.beta(i) = rng::normal(seed, rng::kDirection, static_cast<std::uint64_t>(i));
  t.beta.normalize();
  return t;
}

TaskData generate(const SingleIndexTask& task, int n, std::uint64_t seed) {
  if (n < 1) throw InputError("generate: n must be positive");
  if (task.beta.size() != task.d || std::abs(task.beta.norm() - 1.0) > 1e-12)
    throw InputError("generate: beta must be a unit vector of length d");
  TaskData data{Eigen::MatrixXd(n, task.d), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < task.d; ++k)
      data.X(i, k) = rng::normal(seed, rng::kDesign, static_cast<std::uint64_t>(i) * task.d + k);
    data.y(i) = task.link(data.X.row(i).dot(task.beta)) +
                task.sigma0 * rng::normal(seed, rng::kLabelNoise, static_cast<std::uint64_t>(i));
  }
  return data;
}

TrainTrace train_gd(TwoLayerNet net, const TaskData& data, double eta, int steps,
                    const std::function<void(int, const TwoLayerNet&, double)>& on_step) {
  if (!(eta >= 0.0) || steps < 0) throw InputError("train_gd: bad eta or step count");
  TrainTrace tr;
  const double initial = train_loss(net, data.X, data.y);
  for (int k = 0;; ++k) {
    const double l = k == 0 ? initial : train_loss(net, data.X, data.y);
    if (!std::isfinite(l) || l > 1e6 * std::max(initial, 1e-300))
      throw InstabilityError("train_gd: loss diverged", l);
    tr.loss.push_back(l);
    if (on_step) on_step(k, net, l);
    if (k == steps) break;
    const Gradient g = loss_gradient(net, data.X, data.y);
    net.W -= eta * g.W;
    net.a -= eta * g.a;
  }
  tr.net = std::move(net);
  return tr;
}

Eigen::MatrixXd features(const TwoLayerNet& net, const Eigen::MatrixXd& X) {
  if (X.cols() != net.dim()) throw InputError("features: dimension mismatch");
  return relu_scaled(preactivations(net, X), 1.0 / std::sqrt(static_cast<double>(net.width())));
}

TopSingular top_singular(const Eigen::MatrixXd& F, int k, double tol) {
  const Eigen::Index rows = F.rows(), cols = F.cols();
  const Eigen::Index dim = std::min(rows, cols);
  if (k < 1 || dim < 1) throw InputError("top_singular: empty request");
  k = static_cast<int>(std::min<Eigen::Index>(k, dim));
  const bool right_side = cols <= rows;  // eigenvectors of F^T F are right vectors
  const Eigen::MatrixXd G = right_side ? Eigen::MatrixXd(F.transpose() * F)
                                       : Eigen::MatrixXd(F * F.transpose());
  const Eigen::Index b = std::min<Eigen::Index>(dim, k + kOversample);

  Eigen::MatrixXd Q(G.rows(), b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      Q(i, j) = rng::normal(kStartSeed, rng::kDesign, static_cast<std::uint64_t>(j * G.rows() + i));
  linalg::orthonormalize_columns(Q);

  const double scale = std::max(G.diagonal().sum(), 1e-300);
  Eigen::VectorXd mu;
  Eigen::MatrixXd GQ;
  bool converged = false;
  for (int it = 0; it < kMaxIterations && !converged; ++it) {
    GQ.noalias() = G * Q;
    Q = GQ;
    linalg::orthonormalize_columns(Q);
    GQ.noalias() = G * Q;
    const Eigen::MatrixXd B = Q.transpose() * GQ;
    const linalg::SymmetricEigen rr = linalg::jacobi_eigen(B);
    Q = Q * rr.vectors;
    GQ = GQ * rr.vectors;
    mu = rr.values;
    converged = true;
    for (int j = 0; j < k && converged; ++j)
      converged = (GQ.col(j) - mu(j) * Q.col(j)).norm() <= tol * scale;
  }
  if (!converged) throw NumericalError("top_singular: orthogonal iteration did not converge");

  TopSingular out;
  out.values = mu.head(k).cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd vecs = Q.leftCols(k);
  Eigen::MatrixXd other = right_side ? Eigen::MatrixXd(F * vecs) : Eigen::MatrixXd(F.transpose() * vecs);
  for (int j = 0; j < k; ++j) {
    if (out.values(j) > 0.0) other.col(j) /= out.values(j);
    else other.col(j).setZero();
  }
  out.right = right_side ? vecs : other;
  out.left = right_side ? other : vecs;
  return out;
}

std::vector<double> feature_alignment(const TwoLayerNet& net, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y, const std::vector<int>& p_list) {
  check_data(net, X, y);
  const Eigen::Index m = net.width();
  const Eigen::Index full = std::min<Eigen::Index>(m, X.rows());
  int need = 0;
  for (int p : p_list) {
    if (p < 1 || p > m) throw InputError("feature_alignment: p must lie in [1, m]");
    if (p < full) {
      if (p > kMaxAlignmentRank)
        throw InputError("feature_alignment: partial fractions limited to p <= 64");
      need = std::max(need, p);
    }
  }
  const Eigen::MatrixXd F = features(net, X);  // n x m

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
  const Eigen::Index rank = qr.rank();
  const Eigen::VectorXd qty = qr.householderQ().transpose() * y;
  const double total = qty.head(rank).squaredNorm();

  std::vector<double> cum;
  if (need > 0) {
    const TopSingular ts = top_singular(F, need);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ts.left.cols(); ++j) {
      const double f = ts.left.col(j).dot(y);
      cum.push_back(acc += f * f);
    }
  }
  std::vector<double> out;
  for (int p : p_list) {
    if (p >= full || !(total > 0.0)) {
      out.push_back(p >= full ? 1.0 : 0.0);
    } else {
      out.push_back(std::min(1.0, cum[static_cast<std::size_t>(p - 1)] / total));
    }
  }
  return out;
}

OneStep one_step_analysis(const TwoLayerNet& net0, const TaskData& data,
                          const Eigen::VectorXd& beta, double eta) {
  if (beta.size() != net0.dim()) throw InputError("one_step_analysis: beta has wrong length");
  const Gradient g = loss_gradient(net0, data.X, data.y);
  const Eigen::MatrixXd G0 = -g.W;
  const double fro2 = G0.squaredNorm();
  if (!(fro2 > 0.0)) throw InputError("one_step_analysis: gradient is zero (degenerate input)");
  const double s1 = top_singular(G0, 1).values(0);

  OneStep out;
  out.rank1_residual = std::sqrt(std::max(0.0, 1.0 - s1 * s1 / fro2));
  out.updated = net0;
  out.updated.W += eta * std::sqrt(static_cast<double>(net0.width())) * G0;
  const double c = top_singular(out.updated.W, 1).left.col(0).dot(beta);
  out.leading_alignment = c * c;
  return out;
}

}  // namespace lab::fnet
