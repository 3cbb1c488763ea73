#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

// Width-m two-layer ReLU network f(x) = a^T relu(W^T x) / sqrt(m) trained by
// full-batch gradient descent on L = (1/2n) sum_i (f(x_i) - y_i)^2.
// Data matrices hold one sample per row (n x d).
namespace lab::fnet {

struct TwoLayerNet {
  Eigen::MatrixXd W;  // d x m
  Eigen::VectorXd a;  // m

  Eigen::Index width() const { return a.size(); }
  Eigen::Index dim() const { return W.rows(); }
};

enum class Init { Standard, Symmetric };

/// W ~ N(0, I/d), a ~ N(0, readout_sd^2). Symmetric initialization pairs
/// adjacent units (same w, opposite a), so the initial output is zero.
TwoLayerNet init_net(int d, int m, Init init, std::uint64_t seed, double readout_sd = 1.0);

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x);
Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& X);

double train_loss(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct Gradient {
  Eigen::MatrixXd W;
  Eigen::VectorXd a;
};
/// Gradient of train_loss; the ReLU derivative at 0 is taken as 0.
Gradient loss_gradient(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct SingleIndexTask {
  int d = 20;
  Eigen::VectorXd beta;  // unit vector
  double sigma0 = 0.0;
  std::function<double(double)> link = [](double z) { return z + 0.5 * z * z; };
};

/// beta drawn uniformly on the sphere from `seed`.
SingleIndexTask make_task(int d, double sigma0, std::uint64_t seed);

struct TaskData {
  Eigen::MatrixXd X;  // n x d, standard normal
  Eigen::VectorXd y;
};
TaskData generate(const SingleIndexTask& task, int n, std::uint64_t seed);

struct TrainTrace {
  std::vector<double> loss;  // loss[k] before step k; loss.back() after the last step
  TwoLayerNet net;
};

/// Full-batch GD. `on_step(k, net, loss)` runs before each step and after the
/// last one. Throws InstabilityError if the loss becomes non-finite or grows
/// by more than 1e6 over its initial value.
TrainTrace train_gd(TwoLayerNet net, const TaskData& data, double eta, int steps,
                    const std::function<void(int, const TwoLayerNet&, double)>& on_step = {});

/// Feature matrix relu(X W) / sqrt(m), n x m (the transpose of Phi(X)).
Eigen::MatrixXd features(const TwoLayerNet& net, const Eigen::MatrixXd& X);

struct TopSingular {
  Eigen::VectorXd values;  // descending
  Eigen::MatrixXd left;    // columns span the row space of the input matrix's columns
  Eigen::MatrixXd right;
};

/// Leading k singular triplets of F by orthogonal iteration with
/// Rayleigh-Ritz on the smaller Gram matrix (F^T F or F F^T).
TopSingular top_singular(const Eigen::MatrixXd& F, int k, double tol = 1e-10);

inline constexpr int kMaxAlignmentRank = 64;

/// Fractions sum_{j<=p} f_j^2 / sum_j f_j^2 with f_j = v_j^T y / sqrt(n) and
/// v_j the sample-space singular vectors of the feature matrix. The
/// denominator is |P y|^2 / n, P the projector onto the feature column space.
std::vector<double> feature_alignment(const TwoLayerNet& net, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y, const std::vector<int>& p_list);

struct OneStep {
  double rank1_residual;     // |G - s1 u1 v1^T|_F / |G|_F
  double leading_alignment;  // <u1(W1), beta>^2
  TwoLayerNet updated;
};

/// G0 = -grad_W L at net0, W1 = W0 + eta sqrt(m) G0.
OneStep one_step_analysis(const TwoLayerNet& net0, const TaskData& data,
                          const Eigen::VectorXd& beta, double eta);

}  // namespace lab::fnet
