#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

// Over-parameterized Gaussian sequence model: estimate theta by A D alpha with
// A orthogonal, D diagonal, trained by gradient descent on
//
//   L(A, D, alpha) = |Z - A D alpha|^2.
//
// With r = Z - A D alpha, c = A^T r and w = D alpha the Euclidean gradients are
//   grad_alpha = -2 D c,  grad_D = -2 c .* alpha,  grad_A = -2 r w^T.
// grad_A projected onto the tangent space at A is -A (c w^T - w c^T), so the
// descent step moves A along the geodesic A exp(eta (c w^T - w c^T)); the
// generator is skew of rank 2 and its exponential has a closed form.
namespace lab::opgsm {

struct OpGsmState {
  Eigen::MatrixXd A;
  Eigen::VectorXd D;
  Eigen::VectorXd alpha;
  long step = 0;

  Eigen::Index size() const { return D.size(); }
};

/// A = I, D = sqrt(lambda), alpha = 0.
OpGsmState initial_state(const Eigen::VectorXd& lambda);

double loss(const OpGsmState& s, const Eigen::VectorXd& z);

/// Squared norms of the gradient components (A part is the tangent projection).
struct GradientNorms {
  double alpha = 0.0, D = 0.0, A = 0.0;
  double total() const { return alpha + D + A; }
};
GradientNorms gradient_norms(const OpGsmState& s, const Eigen::VectorXd& z);

struct StepOptions {
  bool freeze_A = false;
  bool freeze_D = false;
  double loss_tolerance = 1e-12;  // allowed per-step increase before StepSizeError
};

/// One simultaneous (Jacobi-style) descent step.
OpGsmState constrained_step(const OpGsmState& s, const Eigen::VectorXd& z, double eta,
                            const StepOptions& opt = {});

/// |A^T A - I|_F
double orthogonality_drift(const Eigen::MatrixXd& A);

/// f_j = u_j^T theta over columns of A ordered by D descending (ties by index).
std::vector<double> sorted_projections(const OpGsmState& s, const Eigen::VectorXd& theta);

/// sum_{j<=p} f_j^2 / sum_j f_j^2 for each p.
std::vector<double> alignment_fractions(const OpGsmState& s, const Eigen::VectorXd& theta,
                                        const std::vector<int>& p_list);
double alignment(const OpGsmState& s, const Eigen::VectorXd& theta, int p);

struct OpGsmConfig {
  int N = 500;
  double n = 4000.0;
  double eta = 0.5;
  long steps = 2000;
  Eigen::VectorXd theta;   // truth
  Eigen::VectorXd lambda;  // spectrum for D0
  std::vector<int> p_list{10};
  std::uint64_t seed = 0;
  double noise_var = 1.0;
  bool freeze_A = false;
  bool freeze_D = false;
  long record_every = 1;
};

/// N = 500, n = 4000, eta = 0.5, theta_j = 1/(N-j+2), lambda_j = 1/(j+5)^2.
OpGsmConfig reference_config(int N = 500);

struct StepRecord {
  long step;
  double loss;
  std::vector<double> fractions;
  double min_diag, max_diag;
  double drift;
  int sign_flips;  // entries of D below zero
};

struct AlignmentReport {
  Eigen::VectorXd z;
  std::vector<StepRecord> records;  // step 0, every record_every steps, and the last step
  std::vector<double> final_projections;
  OpGsmState final_state;
};

/// Samples Z from the Gaussian sequence model and runs `steps` descent steps.
/// `on_record` (optional) sees each record as it is produced.
AlignmentReport simulate(const OpGsmConfig& cfg,
                         const std::function<void(const StepRecord&)>& on_record = {});

struct DiagTrajectory {
  std::vector<std::vector<double>> theta;      // a_j beta_j, one row per step (T+1 rows)
  std::vector<std::vector<double>> conserved;  // a_j^2 - beta_j^2
};

/// Gradient descent on (1/2) sum_j (z_j - a_j beta_j)^2 from (a0, 0):
///   a' = a + eta r beta,  beta' = beta + eta r a,  r = z - a beta.
DiagTrajectory diag_only_flow(const std::vector<double>& z, const std::vector<double>& a0,
                              double eta, long T);

}  // namespace lab::opgsm
