#include <doctest.h>

#include <cmath>

#include "lab/error.hpp"
#include "lab/feature_net.hpp"
#include "lab/random.hpp"

using namespace lab;
using namespace lab::fnet;

TEST_SUITE("feature_net") {

TEST_CASE("forward is linear in the readout") {
  auto net = init_net(5, 8, Init::Standard, 1);
  Eigen::VectorXd x(5);
  x << 0.3, -1.0, 0.2, 0.9, -0.4;
  const double f = forward(net, x);
  net.a *= 2.0;
  CHECK(forward(net, x) == doctest::Approx(2.0 * f));
  net.a.setZero();
  CHECK(forward(net, x) == 0.0);
  CHECK_THROWS_AS(forward(net, Eigen::VectorXd(Eigen::VectorXd::Zero(3))), InputError);
}

TEST_CASE("analytic gradient matches central differences") {
  const auto task = make_task(6, 0.1, 2);
  const auto data = generate(task, 40, 3);
  const auto net = init_net(6, 10, Init::Standard, 4);
  const Gradient g = loss_gradient(net, data.X, data.y);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    for (int i = 0; i < 6; ++i) {
      auto p = net, m = net;
      p.W(i, k) += h;
      m.W(i, k) -= h;
      // Skip coordinates whose perturbation crosses a ReLU kink.
      const Eigen::VectorXd hp = data.X * p.W.col(k), hm = data.X * m.W.col(k);
      if (((hp.array() > 0) != (hm.array() > 0)).any()) continue;
      const double fd = (train_loss(p, data.X, data.y) - train_loss(m, data.X, data.y)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.W(i, k)) / std::max(1e-8, std::abs(fd)));
    }
    auto p = net, m = net;
    p.a(k) += h;
    m.a(k) -= h;
    const double fd = (train_loss(p, data.X, data.y) - train_loss(m, data.X, data.y)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g.a(k)) / std::max(1e-8, std::abs(fd)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("symmetric initialization starts at zero output") {
  const auto task = make_task(20, 0.0, 5);
  const auto data = generate(task, 1000, 6);
  const auto net = init_net(20, 200, Init::Symmetric, 7);
  CHECK(forward(net, data.X).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(init_net(20, 201, Init::Symmetric, 7), InputError);
}

TEST_CASE("training loss strictly decreases at small eta") {
  const auto task = make_task(20, 0.0, 8);
  const auto data = generate(task, 1000, 9);
  const auto tr = train_gd(init_net(20, 200, Init::Symmetric, 10), data, 0.05, 100);
  for (std::size_t k = 1; k < tr.loss.size(); ++k) CHECK(tr.loss[k] < tr.loss[k - 1]);
}

TEST_CASE("eta = 0 leaves the network unchanged") {
  const auto task = make_task(8, 0.0, 11);
  const auto data = generate(task, 50, 12);
  const auto net = init_net(8, 16, Init::Standard, 13);
  const auto tr = train_gd(net, data, 0.0, 10);
  CHECK((tr.net.W - net.W).norm() == 0.0);
  CHECK((tr.net.a - net.a).norm() == 0.0);
  for (double l : tr.loss) CHECK(l == tr.loss.front());
}

TEST_CASE("top_singular agrees with a full SVD") {
  Eigen::MatrixXd F(60, 25);
  for (int j = 0; j < 25; ++j)
    for (int i = 0; i < 60; ++i) F(i, j) = rng::normal(14, 1, j * 60 + i) / (1.0 + j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (const Eigen::MatrixXd& M : {F, Eigen::MatrixXd(F.transpose())}) {
    const auto ts = top_singular(M, 5);
    Eigen::JacobiSVD<Eigen::MatrixXd> s(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (int j = 0; j < 5; ++j) {
      CHECK(ts.values(j) == doctest::Approx(s.singularValues()(j)).epsilon(1e-8));
      CHECK(std::abs(ts.left.col(j).dot(s.matrixU().col(j))) == doctest::Approx(1.0).epsilon(1e-7));
      CHECK(std::abs(ts.right.col(j).dot(s.matrixV().col(j))) == doctest::Approx(1.0).epsilon(1e-7));
    }
  }
}

TEST_CASE("feature alignment edge cases") {
  const auto task = make_task(10, 0.0, 15);
  const auto data = generate(task, 200, 16);
  const auto net = init_net(10, 40, Init::Standard, 17);
  const auto fr = feature_alignment(net, data.X, data.y, {1, 5, 10, 40});
  CHECK(fr.back() == 1.0);
  for (std::size_t i = 1; i < fr.size(); ++i) CHECK(fr[i] >= fr[i - 1]);
  for (double f : fr) CHECK((f >= 0.0 && f <= 1.0));
  CHECK_THROWS_AS(feature_alignment(net, data.X, data.y, {0}), InputError);

  // Rank-1 features with y equal to the feature profile.
  TwoLayerNet r1{Eigen::MatrixXd(10, 6), Eigen::VectorXd::Ones(6)};
  for (int k = 0; k < 6; ++k) r1.W.col(k) = task.beta;
  const Eigen::VectorXd y = data.X * task.beta;
  const Eigen::VectorXd prof = y.cwiseMax(0.0);
  CHECK(feature_alignment(r1, data.X, prof, {1})[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("one-step analysis") {
  const auto task = make_task(16, 0.0, 18);
  const auto data = generate(task, 128, 19);
  const auto net = init_net(16, 64, Init::Symmetric, 20, 1.0 / 8.0);
  const auto zero = one_step_analysis(net, data, task.beta, 0.0);
  CHECK((zero.updated.W - net.W).norm() == 0.0);
  CHECK((zero.rank1_residual >= 0.0 && zero.rank1_residual < 1.0));
  CHECK((zero.leading_alignment >= 0.0 && zero.leading_alignment <= 1.0));
  CHECK_THROWS_AS(one_step_analysis(net, data, Eigen::VectorXd::Ones(3), 1.0), InputError);
}

}  // TEST_SUITE
