#include "lab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "lab/error.hpp"
#include "lab/feature_net.hpp"
#include "lab/gsm.hpp"
#include "lab/kernel_regression.hpp"
#include "lab/opgsm.hpp"
#include "lab/random.hpp"
#include "lab/rates.hpp"
#include "lab/spectral.hpp"

namespace lab::cli {

namespace {

struct Task {
  std::string label;  // grid point, used in error messages
  std::function<std::vector<Row>()> work;
};

struct Plan {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<Task> tasks;
  Meta header;
  std::function<Meta(const ResultTable&)> summarize;
};

std::string num(double v) { return format_cell(Cell{v}); }

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Seeds span the full uint64 range, so they are written as text.
Cell seed_cell(std::uint64_t seed) { return Cell{std::to_string(seed)}; }

Cell flag_cell(bool b) { return Cell{std::int64_t{b ? 1 : 0}}; }

std::vector<double> require_grid(const ExperimentConfig& cfg, const std::string& key) {
  if (!cfg.has(key)) throw InputError(cfg.kind() + ": missing required key '" + key + "'");
  auto v = cfg.numbers(key);
  if (v.empty()) throw InputError(cfg.kind() + ": grid '" + key + "' is empty");
  return v;
}

std::vector<int> int_list(const ExperimentConfig& cfg, const std::string& key,
                          std::vector<double> fallback) {
  std::vector<int> out;
  for (double v : cfg.numbers(key, std::move(fallback))) {
    if (v != std::floor(v) || v < 1 || v > 1e9)
      throw InputError(cfg.kind() + ": '" + key + "' entries must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw InputError(cfg.kind() + ": grid '" + key + "' is empty");
  return out;
}

long positive(const ExperimentConfig& cfg, const std::string& key, long fallback) {
  const long v = cfg.integer(key, fallback);
  if (v < 1) throw InputError(cfg.kind() + ": '" + key + "' must be >= 1");
  return v;
}

double truth_sin(double x) { return std::sin(2.0 * M_PI * x); }

std::string describe(const rates::RateResult& r) { return r.label.empty() ? "-" : r.label; }

// ---------------------------------------------------------------- rates

Plan plan_rates(const ExperimentConfig& cfg) {
  Plan plan;
  const std::string mode = cfg.text("mode", "highdim");
  if (mode == "highdim") {
    plan.schema = "rates-highdim/1";
    plan.columns = {"s", "gamma", "krr_d_exponent", "krr_n_exponent", "krr_period", "krr_branch",
                    "krr_label", "interp_d_exponent", "interp_n_exponent", "interp_period",
                    "interp_inconsistent"};
    const auto ss = require_grid(cfg, "s");
    const auto gs = require_grid(cfg, "gamma");
    for (double s : ss)
      for (double g : gs) {
        if (!(s > 0.0) || !(g > 0.0) || std::isinf(s) || std::isinf(g))
          throw InputError("rates: s and gamma must be positive and finite");
        plan.tasks.push_back({"s=" + num(s) + " gamma=" + num(g), [s, g] {
                                const auto k = rates::highdim_krr_exponents(s, g);
                                const auto i = rates::interpolation_exponent(s, g);
                                return std::vector<Row>{{s, g, *k.d_exponent, k.n_exponent,
                                                         std::int64_t{k.period}, std::int64_t{k.branch},
                                                         describe(k), *i.d_exponent, i.n_exponent,
                                                         std::int64_t{i.period},
                                                         flag_cell(i.inconsistent)}};
                              }});
      }
  } else if (mode == "fixed") {
    plan.schema = "rates-fixed/1";
    plan.columns = {"s", "beta", "theta", "n_exponent", "saturated", "minimax_exponent",
                    "theta_star"};
    const std::string e = cfg.text("estimator", "kgf");
    if (e != "kgf" && e != "krr") throw InputError("rates: estimator must be kgf or krr");
    const auto est = e == "kgf" ? rates::Estimator::Kgf : rates::Estimator::Krr;
    const auto ss = require_grid(cfg, "s");
    const auto bs = require_grid(cfg, "beta");
    const auto ts = require_grid(cfg, "theta");
    for (double s : ss)
      for (double b : bs)
        for (double t : ts) {
          if (!(s > 0.0) || !(b > 0.0) || std::isinf(b) || !(t > 0.0) || std::isinf(t))
            throw InputError("rates: s, beta and theta must be positive");
          plan.tasks.push_back({"s=" + num(s) + " beta=" + num(b) + " theta=" + num(t), [=] {
                                  const auto r = rates::kgf_curve_exponent(s, b, t, est);
                                  const auto m = rates::minimax_exponent(s, b, est);
                                  return std::vector<Row>{{s, b, t, r.n_exponent,
                                                           flag_cell(r.saturated), m.exponent,
                                                           m.theta_star}};
                                }});
        }
  } else {
    throw InputError("rates: mode must be highdim or fixed");
  }
  plan.summarize = [](const ResultTable&) { return Meta{}; };
  return plan;
}

// ------------------------------------------------------------ gsm-curve

Plan plan_gsm_curve(const ExperimentConfig& cfg) {
  Plan plan;
  plan.schema = "gsm-curve/1";
  plan.columns = {"theta_exponent", "n", "t", "bias", "variance", "tail_bias", "risk"};
  gsm::PowerFamily fam;
  fam.beta = cfg.number("beta", 2.0);
  fam.s = cfg.number("s", 1.5);
  fam.N = static_cast<std::size_t>(positive(cfg, "N", 65536));
  if (!(fam.beta > 0.0) || !(fam.s > 0.0) || std::isinf(fam.s) || std::isinf(fam.beta))
    throw InputError("gsm-curve: beta and s must be positive and finite");
  const auto thetas = require_grid(cfg, "theta");
  const auto ns = require_grid(cfg, "n");
  if (ns.size() < 4) throw InputError("gsm-curve: the n grid needs at least 4 points");
  for (double n : ns)
    if (!(n >= 1.0)) throw InputError("gsm-curve: n must be >= 1");
  const long drop = cfg.integer("drop_smallest", 0);
  if (drop < 0 || static_cast<std::size_t>(drop) + 4 > ns.size())
    throw InputError("gsm-curve: drop_smallest leaves fewer than 4 points");
  for (double th : thetas) {
    if (!(th > 0.0) || std::isinf(th)) throw InputError("gsm-curve: theta must be positive");
    plan.tasks.push_back({"theta=" + num(th), [fam, ns, th] {
                            const auto lc = gsm::learning_curve(fam, ns, th);
                            std::vector<Row> rows;
                            for (const auto& p : lc.points)
                              rows.push_back({th, p.n, p.t, p.risk.bias, p.risk.variance,
                                              p.risk.tail_bias, p.risk.total()});
                            return rows;
                          }});
  }
  plan.header = {{"family", "lambda_j = j^-" + num(fam.beta) + ", theta_j = j^-(s beta + 1)/2, s = " +
                                num(fam.s) + ", N = " + std::to_string(fam.N)}};
  plan.summarize = [fam, thetas, drop](const ResultTable& t) {
    Meta m;
    const auto th = t.column("theta_exponent");
    const auto n = t.column("n");
    const auto r = t.column("risk");
    for (double theta : thetas) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < th.size(); ++i)
        if (th[i] == theta) {
          x.push_back(n[i]);
          y.push_back(r[i]);
        }
      const auto f = fit::fit_slope(x, y, static_cast<int>(drop));
      const auto pred = rates::kgf_curve_exponent(fam.s, fam.beta, theta);
      m.emplace_back("fit theta=" + num(theta),
                     "slope=" + num(f.slope) + " intercept=" + num(f.intercept) + " r2=" + num(f.r2) +
                         " predicted=" + num(pred.n_exponent) +
                         " saturated=" + (pred.saturated ? "true" : "false"));
    }
    return m;
  };
  return plan;
}

// ------------------------------------------------------------ opgsm-sim

Plan plan_opgsm(const ExperimentConfig& cfg) {
  Plan plan;
  plan.schema = "opgsm-sim/1";
  const int N = static_cast<int>(positive(cfg, "N", 500));
  opgsm::OpGsmConfig base = opgsm::reference_config(N);
  base.n = cfg.number("n", 4000.0);
  base.eta = cfg.number("eta", 0.5);
  base.steps = cfg.integer("steps", 2000);
  base.record_every = positive(cfg, "record_every", 1);
  base.freeze_A = cfg.flag("freeze_A", false);
  base.freeze_D = cfg.flag("freeze_D", false);
  const double sigma0 = cfg.number("sigma0", 1.0);
  base.noise_var = sigma0 * sigma0;
  base.p_list = int_list(cfg, "p", {10.0});
  if (!(base.n > 0.0) || !(base.eta > 0.0) || base.steps < 0 || !(sigma0 >= 0.0))
    throw InputError("opgsm-sim: n, eta must be > 0 and steps, sigma0 >= 0");
  for (int p : base.p_list)
    if (p > N) throw InputError("opgsm-sim: p must be <= N");
  const auto seeds = cfg.seeds(1);

  plan.columns = {"seed", "step", "loss"};
  for (int p : base.p_list) plan.columns.push_back("fraction_p" + std::to_string(p));
  for (const char* c : {"min_diag", "max_diag", "orthogonality_drift", "sign_flips"})
    plan.columns.emplace_back(c);

  for (std::uint64_t seed : seeds) {
    plan.tasks.push_back({"seed=" + std::to_string(seed), [base, seed] {
                            opgsm::OpGsmConfig c = base;
                            c.seed = seed;
                            const auto rep = opgsm::simulate(c);
                            std::vector<Row> rows;
                            for (const auto& r : rep.records) {
                              Row row{seed_cell(seed), std::int64_t{r.step}, r.loss};
                              for (double f : r.fractions) row.emplace_back(f);
                              row.insert(row.end(), {r.min_diag, r.max_diag, r.drift,
                                                     std::int64_t{r.sign_flips}});
                              rows.push_back(std::move(row));
                            }
                            return rows;
                          }});
  }
  plan.header = {{"truth", "theta_j = 1/(N - j + 2), lambda_j = 1/(j + 5)^2, D0 = lambda^1/2"}};
  const auto p_list = base.p_list;
  plan.summarize = [p_list](const ResultTable& t) {
    Meta m;
    const auto step = t.column("step");
    for (int p : p_list) {
      const auto f = t.column("fraction_p" + std::to_string(p));
      double first = 0.0, last = 0.0;
      int seeds = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (step[i] == 0.0) {
          first += f[i];
          ++seeds;
        }
        if (i + 1 == f.size() || step[i + 1] == 0.0) last += f[i];
      }
      if (seeds > 0)
        m.emplace_back("mean fraction_p" + std::to_string(p),
                       "initial=" + num(first / seeds) + " final=" + num(last / seeds));
    }
    return m;
  };
  return plan;
}

// ------------------------------------------------------------ net-align

Plan plan_net_align(const ExperimentConfig& cfg) {
  Plan plan;
  plan.schema = "net-align/1";
  const int d = static_cast<int>(positive(cfg, "d", 20));
  const int m = static_cast<int>(positive(cfg, "m", 200));
  const int n = static_cast<int>(positive(cfg, "n", 1000));
  const double eta = cfg.number("eta", 0.2);
  const long steps = cfg.integer("steps", 300);
  const long every = positive(cfg, "record_every", 10);
  const double sigma0 = cfg.number("sigma0", 0.0);
  const double readout_sd = cfg.number("readout_sd", 1.0);
  const std::string init_name = cfg.text("init", "symmetric");
  if (init_name != "symmetric" && init_name != "standard")
    throw InputError("net-align: init must be symmetric or standard");
  const auto init = init_name == "symmetric" ? fnet::Init::Symmetric : fnet::Init::Standard;
  if (!(eta > 0.0) || steps < 0 || !(sigma0 >= 0.0) || !(readout_sd >= 0.0))
    throw InputError("net-align: eta must be > 0 and steps, sigma0, readout_sd >= 0");
  const auto p_list = int_list(cfg, "p", {10.0});
  for (int p : p_list)
    if (p > m) throw InputError("net-align: p must be <= m");
  const auto seeds = cfg.seeds(5);

  plan.columns = {"seed", "step", "train_loss"};
  for (int p : p_list) plan.columns.push_back("fraction_p" + std::to_string(p));

  for (std::uint64_t seed : seeds) {
    plan.tasks.push_back({"seed=" + std::to_string(seed), [=] {
                            const auto task = fnet::make_task(d, sigma0, rng::derive_seed(seed, 1));
                            const auto data = fnet::generate(task, n, rng::derive_seed(seed, 2));
                            auto net = fnet::init_net(d, m, init, rng::derive_seed(seed, 3), readout_sd);
                            std::vector<Row> rows;
                            fnet::train_gd(std::move(net), data, eta, static_cast<int>(steps),
                                           [&](int k, const fnet::TwoLayerNet& w, double l) {
                                             if (k % every != 0 && k != steps) return;
                                             Row row{seed_cell(seed), std::int64_t{k}, l};
                                             for (double f : fnet::feature_alignment(w, data.X, data.y, p_list))
                                               row.emplace_back(f);
                                             rows.push_back(std::move(row));
                                           });
                            return rows;
                          }});
  }
  plan.header = {{"task", "y = z + z^2/2 + sigma0 N(0,1), z = <beta, x>, x ~ N(0, I_d)"}};
  plan.summarize = [p_list](const ResultTable& t) {
    Meta meta;
    const auto step = t.column("step");
    for (int p : p_list) {
      const auto f = t.column("fraction_p" + std::to_string(p));
      double first = 0.0, last = 0.0;
      int seeds = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (step[i] == 0.0) {
          first += f[i];
          ++seeds;
        }
        if (i + 1 == f.size() || step[i + 1] == 0.0) last += f[i];
      }
      if (seeds > 0)
        meta.emplace_back("mean fraction_p" + std::to_string(p),
                          "initial=" + num(first / seeds) + " final=" + num(last / seeds));
    }
    return meta;
  };
  return plan;
}

// ----------------------------------------------------------- kgf-vs-gsm

Plan plan_kgf_vs_gsm(const ExperimentConfig& cfg) {
  Plan plan;
  plan.schema = "kgf-vs-gsm/1";
  plan.columns = {"seed", "t", "kgf_risk", "kgf_std_error", "kgf_bias", "gsm_risk", "gsm_bias",
                  "ratio"};
  const std::string kernel = cfg.text("kernel", "k1");
  if (kernel != "k1") throw InputError("kgf-vs-gsm: only kernel = k1 is supported");
  const int n = static_cast<int>(positive(cfg, "n", 1024));
  const double sigma0 = cfg.number("sigma0", 0.1);
  const auto ts = cfg.numbers("t", {32.0});
  if (ts.empty()) throw InputError("kgf-vs-gsm: grid 't' is empty");
  for (double t : ts)
    if (!(t >= 0.0) || std::isinf(t)) throw InputError("kgf-vs-gsm: t must be finite and >= 0");
  if (!(sigma0 >= 0.0)) throw InputError("kgf-vs-gsm: sigma0 must be >= 0");
  const int samples = static_cast<int>(positive(cfg, "mc_samples", 20000));
  const int J = static_cast<int>(positive(cfg, "J", 4096));
  const std::string method = cfg.text("kgf_risk", "mc");
  if (method != "mc" && method != "basis") throw InputError("kgf-vs-gsm: kgf_risk must be mc or basis");
  const auto seeds = cfg.seeds(20);

  const auto k = spectral::MercerKernel::brownian_bridge();
  const auto truth = std::make_shared<const spectral::CoefficientVector>(
      spectral::project(truth_sin, spectral::eigensystem(k, J), J));

  for (std::uint64_t seed : seeds) {
    plan.tasks.push_back({"seed=" + std::to_string(seed), [=] {
                            const auto data = kreg::make_dataset(truth_sin, n, sigma0, seed);
                            kreg::Dataset1D clean = data;
                            for (std::size_t i = 0; i < clean.size(); ++i) clean.y[i] = truth_sin(clean.x[i]);
                            clean.sigma0 = 0.0;
                            const auto& lam = truth->basis.eigenvalues();
                            std::vector<Row> rows;
                            for (double t : ts) {
                              const auto est = kreg::kgf_predict(k, data, t);
                              const kreg::RiskEstimate r =
                                  method == "mc"
                                      ? kreg::risk(est, truth_sin,
                                                   kreg::MonteCarlo{samples, rng::derive_seed(seed, 7)})
                                      : kreg::risk(est, *truth, kreg::Basis{std::max(J, 2 * n)});
                              const double bias =
                                  kreg::risk(kreg::kgf_predict(k, clean, t), *truth,
                                             kreg::Basis{std::max(J, 2 * n)}).value;
                              const auto g = gsm::exact_risk(truth->theta, lam, t, n, sigma0 * sigma0,
                                                             truth->tail);
                              const double gr = g.total();
                              rows.push_back({seed_cell(seed), t, r.value, r.std_error,
                                              bias, gr, g.bias + g.tail_bias,
                                              gr > 0.0 ? r.value / gr : std::numeric_limits<double>::quiet_NaN()});
                            }
                            return rows;
                          }});
  }
  plan.header = {{"truth", "f(x) = sin(2 pi x), kernel min(x,y) - xy"},
                 {"ratio_band", "[0.7, 1.4] engineering calibration from pilot runs, not a theoretical constant"}};
  plan.summarize = [ts](const ResultTable& tab) {
    Meta m;
    const auto tc = tab.column("t");
    const auto ratio = tab.column("ratio");
    for (double t : ts) {
      double s = 0.0;
      int c = 0;
      for (std::size_t i = 0; i < tc.size(); ++i)
        if (tc[i] == t) {
          s += ratio[i];
          ++c;
        }
      m.emplace_back("mean ratio t=" + num(t), num(s / c));
    }
    return m;
  };
  return plan;
}

// --------------------------------------------------------- kernel-curve

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-9; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Plan plan_kernel_curve(const ExperimentConfig& cfg) {
  Plan plan;
  plan.schema = "kernel-curve/1";
  plan.columns = {"seed", "n", "t", "risk"};
  const std::string kname = cfg.text("kernel", "k1");
  if (kname != "k1" && kname != "k2") throw InputError("kernel-curve: kernel must be k1 or k2");
  const auto k = kname == "k1" ? spectral::MercerKernel::brownian_bridge() : spectral::MercerKernel::min();
  const double s = cfg.number("s", kname == "k1" ? INFINITY : 1.5);
  const double beta = 2.0;
  const double sigma0 = cfg.number("sigma0", 0.1);
  if (!(s > 0.0) || !(sigma0 > 0.0)) throw InputError("kernel-curve: s and sigma0 must be > 0");
  const auto ns_d = require_grid(cfg, "n");
  std::vector<int> ns;
  for (double n : ns_d) {
    if (n != std::floor(n) || n < 2 || n > 1 << 22) throw InputError("kernel-curve: n must be an integer >= 2");
    ns.push_back(static_cast<int>(n));
  }
  if (ns.size() < 4) throw InputError("kernel-curve: the n grid needs at least 4 points");
  const long drop = cfg.integer("drop_smallest", 0);
  if (drop < 0 || static_cast<std::size_t>(drop) + 4 > ns.size())
    throw InputError("kernel-curve: drop_smallest leaves fewer than 4 points");
  const int J = static_cast<int>(positive(cfg, "J", 4096));
  const auto seeds = cfg.seeds(20);
  const auto mm = rates::minimax_exponent(s, beta);

  const auto truth = std::make_shared<const spectral::CoefficientVector>(
      spectral::project(truth_sin, spectral::eigensystem(k, J), J));
  double C = cfg.number("t_constant", 0.0);
  if (!cfg.has("t_constant")) {
    // Calibrate on the matched sequence model: minimize sum_n log R(C n^theta*).
    const auto& lam = truth->basis.eigenvalues();
    auto objective = [&](double logc) {
      double acc = 0.0;
      for (int n : ns)
        acc += std::log(gsm::exact_risk(truth->theta, lam, std::exp(logc) * std::pow(n, mm.theta_star),
                                        n, sigma0 * sigma0, truth->tail).total());
      return acc;
    };
    C = std::exp(golden_min(objective, std::log(1e-3), std::log(1e5)));
  }
  if (!(C > 0.0)) throw InputError("kernel-curve: t_constant must be > 0");

  for (int n : ns)
    for (std::uint64_t seed : seeds) {
      const double t = C * std::pow(static_cast<double>(n), mm.theta_star);
      plan.tasks.push_back({"n=" + std::to_string(n) + " seed=" + std::to_string(seed), [=] {
                              const auto data = kreg::make_dataset(truth_sin, n, sigma0, seed);
                              const auto est = kreg::kgf_predict(k, data, t);
                              const auto r = kreg::risk(est, *truth, kreg::Basis{std::max(J, 2 * n)});
                              return std::vector<Row>{{seed_cell(seed), std::int64_t{n}, t,
                                                       r.value}};
                            }});
    }
  plan.header = {{"truth", "f(x) = sin(2 pi x), kernel " +
                               std::string(kname == "k1" ? "min(x,y) - xy" : "min(x,y)")},
                 {"stopping", "t = C n^theta*, theta* = " + num(mm.theta_star) + ", C = " + num(C)}};
  const double target = -mm.exponent;
  plan.summarize = [ns, drop, target](const ResultTable& tab) {
    const auto nc = tab.column("n");
    const auto rc = tab.column("risk");
    std::vector<double> x, y;
    for (int n : ns) {
      double acc = 0.0;
      int c = 0;
      for (std::size_t i = 0; i < nc.size(); ++i)
        if (nc[i] == n) {
          acc += rc[i];
          ++c;
        }
      x.push_back(n);
      y.push_back(acc / c);
    }
    const auto f = fit::fit_slope(x, y, static_cast<int>(drop));
    std::string means;
    for (std::size_t i = 0; i < x.size(); ++i) means += (i ? " " : "") + num(y[i]);
    return Meta{{"mean risk per n", means},
                {"fit mean risk", "slope=" + num(f.slope) + " intercept=" + num(f.intercept) +
                                      " r2=" + num(f.r2) + " target=" + num(target)}};
  };
  return plan;
}

Plan make_plan(const ExperimentConfig& cfg) {
  const std::string& kind = cfg.kind();
  if (kind == "rates") return plan_rates(cfg);
  if (kind == "gsm-curve") return plan_gsm_curve(cfg);
  if (kind == "opgsm-sim") return plan_opgsm(cfg);
  if (kind == "kgf-vs-gsm") return plan_kgf_vs_gsm(cfg);
  if (kind == "net-align") return plan_net_align(cfg);
  if (kind == "kernel-curve") return plan_kernel_curve(cfg);
  throw InputError("unknown experiment kind '" + kind + "'");
}

[[noreturn]] void rethrow_with(const std::string& label, std::exception_ptr e) {
  const std::string prefix = "task " + label + ": ";
  try {
    std::rethrow_exception(e);
  } catch (const StepSizeError& x) {
    throw StepSizeError(prefix + x.what(), x.measure());
  } catch (const InstabilityError& x) {
    throw InstabilityError(prefix + x.what(), x.measure());
  } catch (const NumericalError& x) {
    throw NumericalError(prefix + x.what(), x.measure());
  } catch (const InputError& x) {
    throw InputError(prefix + x.what());
  } catch (const CapabilityError& x) {
    throw CapabilityError(prefix + x.what());
  } catch (const std::exception& x) {
    throw Error(prefix + x.what());
  }
}

// Runs tasks on `workers` threads and hands their rows to `emit` in task order.
void execute(std::vector<Task>& tasks, int workers, const std::function<void(std::vector<Row>&)>& emit) {
  const std::size_t count = tasks.size();
  if (workers <= 1 || count <= 1) {
    for (auto& t : tasks) {
      std::vector<Row> rows;
      try {
        rows = t.work();
      } catch (...) {
        rethrow_with(t.label, std::current_exception());
      }
      emit(rows);
    }
    return;
  }
  std::vector<std::optional<std::vector<Row>>> done(count);
  std::vector<std::exception_ptr> failed(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::condition_variable cv;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      std::vector<Row> rows;
      std::exception_ptr err;
      try {
        rows = tasks[i].work();
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        if (err) failed[i] = err;
        else done[i] = std::move(rows);
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  for (std::size_t w = 0; w < k; ++w) pool.emplace_back(worker);
  auto join = [&] {
    for (auto& th : pool)
      if (th.joinable()) th.join();
  };

  try {
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<Row> rows;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return done[i].has_value() || failed[i]; });
        if (failed[i]) {
          stop = true;
          const auto err = failed[i];
          lock.unlock();
          join();
          rethrow_with(tasks[i].label, err);
        }
        rows = std::move(*done[i]);
        done[i].reset();
      }
      emit(rows);
    }
  } catch (...) {
    stop = true;
    join();
    throw;
  }
  join();
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"rates",      "gsm-curve", "opgsm-sim",
                                              "kgf-vs-gsm", "net-align", "kernel-curve"};
  return kinds;
}

int resolve_workers(int requested) {
  int w = requested;
  if (const char* env = std::getenv("LAB_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw InputError("LAB_WORKERS must be an integer in [1, 1024]");
    w = static_cast<int>(v);
  }
  if (w < 1) throw InputError("workers must be >= 1");
  return w;
}

ResultTable run(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.workers < 1) throw InputError("workers must be >= 1");
  if (opt.tsv && opt.out.empty()) throw InputError("--tsv needs an output path");
  Plan plan = make_plan(cfg);
  if (plan.tasks.empty()) throw InputError(cfg.kind() + ": nothing to run");

  ResultTable table;
  table.columns = plan.columns;
  table.header = {{"lab", std::string(kVersion)},
                  {"kind", cfg.kind()},
                  {"schema", plan.schema},
                  {"config_hash", hex64(cfg.hash())}};
  table.header.insert(table.header.end(), plan.header.begin(), plan.header.end());

  std::optional<CsvSink> sink;
  if (!opt.out.empty()) sink.emplace(opt.out, table.columns, table.header, opt.tsv);
  try {
    execute(plan.tasks, opt.workers, [&](std::vector<Row>& rows) {
      for (auto& r : rows) {
        if (sink) sink->write(r);
        table.add(std::move(r));
      }
    });
    table.footer = plan.summarize(table);
  } catch (const std::exception& e) {
    if (sink) sink->close({{"status", std::string("failed: ") + e.what()}});
    throw;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  table.footer.emplace_back("wall_time_s", num(wall));
  table.footer.emplace_back("status", "ok");
  if (sink) sink->close(table.footer);
  return table;
}

ResultTable kgf_vs_gsm(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig c = cfg;
  c.set_kind("kgf-vs-gsm");  // throws if cfg names another kind
  return run(c, opt);
}

}  // namespace lab::cli
