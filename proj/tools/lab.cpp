// lab <kind> --config PATH [--seed S] [--out PATH] [--workers K] [--tsv]
//
// Exit codes: 0 success, 2 invalid input or config, 3 numerical failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lab/config.hpp"
#include "lab/error.hpp"
#include "lab/experiment.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void print(const lab::cli::ResultTable& t) {
  using lab::cli::format_cell;
  for (const auto& [k, v] : t.header) std::cout << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) std::cout << (i ? "," : "") << t.columns[i];
  std::cout << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << format_cell(row[i]);
    std::cout << '\n';
  }
  for (const auto& [k, v] : t.footer) std::cout << "# " << k << ": " << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral learning-curve experiments"};
  std::string kind, config_path, out;
  long long seed = -1;
  int workers = 0;
  bool tsv = false;

  std::string kinds;
  for (const auto& k : lab::cli::experiment_kinds()) kinds += (kinds.empty() ? "" : " | ") + k;
  app.add_option("kind", kind, "experiment kind: " + kinds)->required();
  app.add_option("--config", config_path, "key = value config file")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "CSV output path (default: config `out`, else stdout)");
  app.add_option("--workers", workers, "worker threads (LAB_WORKERS overrides)")->check(CLI::PositiveNumber);
  app.add_flag("--tsv", tsv, "also write a tab-separated copy next to the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    auto cfg = lab::cli::ExperimentConfig::load(config_path);
    cfg.set_kind(kind);
    if (seed >= 0) cfg.set("seed", {std::to_string(seed)});
    lab::cli::RunOptions opt;
    opt.out = out.empty() ? cfg.text("out", "") : out;
    opt.workers = lab::cli::resolve_workers(workers > 0 ? workers : static_cast<int>(cfg.integer("workers", 1)));
    opt.tsv = tsv;
    const auto table = lab::cli::run(cfg, opt);
    if (opt.out.empty()) print(table);
    else std::cerr << "lab: wrote " << table.rows.size() << " rows to " << opt.out << '\n';
    return 0;
  } catch (const lab::NumericalError& e) {
    std::cerr << "lab: numerical failure: " << e.what();
    if (e.measure() != 0.0) std::cerr << " (measure " << e.measure() << ")";
    std::cerr << '\n';
    return kExitNumerical;
  } catch (const lab::Error& e) {
    std::cerr << "lab: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "lab: " << e.what() << '\n';
    return kExitInput;
  }
}
