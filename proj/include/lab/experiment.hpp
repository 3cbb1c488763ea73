#pragma once

#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/table.hpp"

// Config-driven experiment runner. Each kind expands its config into
// independent tasks (grid points and seeds), runs them on a bounded worker
// pool and emits their rows in task order, so the table does not depend on
// the worker count. Column schemas are listed in README.md.
namespace lab::cli {

struct RunOptions {
  std::string out;   // CSV path; empty keeps the table in memory only
  int workers = 1;
  bool tsv = false;  // also write a .tsv next to `out`
};

const std::vector<std::string>& experiment_kinds();

/// LAB_WORKERS when set, otherwise `requested`; InputError unless >= 1.
int resolve_workers(int requested);

/// Validates the whole config before creating any output, then runs it.
/// Task failures are rethrown with the same error class and the failing
/// grid point prefixed to the message.
ResultTable run(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// kgf-vs-gsm: KGF Monte-Carlo risk against the exact risk of the matched
/// sequence model (k1 eigenvalues, projected truth, same n, t and noise).
ResultTable kgf_vs_gsm(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace lab::cli
