#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "npkry/fgmres.hpp"
#include "npkry/problem.hpp"

namespace npkry {

/// Iteration-count study over a test set of instances, one row per
/// (instance, preconditioner) solve.
struct BenchSummary {
  struct PerPrecond {
    std::string name;
    std::vector<std::size_t> iters;     // per instance
    std::vector<bool> converged;        // non-convergence kept, never dropped
    double mean = 0.0;
    std::size_t min = 0, max = 0;
  };
  std::vector<PerPrecond> results;
  double tol = 1e-6;
  std::size_t max_iter = 400;
  std::size_t grid_n = 0;
};

struct NamedPreconditioner {
  std::string name;
  const Preconditioner* precond = nullptr;
};

/// Solves every instance with every preconditioner. Writes bench.csv
/// (per-solve rows) and summary.csv under out_dir when it is nonempty.
BenchSummary bench(const std::vector<ProblemInstance>& dataset,
                   const std::vector<NamedPreconditioner>& preconds,
                   double tol, std::size_t max_iter,
                   const std::filesystem::path& out_dir = {});

/// Per-iteration trace CSV (iter, res_norm, sine) as emitted by `solve`.
void write_trace_csv(const KrylovTrace& trace,
                     const std::filesystem::path& path);

}  // namespace npkry
