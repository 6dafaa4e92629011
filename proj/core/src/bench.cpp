#include "npkry/bench.hpp"

#include <algorithm>
#include <fstream>

#include "npkry/error.hpp"
#include "npkry/io.hpp"

namespace npkry {

BenchSummary bench(const std::vector<ProblemInstance>& dataset,
                   const std::vector<NamedPreconditioner>& preconds,
                   double tol, std::size_t max_iter,
                   const std::filesystem::path& out_dir) {
  check(!dataset.empty(), "bench: empty dataset");
  check(!preconds.empty(), "bench: no preconditioners");
  BenchSummary summary;
  summary.tol = tol;
  summary.max_iter = max_iter;
  summary.grid_n = dataset.front().grid_n;

  std::vector<std::vector<std::string>> rows;
  FgmresOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.keep_basis = false;

  for (const auto& np : preconds) {
    BenchSummary::PerPrecond per;
    per.name = np.name;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& inst = dataset[i];
      std::size_t iters = max_iter;
      bool converged = false;
      double rel_res = 1.0;
      try {
        const FgmresResult res = fgmres(inst, *np.precond, opts);
        iters = res.iters;
        converged = res.converged;
        rel_res = res.final_residual / norm2(inst.b);
      } catch (const Error&) {
        // solver could not advance: recorded as a non-convergent solve
      }
      per.iters.push_back(iters);
      per.converged.push_back(converged);
      rows.push_back({std::to_string(i), std::to_string(inst.mu.seed),
                      np.name, std::to_string(iters), converged ? "1" : "0",
                      format_double(rel_res)});
    }
    per.min = *std::min_element(per.iters.begin(), per.iters.end());
    per.max = *std::max_element(per.iters.begin(), per.iters.end());
    double sum = 0.0;
    for (std::size_t it : per.iters) sum += static_cast<double>(it);
    per.mean = sum / static_cast<double>(per.iters.size());
    summary.results.push_back(std::move(per));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "bench.csv");
    check(out.good(), "cannot write bench.csv");
    out << csv_row({"instance", "seed", "precond", "iters", "converged",
                    "final_rel_residual"});
    for (const auto& r : rows) out << csv_row(r);
    std::ofstream sum(out_dir / "summary.csv");
    check(sum.good(), "cannot write summary.csv");
    sum << csv_row({"precond", "mean_iters", "min_iters", "max_iters",
                    "n_instances", "n_nonconverged"});
    for (const auto& per : summary.results) {
      std::size_t bad = 0;
      for (bool c : per.converged)
        if (!c) ++bad;
      sum << csv_row({per.name, format_double(per.mean),
                      std::to_string(per.min), std::to_string(per.max),
                      std::to_string(per.iters.size()), std::to_string(bad)});
    }
  }
  return summary;
}

void write_trace_csv(const KrylovTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write " + path.string());
  out << csv_row({"iter", "res_norm", "sine"});
  for (std::size_t j = 0; j < trace.res_norms.size(); ++j) {
    std::vector<std::string> row{std::to_string(j),
                                 format_double(trace.res_norms[j])};
    row.push_back(j == 0 ? std::string{}
                         : format_double(trace.sines[j - 1]));
    out << csv_row(row);
  }
  check(out.good(), "write failed: " + path.string());
}

}  // namespace npkry
