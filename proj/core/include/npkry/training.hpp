#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "npkry/ag.hpp"
#include "npkry/fgmres.hpp"
#include "npkry/problem.hpp"
#include "npkry/rhs.hpp"
#include "npkry/unet.hpp"

namespace npkry {

struct TrainConfig {
  enum class Phase { kStatic, kDynamic };
  Phase phase = Phase::kStatic;
  double lr = 1e-3;
  std::size_t epochs = 250;       // fine-tuning default is 150
  std::size_t batch = 5;          // dynamic mini-batch default is 20
  std::size_t krylov_window = 10;  // M
  double lr_decay = 0.99;         // exponential factor per epoch
  std::size_t n_augment = 4;      // static-phase hypersphere samples
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0: final checkpoint only

  static TrainConfig static_defaults();
  static TrainConfig dynamic_defaults();
};

struct LossReport {
  std::size_t epoch = 0;
  std::string phase;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::vector<double> mean_sines;  // <|s_j|> over the train set, dynamic only
  double wall_seconds = 0.0;       // not serialized: runs stay byte-identical
};

struct TrainResult {
  std::vector<LossReport> reports;
  bool aborted = false;  // divergence guard tripped
};

/// Normalization from the average RMS of the matrix diagonals:
/// alpha = ( mean_j ||diag(A_j)||_2 / sqrt(N) )^-1
double alpha_norm(std::span<const ProblemInstance> instances);

struct StaticBatchItem {
  const ProblemInstance* instance = nullptr;
  std::vector<const DenseVector*> rhs;  // members of the training set K_mu
};

/// Residual pretraining loss on the tape:
/// mean over items and their rhs of || v - alpha^-1 A N(v) ||^2.
ad::Var loss_static(ad::Tape& tape, const Preconditioner& precond,
                    std::span<const StaticBatchItem> batch, double alpha);
double loss_static_value(const Preconditioner& precond,
                         std::span<const StaticBatchItem> batch, double alpha);

/// Dynamic loss on the tape: (1/M) sum_j mean over instances of |s_j|,
/// with r_0 = b/||b|| per instance and ag_m recorded per instance on the
/// shared tape. mean_sines (optional out) receives <|s_j|> values.
ad::Var loss_dynamic(ad::Tape& tape, const Preconditioner& precond,
                     std::span<const ProblemInstance* const> batch,
                     std::size_t M, std::vector<double>* mean_sines = nullptr);

/// Value-only M-step sine sequence (no tape): the plain Arnoldi-Givens
/// sweep used for validation and diagnostics.
std::vector<double> arnoldi_sines(const SparseMatrix& A, const DenseVector& r0,
                                  const PrecondFn& precond, std::size_t M);

/// Adaptive-moment estimation, bias-corrected.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t dim, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> theta, std::span<const double> grad);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
  double lr_, beta1_, beta2_, eps_;
};

/// One training phase over the given split. Updates net parameters in
/// place, appends to metrics.csv under out_dir and writes checkpoints.
/// Aborts (flagged, not thrown) when the train loss exceeds 10x its
/// initial value for 5 consecutive epochs.
TrainResult train(const TrainConfig& cfg,
                  const std::vector<ProblemInstance>& train_instances,
                  const std::vector<ProblemInstance>& val_instances,
                  NeuralPreconditioner& net,
                  const std::filesystem::path& out_dir);

}  // namespace npkry
