#include "npkry/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "npkry/error.hpp"
#include "npkry/io.hpp"
#include "npkry/rng.hpp"

namespace npkry {

TrainConfig TrainConfig::static_defaults() {
  TrainConfig c;
  c.phase = Phase::kStatic;
  c.epochs = 250;
  c.batch = 5;
  return c;
}

TrainConfig TrainConfig::dynamic_defaults() {
  TrainConfig c;
  c.phase = Phase::kDynamic;
  c.epochs = 150;
  c.batch = 20;
  c.n_augment = 0;  // no augmentation in the fine-tuning phase
  return c;
}

double alpha_norm(std::span<const ProblemInstance> instances) {
  check(!instances.empty(), "alpha_norm: empty instance set");
  double mean_rms = 0.0;
  for (const auto& inst : instances) {
    const DenseVector diag = inst.A.diagonal();
    const double rms = norm2(diag) / std::sqrt(static_cast<double>(diag.size()));
    check(rms > 0.0, "alpha_norm: zero diagonal norm");
    mean_rms += rms;
  }
  mean_rms /= static_cast<double>(instances.size());
  return 1.0 / mean_rms;
}

ad::Var loss_static(ad::Tape& tape, const Preconditioner& precond,
                    std::span<const StaticBatchItem> batch, double alpha) {
  check(!batch.empty(), "loss_static: empty batch");
  const double inv_alpha = 1.0 / alpha;
  ad::Var total;
  for (const auto& item : batch) {
    check(item.instance != nullptr && !item.rhs.empty(),
          "loss_static: malformed batch item");
    ad::Var inst_sum;
    for (const DenseVector* v : item.rhs) {
      ad::Var vv = tape.constant(v->raw(), {v->size()});
      ad::Var nz = precond.apply_ad(tape, vv, *item.instance);
      ad::Var anz = tape.matvec(item.instance->A, nz);
      ad::Var r = tape.sub(vv, tape.scale(anz, inv_alpha));
      ad::Var sq = tape.dot(r, r);
      inst_sum = inst_sum.valid() ? tape.add(inst_sum, sq) : sq;
    }
    ad::Var inst_mean =
        tape.scale(inst_sum, 1.0 / static_cast<double>(item.rhs.size()));
    total = total.valid() ? tape.add(total, inst_mean) : inst_mean;
  }
  return tape.scale(total, 1.0 / static_cast<double>(batch.size()));
}

double loss_static_value(const Preconditioner& precond,
                         std::span<const StaticBatchItem> batch,
                         double alpha) {
  check(!batch.empty(), "loss_static_value: empty batch");
  const double inv_alpha = 1.0 / alpha;
  double total = 0.0;
  for (const auto& item : batch) {
    double inst_sum = 0.0;
    for (const DenseVector* v : item.rhs) {
      const DenseVector nz = precond.apply(*v, *item.instance);
      DenseVector r = spmv(item.instance->A, nz);
      scal(inv_alpha, r);
      r = subtract(*v, r);
      inst_sum += dot(r, r);
    }
    total += inst_sum / static_cast<double>(item.rhs.size());
  }
  return total / static_cast<double>(batch.size());
}

ad::Var loss_dynamic(ad::Tape& tape, const Preconditioner& precond,
                     std::span<const ProblemInstance* const> batch,
                     std::size_t M, std::vector<double>* mean_sines) {
  check(!batch.empty(), "loss_dynamic: empty batch");
  check(M >= 1, "loss_dynamic: M must be positive");
  std::vector<ad::Var> sine_sums(M);
  for (const ProblemInstance* inst : batch) {
    check(inst != nullptr, "loss_dynamic: null instance");
    const double bnorm = norm2(inst->b);
    check(bnorm > 0.0, "loss_dynamic: zero rhs");
    const DenseVector r0 = scaled(inst->b, 1.0 / bnorm);
    AgResult ag;
    try {
      ag = ag_m(
          tape, inst->A, r0,
          [&](ad::Tape& t, ad::Var v) { return precond.apply_ad(t, v, *inst); },
          M);
    } catch (const Error& e) {
      throw Error("loss_dynamic: instance seed " +
                  std::to_string(inst->mu.seed) + ": " + e.what());
    }
    for (std::size_t j = 0; j < M; ++j) {
      check(std::isfinite(ag.sines[j].value0()),
            "loss_dynamic: non-finite sine, instance seed " +
                std::to_string(inst->mu.seed));
      sine_sums[j] = sine_sums[j].valid()
                         ? tape.add(sine_sums[j], ag.sines[j])
                         : ag.sines[j];
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  if (mean_sines != nullptr) {
    mean_sines->assign(M, 0.0);
    for (std::size_t j = 0; j < M; ++j)
      (*mean_sines)[j] = sine_sums[j].value0() * inv_b;
  }
  ad::Var total;
  for (std::size_t j = 0; j < M; ++j)
    total = total.valid() ? tape.add(total, sine_sums[j]) : sine_sums[j];
  return tape.scale(total, inv_b / static_cast<double>(M));
}

std::vector<double> arnoldi_sines(const SparseMatrix& A,
                                  const DenseVector& r0,
                                  const PrecondFn& precond, std::size_t M) {
  check(M >= 1, "arnoldi_sines: M must be positive");
  const double beta = norm2(r0);
  check(beta > 0.0, "arnoldi_sines: zero residual");
  std::vector<double> sines(M, 0.0);
  std::vector<DenseVector> basis{scaled(r0, 1.0 / beta)};
  Hessenberg R(M + 1, M);
  std::vector<GivensPair> rot;
  for (std::size_t j = 0; j < M; ++j) {
    const DenseVector z = precond(basis[j]);
    const DenseVector w = spmv(A, z);
    const MgsResult mgs = mgs_orthogonalize(w, basis);
    for (std::size_t i = 0; i <= j; ++i) R.at(i, j) = mgs.coeffs[i];
    R.at(j + 1, j) = mgs.breakdown ? 0.0 : mgs.h_next;
    for (std::size_t i = 0; i < j; ++i) {
      double x = R.at(i, j), y = R.at(i + 1, j);
      givens_apply(rot[i], x, y);
      R.at(i, j) = x;
      R.at(i + 1, j) = y;
    }
    const GivensResult g = givens_compute(R.at(j, j), R.at(j + 1, j));
    if (g.breakdown) break;  // remaining sines stay 0
    rot.push_back(g.pair);
    sines[j] = std::abs(g.pair.s);
    if (mgs.breakdown) break;
    basis.push_back(mgs.v_next);
  }
  return sines;
}

AdamOptimizer::AdamOptimizer(std::size_t dim, double lr, double beta1,
                             double beta2, double eps)
    : m_(dim, 0.0), v_(dim, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {}

void AdamOptimizer::step(std::span<double> theta,
                         std::span<const double> grad) {
  check(theta.size() == m_.size() && grad.size() == m_.size(),
        "AdamOptimizer: dimension mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

namespace {

void append_metrics(const std::filesystem::path& out_dir,
                    const LossReport& report, std::size_t M) {
  const auto path = out_dir / "metrics.csv";
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  check(out.good(), "cannot open " + path.string());
  if (fresh) {
    std::vector<std::string> header{"epoch", "phase", "train_loss",
                                    "val_loss"};
    for (std::size_t j = 1; j <= M; ++j)
      header.push_back("mean_sine_" + std::to_string(j));
    out << csv_row(header);
  }
  std::vector<std::string> row{std::to_string(report.epoch), report.phase,
                               format_double(report.train_loss),
                               format_double(report.val_loss)};
  for (std::size_t j = 0; j < M; ++j)
    row.push_back(j < report.mean_sines.size()
                      ? format_double(report.mean_sines[j])
                      : std::string{});
  out << csv_row(row);
  check(out.good(), "write failed: " + path.string());
}

}  // namespace

TrainResult train(const TrainConfig& cfg,
                  const std::vector<ProblemInstance>& train_instances,
                  const std::vector<ProblemInstance>& val_instances,
                  NeuralPreconditioner& net,
                  const std::filesystem::path& out_dir) {
  check(!train_instances.empty(), "train: empty training set");
  check(cfg.lr >= 0.0, "train: negative learning rate");
  std::filesystem::create_directories(out_dir);
  const bool dynamic = cfg.phase == TrainConfig::Phase::kDynamic;
  const std::string phase_name = dynamic ? "dynamic" : "static";
  const std::size_t M = cfg.krylov_window;

  // static-phase data: rhs sets per instance (canonical + augmentation)
  std::vector<RhsSet> train_rhs, val_rhs;
  if (!dynamic) {
    for (std::size_t i = 0; i < train_instances.size(); ++i)
      train_rhs.push_back(build_rhs_set(train_instances[i], cfg.n_augment,
                                        cfg.seed ^ train_instances[i].mu.seed));
    for (std::size_t i = 0; i < val_instances.size(); ++i)
      val_rhs.push_back(build_rhs_set(val_instances[i], cfg.n_augment,
                                      cfg.seed ^ val_instances[i].mu.seed));
  }
  const double alpha =
      dynamic ? 1.0 : alpha_norm(std::span(train_instances));

  // flattened (instance, rhs) sample list for the static phase
  std::vector<std::pair<std::size_t, std::size_t>> static_samples;
  if (!dynamic)
    for (std::size_t i = 0; i < train_instances.size(); ++i)
      for (std::size_t r = 0; r < train_rhs[i].size(); ++r)
        static_samples.emplace_back(i, r);
  std::vector<std::size_t> dynamic_order(train_instances.size());
  for (std::size_t i = 0; i < dynamic_order.size(); ++i) dynamic_order[i] = i;

  AdamOptimizer opt(net.params().size(), cfg.lr);
  Rng shuffle_rng = Rng::child(cfg.seed, 0x5af71e);

  auto val_loss = [&]() -> double {
    if (val_instances.empty()) return 0.0;
    if (!dynamic) {
      std::vector<StaticBatchItem> items;
      for (std::size_t i = 0; i < val_instances.size(); ++i) {
        StaticBatchItem item;
        item.instance = &val_instances[i];
        for (std::size_t r = 0; r < val_rhs[i].size(); ++r)
          item.rhs.push_back(&val_rhs[i].at(r));
        items.push_back(std::move(item));
      }
      return loss_static_value(net, items, alpha);
    }
    double total = 0.0;
    for (const auto& inst : val_instances) {
      const DenseVector r0 = scaled(inst.b, 1.0 / norm2(inst.b));
      const auto sines = arnoldi_sines(
          inst.A, r0,
          [&](const DenseVector& v) { return net.apply(v, inst); }, M);
      double s = 0.0;
      for (double x : sines) s += x;
      total += s / static_cast<double>(M);
    }
    return total / static_cast<double>(val_instances.size());
  };

  TrainResult result;
  double initial_loss = -1.0;
  std::size_t diverged_streak = 0;
  double lr = cfg.lr;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    opt.set_lr(lr);
    double epoch_loss = 0.0;
    std::size_t epoch_terms = 0;
    std::vector<double> epoch_sines(M, 0.0);
    std::size_t sine_terms = 0;

    if (!dynamic) {
      shuffle_rng.shuffle(static_samples.begin(), static_samples.end());
      for (std::size_t start = 0; start < static_samples.size();
           start += cfg.batch) {
        const std::size_t stop =
            std::min(start + cfg.batch, static_samples.size());
        std::vector<StaticBatchItem> items;
        for (std::size_t s = start; s < stop; ++s) {
          StaticBatchItem item;
          item.instance = &train_instances[static_samples[s].first];
          item.rhs.push_back(
              &train_rhs[static_samples[s].first].at(static_samples[s].second));
          items.push_back(std::move(item));
        }
        ad::Tape tape;
        const ad::Var loss = loss_static(tape, net, items, alpha);
        tape.backward(loss);
        const std::vector<double> grad = net.gather_gradient(tape);
        opt.step(net.params().flat(), grad);
        epoch_loss += loss.value0() * static_cast<double>(items.size());
        epoch_terms += items.size();
      }
    } else {
      shuffle_rng.shuffle(dynamic_order.begin(), dynamic_order.end());
      for (std::size_t start = 0; start < dynamic_order.size();
           start += cfg.batch) {
        const std::size_t stop =
            std::min(start + cfg.batch, dynamic_order.size());
        std::vector<const ProblemInstance*> batch;
        for (std::size_t s = start; s < stop; ++s)
          batch.push_back(&train_instances[dynamic_order[s]]);
        ad::Tape tape;
        std::vector<double> batch_sines;
        const ad::Var loss =
            loss_dynamic(tape, net, batch, M, &batch_sines);
        tape.backward(loss);
        const std::vector<double> grad = net.gather_gradient(tape);
        opt.step(net.params().flat(), grad);
        epoch_loss += loss.value0() * static_cast<double>(batch.size());
        epoch_terms += batch.size();
        for (std::size_t j = 0; j < M; ++j)
          epoch_sines[j] += batch_sines[j] * static_cast<double>(batch.size());
        sine_terms += batch.size();
      }
    }

    LossReport report;
    report.epoch = epoch;
    report.phase = phase_name;
    report.train_loss = epoch_loss / static_cast<double>(epoch_terms);
    report.val_loss = val_loss();
    if (dynamic && sine_terms > 0) {
      report.mean_sines.resize(M);
      for (std::size_t j = 0; j < M; ++j)
        report.mean_sines[j] =
            epoch_sines[j] / static_cast<double>(sine_terms);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    check(std::isfinite(report.train_loss) && report.train_loss >= 0.0,
          "train: loss left the valid range");
    append_metrics(out_dir, report, M);
    result.reports.push_back(report);

    if (initial_loss < 0.0) initial_loss = report.train_loss;
    diverged_streak =
        report.train_loss > 10.0 * initial_loss ? diverged_streak + 1 : 0;
    if (diverged_streak >= 5) {
      result.aborted = true;
      break;
    }
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      net.save(out_dir / ("checkpoint_" + phase_name + "_" +
                          std::to_string(epoch + 1) + ".npkry"));
    lr *= cfg.lr_decay;
  }
  net.save(out_dir / ("checkpoint_" + phase_name + "_final.npkry"));
  return result;
}

}  // namespace npkry
