#pragma once

#include <string>

#include "npkry/dense_vector.hpp"
#include "npkry/problem.hpp"
#include "npkry/tape.hpp"

namespace npkry {

/// Right preconditioner, possibly nonlinear and parameter-dependent.
/// apply and apply_ad must agree in value on identical inputs.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual DenseVector apply(const DenseVector& v,
                            const ProblemInstance& inst) const = 0;
  virtual ad::Var apply_ad(ad::Tape& tape, ad::Var v,
                           const ProblemInstance& inst) const = 0;
  virtual std::string name() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  DenseVector apply(const DenseVector& v,
                    const ProblemInstance&) const override {
    return v;
  }
  ad::Var apply_ad(ad::Tape&, ad::Var v,
                   const ProblemInstance&) const override {
    return v;
  }
  std::string name() const override { return "none"; }
};

/// Fixed diagonal scaling z = diag .* v.
class DiagonalPreconditioner final : public Preconditioner {
 public:
  explicit DiagonalPreconditioner(DenseVector diag)
      : diag_(std::move(diag)) {}
  DenseVector apply(const DenseVector& v,
                    const ProblemInstance&) const override;
  ad::Var apply_ad(ad::Tape& tape, ad::Var v,
                   const ProblemInstance&) const override;
  std::string name() const override { return "diagonal"; }

 private:
  DenseVector diag_;
};

}  // namespace npkry
