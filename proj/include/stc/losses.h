#pragma once

#include <vector>

#include "stc/matrix.h"

namespace stc {

// Loss value and its gradient with respect to the input log-probabilities.
// loss == +inf means no valid alignment exists; the gradient is all zero.
struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

// Negative log probability of the target sequence, marginalized over every
// frame alignment that collapses to it (merge repeats, then drop blanks).
// logProbs: T x K log-distributions, columns = vocabulary tokens then blank.
LossResult ctcLoss(const Matrix& logProbs, const std::vector<int>& target);

// CTC variant without self-loops on tokens; collapse drops blanks only.
LossResult selflessCtcLoss(const Matrix& logProbs,
                           const std::vector<int>& target);

// Loss for a partial label: alignments may emit any tokens around the given
// ones, paying `lambda` (<= 0, or -inf to forbid) per inserted token. With
// reducedAlphabet the emission graph is built only over the partial label's
// tokens plus blank/star/complements; the result is identical, the gradient
// is still scattered over all K columns.
LossResult stcLoss(const Matrix& logProbs, const std::vector<int>& partial,
                   double lambda, bool reducedAlphabet = false);

// Token insertion penalty annealing: p(t) = pMax + (p0 - pMax) exp(-t/tau),
// lambda(t) = ln p(t). Half-life tau*ln(2) is the step count at which p
// reaches (p0 + pMax)/2.
class PenaltySchedule {
 public:
  PenaltySchedule(double p0, double pMax, double tau);
  static PenaltySchedule fromHalfLife(double p0, double pMax, double halfLife);

  double pAt(double step) const;
  double lambdaAt(double step) const;

  double p0() const { return p0_; }
  double pMax() const { return pMax_; }
  double tau() const { return tau_; }
  double halfLife() const;

 private:
  double p0_;
  double pMax_;
  double tau_;
};

} // namespace stc
