#include "stc/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stc/autograd.h"
#include "stc/emission.h"
#include "stc/label_graphs.h"

namespace stc {

namespace {

Alphabet alphabetFor(const Matrix& logProbs) {
  if (logProbs.cols() < 2) {
    throw std::invalid_argument(
        "log-probability matrix needs at least two columns (token + blank)");
  }
  return Alphabet(logProbs.cols() - 1);
}

// Shared recipe: lattice = label graph composed with the emission graph,
// loss = -forwardScore(lattice), gradients scattered back to the matrix.
LossResult lossFromGraphs(const Graph& label, const EmissionGraph& emission) {
  Tape tape;
  const Graph& lattice = tape.compose(label, emission.graph);
  Tape::Scalar fwd = tape.forwardScore(lattice);
  Tape::Scalar loss = tape.negate(fwd);

  LossResult result;
  result.loss = loss.value;
  result.grad = Matrix(emission.logProbs().rows(), emission.logProbs().cols());
  if (fwd.value != kNegInf) {
    tape.backward(loss);
    scatterEmissionGradients(emission, tape.gradFor(emission.graph),
                             result.grad);
  }
  return result;
}

} // namespace

LossResult ctcLoss(const Matrix& logProbs, const std::vector<int>& target) {
  Alphabet alphabet = alphabetFor(logProbs);
  EmissionGraph emission = buildEmission(logProbs, alphabet);
  CtcLabelGraph label = buildCtcLabel(alphabet, target);
  return lossFromGraphs(label.graph, emission);
}

LossResult selflessCtcLoss(const Matrix& logProbs,
                           const std::vector<int>& target) {
  Alphabet alphabet = alphabetFor(logProbs);
  EmissionGraph emission = buildEmission(logProbs, alphabet);
  CtcLabelGraph label = buildSelflessCtcLabel(alphabet, target);
  return lossFromGraphs(label.graph, emission);
}

LossResult stcLoss(const Matrix& logProbs, const std::vector<int>& partial,
                   double lambda, bool reducedAlphabet) {
  Alphabet alphabet = alphabetFor(logProbs);

  std::vector<int> needed = partial;
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  bool stars = lambda != kNegInf;
  EmissionGraph emission =
      reducedAlphabet ? buildEmission(logProbs, alphabet, &needed)
                      : buildEmission(logProbs, alphabet);
  if (stars) {
    emission = augmentStars(emission, needed);
  }
  StcLabelGraph label = buildStcLabel(alphabet, partial, lambda);
  return lossFromGraphs(label.graph, emission);
}

PenaltySchedule::PenaltySchedule(double p0, double pMax, double tau)
    : p0_(p0), pMax_(pMax), tau_(tau) {
  if (!(p0 > 0.0 && p0 <= 1.0) || !(pMax > 0.0 && pMax <= 1.0)) {
    throw std::invalid_argument("penalty probabilities must lie in (0, 1]");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("penalty time constant must be positive");
  }
}

PenaltySchedule PenaltySchedule::fromHalfLife(double p0, double pMax,
                                              double halfLife) {
  return PenaltySchedule(p0, pMax, halfLife / std::log(2.0));
}

double PenaltySchedule::pAt(double step) const {
  return pMax_ + (p0_ - pMax_) * std::exp(-step / tau_);
}

double PenaltySchedule::lambdaAt(double step) const {
  return std::log(pAt(step));
}

double PenaltySchedule::halfLife() const { return tau_ * std::log(2.0); }

} // namespace stc
