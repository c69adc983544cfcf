#pragma once

#include <vector>

#include "stc/alphabet.h"
#include "stc/graph.h"
#include "stc/matrix.h"

namespace stc {

// Linear-chain acceptor over T frames: states 0..T, one arc per emitted
// symbol per frame, weight = that symbol's log-probability. The emission
// graph borrows the log-probability matrix it was built from; keep the
// matrix alive for the graph's lifetime.
//
// Arc metadata maps every arc back to the matrix for gradient scatter:
// column >= 0 is a direct entry (token or blank); kStarColumn is the star
// arc; complementColumn(t) is the arc for <s>\t.
class EmissionGraph {
 public:
  static constexpr int kStarColumn = -1;
  static int complementColumn(int token) { return -2 - token; }
  static bool isComplementColumn(int col) { return col <= -2; }
  static int complementTokenOf(int col) { return -2 - col; }

  EmissionGraph(Alphabet alphabet, const Matrix* logProbs, int frames)
      : alphabet_(alphabet), logProbs_(logProbs), frames_(frames) {}

  Graph graph;                 // grad-enabled chain acceptor
  std::vector<int> arcFrame;   // parallel to graph arcs
  std::vector<int> arcColumn;  // parallel to graph arcs

  const Alphabet& alphabet() const { return alphabet_; }
  const Matrix& logProbs() const { return *logProbs_; }
  int frames() const { return frames_; }

 private:
  Alphabet alphabet_;
  const Matrix* logProbs_;
  int frames_;
};

// Builds the emission graph from a T x K matrix of log-probabilities over
// the vocabulary plus blank (column layout: tokens 0..V-1, blank V). Every
// row must be a log-distribution: log-sum-exp within 1e-6 of 0.
//
// With `tokenSubset` non-null only those tokens (plus blank) get arcs; the
// accepted language shrinks but every surviving weight is unchanged. This is
// the reduced-alphabet mode: label graphs over the subset compose
// identically, and gradient scatter still targets the full matrix.
EmissionGraph buildEmission(const Matrix& logProbs, const Alphabet& alphabet,
                            const std::vector<int>* tokenSubset = nullptr);

// Adds one <s> arc per frame plus one <s>\t arc per requested token, with
//   weight(<s>)   = log sum_{y in A} exp(logProbs[t][y])
//   weight(<s>\t) = log sum_{y in A, y != t} exp(logProbs[t][y])
// (sums over the vocabulary only; blank keeps its own arcs). Gradients of a
// star arc distribute over its constituent tokens by softmax responsibility.
EmissionGraph augmentStars(const EmissionGraph& e,
                           const std::vector<int>& neededComplements);

// Scatters per-arc gradients of the (possibly augmented, possibly reduced)
// emission graph back into a T x K matrix aligned with the input
// log-probabilities, applying the log-sum-exp chain rule for star arcs.
void scatterEmissionGradients(const EmissionGraph& e,
                              std::span<const double> arcGrads, Matrix& out);

} // namespace stc
