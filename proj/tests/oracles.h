// Independent reference implementations used only by tests. Everything here
// deliberately avoids the library's graph/lattice code paths: losses come
// from direct dynamic programming or exhaustive enumeration, gradients from
// finite differences.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stc/graph.h"
#include "stc/losses.h"
#include "stc/matrix.h"

namespace stc::oracle {

struct PathInfo {
  std::vector<int> ilabels; // epsilon-stripped
  std::vector<int> olabels;
  double weight;
};

// Every accepting path by depth-first search. Throws if more than maxPaths
// accepting paths exist (guards against accidental cycles).
std::vector<PathInfo> enumeratePaths(const Graph& g, size_t maxPaths = 200000);

// Log-sum-exp over all accepting path weights, from the enumeration.
double bruteForwardScore(const Graph& g, size_t maxPaths = 200000);

// The composed relation by brute force: for every pair of paths whose inner
// label sequences match, the (input, output) string pair accumulates
// w1 + w2. Keys are epsilon-stripped label sequences.
using Relation = std::map<std::pair<std::vector<int>, std::vector<int>>, double>;
Relation bruteComposeRelation(const Graph& g1, const Graph& g2);
Relation pathRelation(const Graph& g);

// Classic CTC forward-backward over the extended label sequence; no graphs
// anywhere. Returns the loss and d(loss)/d(logProbs).
LossResult dpCtcLoss(const Matrix& logProbs, const std::vector<int>& target);

// STC loss by exhaustive enumeration of every length-T string over the
// vocabulary plus blank. A string is scored by the deterministic leftmost
// matcher implied by the label regex: the next partial token must be taken
// when it appears, any other token costs lambda, blanks are free filler.
double bruteStcLoss(const Matrix& logProbs, const std::vector<int>& partial,
                    double lambda);
// Same enumeration for plain / selfless CTC collapse semantics.
double bruteCtcLoss(const Matrix& logProbs, const std::vector<int>& target);
double bruteSelflessCtcLoss(const Matrix& logProbs,
                            const std::vector<int>& target);

// Central finite differences of a scalar function of a matrix.
Matrix finiteDifferenceGrad(const std::function<double(const Matrix&)>& f,
                            Matrix x, double h = 1e-5);

double maxAbsDifference(const Matrix& a, const Matrix& b);
// |a-b| / max(1, |a|, |b|), maximized over entries.
double maxRelDifference(const Matrix& a, const Matrix& b);

// Deterministic random instances shared by property tests.
struct Rng {
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  int uniformInt(int lo, int hi); // inclusive
  double uniformReal(double lo, double hi);
  std::uint64_t state;
};

// Random log-softmax-normalized T x (vocab+1) matrix.
Matrix randomLogProbs(Rng& rng, int frames, int vocab);
// Random token sequence, optionally with no immediate repeats.
std::vector<int> randomLabel(Rng& rng, int len, int vocab,
                             bool noRepeats = false);
// Random acyclic acceptor/transducer: arcs only go forward in state order.
Graph randomDag(Rng& rng, int maxStates, int maxArcs, int numLabels,
                bool transducer = false, double epsilonProb = 0.0);

} // namespace stc::oracle
