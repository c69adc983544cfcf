#pragma once

#include <vector>

#include "stc/graph.h"

namespace stc {

// State scores from a single topological sweep over finite-weight arcs.
// alpha[s]  = log-sum-exp over all paths from any start state to s
// total     = log-sum-exp of alpha over final states (the forward score)
// Arcs with weight -inf are ignored; a cycle of finite-weight arcs throws.
struct ForwardTable {
  std::vector<double> alpha;
  std::vector<int> topoOrder; // deterministic order used by the sweep
  double total = kNegInf;
};

ForwardTable forwardTable(const Graph& g);

// Log-sum-exp of all start-to-final path weights; -inf for the empty
// language. Throws std::invalid_argument if the graph has a finite-weight
// cycle (the sum would diverge).
double forwardScore(const Graph& g);

// d forwardScore / d arcWeight for every arc, scaled by `upstream`.
// Every gradient is exp(alpha(src) + w + beta(dst) - total) * upstream; arcs
// off all accepting paths (or with weight -inf) get exactly 0. If the forward
// score is -inf all gradients are 0.
std::vector<double> forwardScoreGrad(const Graph& g, double upstream);

} // namespace stc
