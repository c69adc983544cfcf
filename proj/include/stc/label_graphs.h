#pragma once

#include <vector>

#include "stc/alphabet.h"
#include "stc/graph.h"

namespace stc {

struct CtcLabelGraph {
  Graph graph; // not grad-enabled
  std::vector<int> target;
};

struct StcLabelGraph {
  Graph graph;
  std::vector<int> partial;
  double lambda = 0.0;
};

// Standard CTC topology for target y: 2U+1 alternating blank/token
// positions, self-loops everywhere, and skip arcs that bypass the blank
// between distinct consecutive tokens (equal consecutive tokens keep the
// mandatory blank). Accepts exactly the alignments that collapse to y under
// "merge repeats, then drop blanks". An empty target yields the blank-only
// acceptor.
CtcLabelGraph buildCtcLabel(const Alphabet& alphabet,
                            const std::vector<int>& target);

// CTC without self-loops on non-blank tokens: each token consumes exactly
// one frame, blanks optionally in between (and no mandatory blank between
// equal consecutive tokens, which distinct frames already separate).
// Collapse semantics: drop blanks only.
CtcLabelGraph buildSelflessCtcLabel(const Alphabet& alphabet,
                                    const std::vector<int>& target);

// Label graph for a partial label under the star collapse (drop blanks
// only): state i has self-loops <b>/0 and <s>\y[i]/lambda, the token arc
// i -> i+1, and the final state has <b>/0 and <s>/lambda self-loops. The
// complement before each token keeps the match deterministic, so no
// alignment is counted twice. lambda == -inf omits the star arcs entirely,
// leaving the selfless-CTC graph.
StcLabelGraph buildStcLabel(const Alphabet& alphabet,
                            const std::vector<int>& partial, double lambda);

} // namespace stc
