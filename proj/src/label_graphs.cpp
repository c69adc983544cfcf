#include "stc/label_graphs.h"

#include <stdexcept>

namespace stc {

CtcLabelGraph buildCtcLabel(const Alphabet& alphabet,
                            const std::vector<int>& target) {
  for (int tok : target) {
    alphabet.checkToken(tok);
  }
  CtcLabelGraph out;
  out.target = target;
  Graph& g = out.graph;
  g.setSymbolSpace(alphabet.symbolSpace());

  int u = static_cast<int>(target.size());
  if (u == 0) {
    g.addNode(true, true);
    g.addArc(0, 0, alphabet.blank());
    return out;
  }
  int positions = 2 * u + 1;
  for (int l = 0; l < positions; ++l) {
    g.addNode(l == 0, l >= positions - 2);
    int label = (l % 2) ? target[(l - 1) / 2] : alphabet.blank();
    g.addArc(l, l, label);
    if (l > 0) {
      g.addArc(l - 1, l, label);
    }
    // skip the blank between distinct consecutive tokens
    if (l % 2 && l > 1 && label != target[(l - 1) / 2 - 1]) {
      g.addArc(l - 2, l, label);
    }
  }
  return out;
}

CtcLabelGraph buildSelflessCtcLabel(const Alphabet& alphabet,
                                    const std::vector<int>& target) {
  for (int tok : target) {
    alphabet.checkToken(tok);
  }
  CtcLabelGraph out;
  out.target = target;
  Graph& g = out.graph;
  g.setSymbolSpace(alphabet.symbolSpace());

  int u = static_cast<int>(target.size());
  for (int s = 0; s <= u; ++s) {
    g.addNode(s == 0, s == u);
  }
  for (int s = 0; s <= u; ++s) {
    g.addArc(s, s, alphabet.blank());
    if (s < u) {
      g.addArc(s, s + 1, target[s]);
    }
  }
  return out;
}

StcLabelGraph buildStcLabel(const Alphabet& alphabet,
                            const std::vector<int>& partial, double lambda) {
  if (!(lambda <= 0.0)) { // also rejects NaN
    throw std::invalid_argument("token insertion penalty must be <= 0");
  }
  for (int tok : partial) {
    alphabet.checkToken(tok);
  }
  StcLabelGraph out;
  out.partial = partial;
  out.lambda = lambda;
  Graph& g = out.graph;
  g.setSymbolSpace(alphabet.symbolSpace());

  bool stars = lambda != kNegInf;
  int u = static_cast<int>(partial.size());
  for (int s = 0; s <= u; ++s) {
    g.addNode(s == 0, s == u);
  }
  for (int s = 0; s <= u; ++s) {
    g.addArc(s, s, alphabet.blank());
    if (stars) {
      int starLabel =
          s < u ? alphabet.complementOf(partial[s]) : alphabet.star();
      g.addArc(s, s, starLabel, lambda);
    }
    if (s < u) {
      g.addArc(s, s + 1, partial[s]);
    }
  }
  return out;
}

} // namespace stc
