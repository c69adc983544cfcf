#include "stc/compose.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace stc {

namespace {

// Arcs of one g2 state sorted by input label for equal-range lookup.
struct ArcIndex {
  std::vector<int> order; // arc indices sorted by (ilabel, insertion order)
  std::vector<int> labels;

  void build(const Graph& g, int state) {
    auto out = g.arcsOut(state);
    order.assign(out.begin(), out.end());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return g.arc(a).ilabel < g.arc(b).ilabel;
    });
    labels.resize(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
      labels[i] = g.arc(order[i]).ilabel;
    }
  }

  // Matching arc indices in insertion order for a given label.
  std::pair<const int*, const int*> matches(int label) const {
    auto lo = std::lower_bound(labels.begin(), labels.end(), label);
    auto hi = std::upper_bound(lo, labels.end(), label);
    return {order.data() + (lo - labels.begin()),
            order.data() + (hi - labels.begin())};
  }
};

// Composite state key: (g1 state, g2 state, filter).
// filter 0: g1-side epsilon moves still allowed; 1: a g2-side epsilon move
// was taken since the last match, g1-side moves are blocked until one.
std::uint64_t key(int s1, int s2, int filter) {
  return (static_cast<std::uint64_t>(s1) << 33) |
         (static_cast<std::uint64_t>(s2) << 1) |
         static_cast<std::uint64_t>(filter);
}

} // namespace

Composition compose(const Graph& g1, const Graph& g2) {
  if (g1.symbolSpace() >= 0 && g2.symbolSpace() >= 0 &&
      g1.symbolSpace() != g2.symbolSpace()) {
    throw std::invalid_argument(
        "compose: graphs declare different symbol spaces");
  }

  std::vector<ArcIndex> g2Index(g2.numStates());
  std::vector<bool> g2Indexed(g2.numStates(), false);
  auto indexFor = [&](int s2) -> const ArcIndex& {
    if (!g2Indexed[s2]) {
      g2Index[s2].build(g2, s2);
      g2Indexed[s2] = true;
    }
    return g2Index[s2];
  };

  Composition out;
  out.graph.setGradEnabled(g1.gradEnabled() || g2.gradEnabled());

  std::unordered_map<std::uint64_t, int> stateIds;
  struct Pending {
    int s1, s2, filter;
  };
  std::vector<Pending> worklist;

  auto discover = [&](int s1, int s2, int filter) {
    auto [it, inserted] = stateIds.try_emplace(key(s1, s2, filter), 0);
    if (inserted) {
      it->second = out.graph.addNode(
          filter == 0 && g1.isStart(s1) && g2.isStart(s2),
          g1.isFinal(s1) && g2.isFinal(s2));
      worklist.push_back({s1, s2, filter});
    }
    return it->second;
  };

  for (int s1 : g1.startStates()) {
    for (int s2 : g2.startStates()) {
      discover(s1, s2, 0);
    }
  }

  for (size_t head = 0; head < worklist.size(); ++head) {
    Pending cur = worklist[head]; // copy: worklist may reallocate
    int curId = stateIds.at(key(cur.s1, cur.s2, cur.filter));
    const ArcIndex& idx2 = indexFor(cur.s2);

    for (int ai : g1.arcsOut(cur.s1)) {
      const Arc& a = g1.arc(ai);
      if (a.olabel == kEpsilon) {
        if (cur.filter == 0) { // g1-side epsilon move
          int dst = discover(a.dst, cur.s2, 0);
          out.graph.addArc(curId, dst, a.ilabel, kEpsilon, a.weight);
          out.arcSources.push_back({static_cast<std::int32_t>(ai), -1});
        }
        continue;
      }
      auto [lo, hi] = idx2.matches(a.olabel);
      for (const int* p = lo; p != hi; ++p) {
        const Arc& b = g2.arc(*p);
        int dst = discover(a.dst, b.dst, 0);
        out.graph.addArc(curId, dst, a.ilabel, b.olabel,
                         logTimes(a.weight, b.weight));
        out.arcSources.push_back(
            {static_cast<std::int32_t>(ai), static_cast<std::int32_t>(*p)});
      }
    }
    // g2-side epsilon moves, allowed from either filter state
    auto [lo, hi] = idx2.matches(kEpsilon);
    for (const int* p = lo; p != hi; ++p) {
      const Arc& b = g2.arc(*p);
      int dst = discover(cur.s1, b.dst, 1);
      out.graph.addArc(curId, dst, kEpsilon, b.olabel, b.weight);
      out.arcSources.push_back({-1, static_cast<std::int32_t>(*p)});
    }
  }

  if (g1.symbolSpace() >= 0) {
    out.graph.setSymbolSpace(g1.symbolSpace());
  } else if (g2.symbolSpace() >= 0) {
    out.graph.setSymbolSpace(g2.symbolSpace());
  }
  return out;
}

} // namespace stc
