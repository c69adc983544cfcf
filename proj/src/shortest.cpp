#include "stc/shortest.h"

#include <stdexcept>

namespace stc {

namespace {

// Kahn's algorithm over finite-weight arcs only. FIFO seeded in state-index
// order, so the returned order is deterministic for a given graph.
std::vector<int> topologicalOrder(const Graph& g) {
  int n = g.numStates();
  std::vector<int> indegree(n, 0);
  for (int i = 0; i < g.numArcs(); ++i) {
    const Arc& a = g.arc(i);
    if (a.weight != kNegInf) {
      ++indegree[a.dst];
    }
  }
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> queue;
  queue.reserve(n);
  for (int s = 0; s < n; ++s) {
    if (indegree[s] == 0) {
      queue.push_back(s);
    }
  }
  for (size_t head = 0; head < queue.size(); ++head) {
    int s = queue[head];
    order.push_back(s);
    for (int ai : g.arcsOut(s)) {
      const Arc& a = g.arc(ai);
      if (a.weight == kNegInf) {
        continue;
      }
      if (--indegree[a.dst] == 0) {
        queue.push_back(a.dst);
      }
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw std::invalid_argument(
        "graph has a finite-weight cycle; forward score would diverge");
  }
  return order;
}

} // namespace

ForwardTable forwardTable(const Graph& g) {
  ForwardTable t;
  t.topoOrder = topologicalOrder(g);
  t.alpha.assign(g.numStates(), kNegInf);
  for (int s : t.topoOrder) {
    double acc = g.isStart(s) ? 0.0 : kNegInf;
    for (int ai : g.arcsIn(s)) {
      const Arc& a = g.arc(ai);
      acc = logAdd(acc, logTimes(t.alpha[a.src], a.weight));
    }
    t.alpha[s] = acc;
  }
  double total = kNegInf;
  for (int s : g.finalStates()) {
    total = logAdd(total, t.alpha[s]);
  }
  t.total = total;
  return t;
}

double forwardScore(const Graph& g) {
  return forwardTable(g).total;
}

std::vector<double> forwardScoreGrad(const Graph& g, double upstream) {
  std::vector<double> grads(g.numArcs(), 0.0);
  if (upstream == 0.0) {
    return grads;
  }
  ForwardTable t = forwardTable(g);
  if (t.total == kNegInf) {
    return grads;
  }
  // beta[s] = log-sum-exp over paths from s to any final state (the empty
  // suffix counts when s itself is final); reverse sweep of the same order.
  std::vector<double> beta(g.numStates(), kNegInf);
  for (auto it = t.topoOrder.rbegin(); it != t.topoOrder.rend(); ++it) {
    int s = *it;
    double acc = g.isFinal(s) ? 0.0 : kNegInf;
    for (int ai : g.arcsOut(s)) {
      const Arc& a = g.arc(ai);
      acc = logAdd(acc, logTimes(a.weight, beta[a.dst]));
    }
    beta[s] = acc;
  }
  for (int i = 0; i < g.numArcs(); ++i) {
    const Arc& a = g.arc(i);
    double logPosterior =
        logTimes(logTimes(t.alpha[a.src], a.weight), beta[a.dst]) - t.total;
    if (logPosterior != kNegInf) {
      grads[i] = std::exp(logPosterior) * upstream;
    }
  }
  return grads;
}

} // namespace stc
