#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "stc/semiring.h"

namespace stc {

// Label value for an arc that consumes no input / produces no output.
inline constexpr int kEpsilon = -1;

struct Arc {
  int src;
  int dst;
  int ilabel;
  int olabel;
  double weight;
};

// A weighted finite-state transducer in the log semiring.
//
// Arcs are stored flat in insertion order and grouped per source state, so
// iteration order (and therefore floating-point summation order) is
// deterministic. Graphs are immutable once handed to other operations; any
// number of threads may then read them concurrently.
class Graph {
 public:
  explicit Graph(bool gradEnabled = false)
      : gradEnabled_(gradEnabled), id_(nextId()) {}

  // Copies are distinct graphs for gradient bookkeeping; moves keep identity.
  Graph(const Graph& other)
      : numStates_(other.numStates_),
        arcs_(other.arcs_),
        outArcs_(other.outArcs_),
        inArcs_(other.inArcs_),
        startFlags_(other.startFlags_),
        finalFlags_(other.finalFlags_),
        startStates_(other.startStates_),
        finalStates_(other.finalStates_),
        gradEnabled_(other.gradEnabled_),
        symbolSpace_(other.symbolSpace_),
        id_(nextId()) {}
  Graph& operator=(const Graph& other) {
    if (this != &other) {
      Graph tmp(other);
      *this = std::move(tmp);
    }
    return *this;
  }
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  int addNode(bool start = false, bool final_ = false) {
    int s = numStates_++;
    outArcs_.emplace_back();
    inArcs_.emplace_back();
    startFlags_.push_back(start);
    finalFlags_.push_back(final_);
    if (start) {
      startStates_.push_back(s);
    }
    if (final_) {
      finalStates_.push_back(s);
    }
    return s;
  }

  int addArc(int src, int dst, int ilabel, int olabel, double weight = 0.0) {
    checkState(src);
    checkState(dst);
    int idx = static_cast<int>(arcs_.size());
    arcs_.push_back(Arc{src, dst, ilabel, olabel, weight});
    outArcs_[src].push_back(idx);
    inArcs_[dst].push_back(idx);
    return idx;
  }

  // Acceptor arc: output label mirrors the input label.
  int addArc(int src, int dst, int label, double weight = 0.0) {
    return addArc(src, dst, label, label, weight);
  }

  int numStates() const { return numStates_; }
  int numArcs() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(int i) const { return arcs_[i]; }
  double weight(int i) const { return arcs_[i].weight; }

  // Only for construction and finite-difference probing; not thread-safe.
  void setWeight(int i, double w) { arcs_[i].weight = w; }

  std::span<const int> arcsOut(int state) const { return outArcs_[state]; }
  std::span<const int> arcsIn(int state) const { return inArcs_[state]; }

  bool isStart(int s) const { return startFlags_[s]; }
  bool isFinal(int s) const { return finalFlags_[s]; }
  std::span<const int> startStates() const { return startStates_; }
  std::span<const int> finalStates() const { return finalStates_; }

  bool gradEnabled() const { return gradEnabled_; }
  void setGradEnabled(bool v) { gradEnabled_ = v; }

  // Symbol-space size shared by composition operands; -1 when unconstrained.
  int symbolSpace() const { return symbolSpace_; }
  void setSymbolSpace(int n) { symbolSpace_ = n; }

  // Stable identity used by gradient stores. Copies get fresh ids.
  std::uint64_t id() const { return id_; }

 private:
  static std::uint64_t nextId() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }
  void checkState(int s) const;

  int numStates_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> outArcs_;
  std::vector<std::vector<int>> inArcs_;
  std::vector<bool> startFlags_;
  std::vector<bool> finalFlags_;
  std::vector<int> startStates_;
  std::vector<int> finalStates_;
  bool gradEnabled_ = false;
  int symbolSpace_ = -1;
  std::uint64_t id_;
};

// Negation of a forward score; -inf maps to +inf (zero-probability label).
inline double negate(double s) { return -s; }

} // namespace stc
