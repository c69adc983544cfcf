#pragma once

#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "stc/compose.h"
#include "stc/graph.h"

namespace stc {

// Accumulated gradients of a scalar loss with respect to arc weights, keyed
// by graph identity. Arcs that lie on no accepting path stay exactly 0.
class GradStore {
 public:
  void add(const Graph& g, int arcIdx, double v);
  void addAll(const Graph& g, std::span<const double> arcGrads);
  bool has(const Graph& g) const;
  // Per-arc gradients; empty span if the graph never received any.
  std::span<const double> gradsFor(const Graph& g) const;
  void clear() { perGraph_.clear(); }

 private:
  std::unordered_map<std::uint64_t, std::vector<double>> perGraph_;
};

// Reverse-mode differentiation of a scalar built from graph operations.
// Records compose / forwardScore / negate in execution order; backward()
// visits the records exactly once in reverse. Input graphs are captured by
// reference and must outlive the tape. One tape per training example;
// independent tapes may run on different threads.
class Tape {
 public:
  struct Scalar {
    double value;
    int idx;
  };

  // Composes a and b, keeping arc provenance for the backward scatter.
  // The result lives as long as the tape.
  const Graph& compose(const Graph& a, const Graph& b);
  Scalar forwardScore(const Graph& g);
  Scalar negate(Scalar s);

  // Seeds d(loss)/d(loss) = upstream and propagates to every grad-enabled
  // input graph. May be called once per recorded computation.
  void backward(Scalar loss, double upstream = 1.0);

  const GradStore& grads() const { return grads_; }
  std::span<const double> gradFor(const Graph& g) const {
    return grads_.gradsFor(g);
  }

 private:
  enum class OpKind { Compose, ForwardScore, Negate };
  struct Record {
    OpKind kind;
    const Graph* in1 = nullptr;
    const Graph* in2 = nullptr;
    const Composition* comp = nullptr; // Compose: output + provenance
    int inScalar = -1;
    int outScalar = -1;
  };

  int addScalar(double v) {
    scalarValues_.push_back(v);
    return static_cast<int>(scalarValues_.size()) - 1;
  }

  std::vector<Record> records_;
  std::deque<Composition> owned_; // deque: stable addresses
  std::vector<double> scalarValues_;
  GradStore grads_;
};

// Max relative error between tape gradients and central finite differences
// over every finite-weight arc of g.
struct GradCheckReport {
  double maxRelError = 0.0;
  int arcsChecked = 0;
  int worstArc = -1;
  bool pass(double tol) const { return maxRelError <= tol; }
};

// f must evaluate the same scalar both ways: routed through `tape` when one
// is given (recording the ops and calling tape->backward on its result), and
// directly otherwise. The graph is perturbed in place and restored.
using GraphScalarFn = std::function<double(const Graph&, Tape*)>;

GradCheckReport gradCheck(const GraphScalarFn& f, Graph& g, double h,
                          double tol);

} // namespace stc
