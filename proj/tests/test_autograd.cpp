#include <cmath>

#include "doctest.h"
#include "oracles.h"
#include "stc/autograd.h"
#include "stc/emission.h"
#include "stc/label_graphs.h"
#include "stc/losses.h"
#include "stc/shortest.h"

using namespace stc;

namespace {

// forwardScore as a GraphScalarFn for gradCheck
double fwdFn(const Graph& g, Tape* tape) {
  if (tape) {
    auto s = tape->forwardScore(g);
    tape->backward(s);
    return s.value;
  }
  return forwardScore(g);
}

} // namespace

TEST_CASE("forwardScore gradient: single arc gets the full upstream") {
  Graph g(true);
  g.addNode(true);
  g.addNode(false, true);
  g.addArc(0, 1, 0, 0, 0.7);
  Tape tape;
  auto s = tape.forwardScore(g);
  tape.backward(s, 2.5);
  auto grads = tape.gradFor(g);
  REQUIRE(grads.size() == 1);
  CHECK(grads[0] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("forwardScore gradient: equal parallel arcs split evenly") {
  Graph g(true);
  g.addNode(true);
  g.addNode(false, true);
  g.addArc(0, 1, 0, 0, 0.3);
  g.addArc(0, 1, 1, 1, 0.3);
  Tape tape;
  auto s = tape.forwardScore(g);
  tape.backward(s);
  auto grads = tape.gradFor(g);
  CHECK(grads[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(grads[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forwardScore gradients match finite differences on random DAGs") {
  oracle::Rng rng(61);
  int done = 0;
  for (int it = 0; it < 60 && done < 40; ++it) {
    Graph g = oracle::randomDag(rng, 6, 12, 3);
    if (forwardScore(g) == kNegInf) {
      continue;
    }
    g.setGradEnabled(true);
    auto report = gradCheck(fwdFn, g, 1e-5, 1e-4);
    CHECK(report.maxRelError < 1e-4);
    ++done;
  }
  CHECK(done == 40);
}

TEST_CASE("empty language: all gradients zero") {
  Graph g(true);
  g.addNode(true);
  g.addNode(false, true);
  g.addNode(); // dead end
  g.addArc(0, 2, 0, 0, 1.0);
  Tape tape;
  auto s = tape.forwardScore(g);
  CHECK(s.value == kNegInf);
  tape.backward(s);
  auto grads = tape.gradFor(g);
  if (!grads.empty()) {
    CHECK(grads[0] == 0.0);
  }
}

TEST_CASE("arcs off accepting paths and -inf arcs get exactly zero") {
  Graph g(true);
  g.addNode(true);
  g.addNode(false, true);
  g.addNode(); // unreachable from the final state
  g.addArc(0, 1, 0, 0, 0.5);
  g.addArc(0, 2, 1, 1, 0.5);      // leads nowhere
  g.addArc(0, 1, 2, 2, kNegInf);  // forbidden
  Tape tape;
  auto s = tape.forwardScore(g);
  tape.backward(s);
  auto grads = tape.gradFor(g);
  CHECK(grads[0] == doctest::Approx(1.0));
  CHECK(grads[1] == 0.0);
  CHECK(grads[2] == 0.0);
}

TEST_CASE("backward through compose: both source arcs get the output grad") {
  Graph g1(true);
  g1.addNode(true);
  g1.addNode(false, true);
  g1.addArc(0, 1, 0, 1, 0.5);
  Graph g2(true);
  g2.addNode(true);
  g2.addNode(false, true);
  g2.addArc(0, 1, 1, 2, 0.25);

  Tape tape;
  const Graph& lattice = tape.compose(g1, g2);
  auto fwd = tape.forwardScore(lattice);
  auto loss = tape.negate(fwd);
  tape.backward(loss);
  CHECK(tape.gradFor(g1)[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(tape.gradFor(g2)[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fan-out: one g1 arc matched by two g2 arcs accumulates") {
  Graph g1(true);
  g1.addNode(true);
  g1.addNode(false, true);
  g1.addArc(0, 1, 0, 0, 0.0);

  Graph g2(false);
  g2.addNode(true);
  g2.addNode(false, true);
  g2.addArc(0, 1, 0, 0, 0.1);
  g2.addArc(0, 1, 0, 1, 0.4);

  Tape tape;
  const Graph& lattice = tape.compose(g1, g2);
  auto fwd = tape.forwardScore(lattice);
  tape.backward(fwd);
  auto out = tape.gradFor(lattice);
  REQUIRE(out.size() == 2);
  // the single g1 arc collects both output-arc gradients, summing to 1
  CHECK(tape.gradFor(g1)[0] == doctest::Approx(out[0] + out[1]).epsilon(1e-12));
  CHECK(tape.gradFor(g1)[0] == doctest::Approx(1.0).epsilon(1e-12));
  // g2 is not grad-enabled: no entry
  CHECK(tape.gradFor(g2).empty());
}

TEST_CASE("gradCheck on compose pipelines") {
  oracle::Rng rng(71);
  int done = 0;
  for (int it = 0; it < 60 && done < 25; ++it) {
    Graph g1 = oracle::randomDag(rng, 5, 9, 3, true, 0.15);
    Graph g2 = oracle::randomDag(rng, 5, 9, 3, true, 0.15);
    if (forwardScore(compose(g1, g2).graph) == kNegInf) {
      continue;
    }
    g1.setGradEnabled(true);
    auto f = [&](const Graph& g, Tape* tape) {
      if (tape) {
        auto s = tape->forwardScore(tape->compose(g, g2));
        auto loss = tape->negate(s);
        tape->backward(loss);
        return loss.value;
      }
      return -forwardScore(compose(g, g2).graph);
    };
    auto report = gradCheck(f, g1, 1e-5, 1e-4);
    CHECK(report.maxRelError < 1e-4);
    ++done;
  }
  CHECK(done == 25);
}

TEST_CASE("posterior property: frame-cut gradients sum to one") {
  // lattice of a CTC label composed with an emission chain: every path
  // crosses each frame boundary exactly once
  oracle::Rng rng(83);
  for (int it = 0; it < 20; ++it) {
    int frames = rng.uniformInt(2, 6);
    int vocab = rng.uniformInt(2, 3);
    Matrix logProbs = oracle::randomLogProbs(rng, frames, vocab);
    Alphabet alphabet(vocab);
    auto label = buildCtcLabel(
        alphabet, oracle::randomLabel(rng, rng.uniformInt(1, 2), vocab));
    EmissionGraph emission = buildEmission(logProbs, alphabet);

    Tape tape;
    const Graph& lattice = tape.compose(label.graph, emission.graph);
    auto fwd = tape.forwardScore(lattice);
    if (fwd.value == kNegInf) {
      continue;
    }
    tape.backward(fwd);
    auto grads = tape.gradFor(emission.graph);
    REQUIRE(!grads.empty());
    std::vector<double> cutSum(frames, 0.0);
    for (size_t i = 0; i < grads.size(); ++i) {
      CHECK(grads[i] >= -1e-12);
      CHECK(grads[i] <= 1.0 + 1e-12);
      cutSum[emission.arcFrame[i]] += grads[i];
    }
    for (double s : cutSum) {
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("linearity: scaling upstream scales gradients") {
  oracle::Rng rng(97);
  Graph g = oracle::randomDag(rng, 6, 12, 3);
  g.setGradEnabled(true);
  Tape t1;
  auto s1 = t1.forwardScore(g);
  t1.backward(s1, 1.0);
  Tape t2;
  auto s2 = t2.forwardScore(g);
  t2.backward(s2, -3.5);
  auto a = t1.gradFor(g);
  auto b = t2.gradFor(g);
  if (!a.empty()) {
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i] == doctest::Approx(-3.5 * a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradCheck report: identity-score graph has zero error") {
  Graph g(true);
  g.addNode(true);
  g.addNode(false, true);
  g.addArc(0, 1, 0, 0, 0.0);
  auto report = gradCheck(fwdFn, g, 1e-5, 1e-4);
  CHECK(report.arcsChecked == 1);
  CHECK(report.maxRelError < 1e-10);
}
