#include "stc/emission.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stc {

namespace {

constexpr double kRowTolerance = 1e-6;

void checkRows(const Matrix& logProbs, const Alphabet& alphabet) {
  if (logProbs.rows() == 0) {
    throw std::invalid_argument("emission graph needs at least one frame");
  }
  if (logProbs.cols() != alphabet.numClasses()) {
    throw std::invalid_argument(
        "log-probability matrix has " + std::to_string(logProbs.cols()) +
        " columns, alphabet expects " +
        std::to_string(alphabet.numClasses()));
  }
  for (int t = 0; t < logProbs.rows(); ++t) {
    double lse = logSumExp(
        std::span<const double>(logProbs.row(t), logProbs.cols()));
    if (std::abs(lse) > kRowTolerance) {
      throw std::invalid_argument(
          "frame " + std::to_string(t) +
          " is not a log-distribution (log-sum-exp = " + std::to_string(lse) +
          ")");
    }
  }
}

} // namespace

EmissionGraph buildEmission(const Matrix& logProbs, const Alphabet& alphabet,
                            const std::vector<int>* tokenSubset) {
  checkRows(logProbs, alphabet);
  int frames = logProbs.rows();

  EmissionGraph e(alphabet, &logProbs, frames);
  e.graph.setGradEnabled(true);
  e.graph.setSymbolSpace(alphabet.symbolSpace());
  for (int s = 0; s <= frames; ++s) {
    e.graph.addNode(s == 0, s == frames);
  }
  auto addDirect = [&](int t, int column) {
    e.graph.addArc(t, t + 1, column, logProbs.at(t, column));
    e.arcFrame.push_back(t);
    e.arcColumn.push_back(column);
  };
  for (int t = 0; t < frames; ++t) {
    if (tokenSubset) {
      for (int tok : *tokenSubset) {
        alphabet.checkToken(tok);
        addDirect(t, tok);
      }
    } else {
      for (int tok = 0; tok < alphabet.vocabSize(); ++tok) {
        addDirect(t, tok);
      }
    }
    addDirect(t, alphabet.blank());
  }
  return e;
}

EmissionGraph augmentStars(const EmissionGraph& e,
                           const std::vector<int>& neededComplements) {
  const Alphabet& alphabet = e.alphabet();
  for (int tok : neededComplements) {
    alphabet.checkToken(tok);
  }
  const Matrix& logProbs = e.logProbs();

  EmissionGraph out = e;
  for (int t = 0; t < e.frames(); ++t) {
    // Full-vocabulary mass regardless of any token subset in the graph.
    double starMass = logSumExp(
        std::span<const double>(logProbs.row(t), alphabet.vocabSize()));
    out.graph.addArc(t, t + 1, alphabet.star(), starMass);
    out.arcFrame.push_back(t);
    out.arcColumn.push_back(EmissionGraph::kStarColumn);
    for (int tok : neededComplements) {
      out.graph.addArc(t, t + 1, alphabet.complementOf(tok),
                       logDiffExp(starMass, logProbs.at(t, tok)));
      out.arcFrame.push_back(t);
      out.arcColumn.push_back(EmissionGraph::complementColumn(tok));
    }
  }
  return out;
}

void scatterEmissionGradients(const EmissionGraph& e,
                              std::span<const double> arcGrads, Matrix& out) {
  const Matrix& logProbs = e.logProbs();
  int vocab = e.alphabet().vocabSize();
  if (!out.sameShape(logProbs)) {
    out = Matrix(logProbs.rows(), logProbs.cols());
  }
  if (arcGrads.empty()) {
    return;
  }

  // Star and complement contributions factor per frame:
  //   d w_star / d p_y = exp(p_y - w_star)
  // so each frame accumulates sum_arcs g * exp(-w) once, plus a per-token
  // correction for the excluded token of each complement arc.
  std::vector<double> starFactor(e.frames(), 0.0);
  std::vector<std::vector<std::pair<int, double>>> corrections(e.frames());

  for (size_t i = 0; i < arcGrads.size(); ++i) {
    double g = arcGrads[i];
    if (g == 0.0) {
      continue;
    }
    int frame = e.arcFrame[i];
    int col = e.arcColumn[i];
    if (col >= 0) {
      out.at(frame, col) += g;
      continue;
    }
    double w = e.graph.weight(i);
    if (w == kNegInf) {
      continue;
    }
    double scaled = g * std::exp(-w);
    starFactor[frame] += scaled;
    if (EmissionGraph::isComplementColumn(col)) {
      corrections[frame].emplace_back(EmissionGraph::complementTokenOf(col),
                                      scaled);
    }
  }

  for (int t = 0; t < e.frames(); ++t) {
    if (starFactor[t] == 0.0 && corrections[t].empty()) {
      continue;
    }
    double f = starFactor[t];
    if (f != 0.0) {
      for (int y = 0; y < vocab; ++y) {
        out.at(t, y) += std::exp(logProbs.at(t, y)) * f;
      }
    }
    // undo each complement's share at its excluded token
    for (const auto& [tok, scaled] : corrections[t]) {
      out.at(t, tok) -= std::exp(logProbs.at(t, tok)) * scaled;
    }
  }
}

} // namespace stc
