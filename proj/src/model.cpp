#include "stc/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "stc/semiring.h"

namespace stc {

Matrix logSoftmaxRows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (int r = 0; r < scores.rows(); ++r) {
    double lse =
        logSumExp(std::span<const double>(scores.row(r), scores.cols()));
    for (int c = 0; c < scores.cols(); ++c) {
      out.at(r, c) = scores.at(r, c) - lse;
    }
  }
  return out;
}

Matrix logSoftmaxRowsBackward(const Matrix& logProbs,
                              const Matrix& dLogProbs) {
  // y = x - lse(x)  =>  dx_j = dy_j - exp(y_j) * sum_k dy_k
  Matrix out(logProbs.rows(), logProbs.cols());
  for (int r = 0; r < logProbs.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < logProbs.cols(); ++c) {
      sum += dLogProbs.at(r, c);
    }
    for (int c = 0; c < logProbs.cols(); ++c) {
      out.at(r, c) =
          dLogProbs.at(r, c) - std::exp(logProbs.at(r, c)) * sum;
    }
  }
  return out;
}

FrameClassifier::FrameClassifier(const ClassifierConfig& cfg) : cfg_(cfg) {
  if (cfg.inputDim <= 0 || cfg.outputDim <= 0 || cfg.hiddenDim < 0) {
    throw std::invalid_argument("bad classifier dimensions");
  }
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&]() {
    // deterministic across platforms, unlike std::normal_distribution
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0) *
           cfg.initScale;
  };
  auto fill = [&](Matrix& m, int rows, int cols) {
    m = Matrix(rows, cols);
    for (auto& v : m.data()) {
      v = uniform();
    }
  };
  if (cfg.hiddenDim > 0) {
    fill(W1, cfg.hiddenDim, cfg.inputDim);
    b1.assign(cfg.hiddenDim, 0.0);
    fill(W2, cfg.outputDim, cfg.hiddenDim);
  } else {
    fill(W2, cfg.outputDim, cfg.inputDim);
  }
  b2.assign(cfg.outputDim, 0.0);
}

Matrix FrameClassifier::scores(const Matrix& x) const {
  if (x.cols() != cfg_.inputDim) {
    throw std::invalid_argument("input feature dimension mismatch");
  }
  const Matrix* features = &x;
  Matrix hidden;
  if (cfg_.hiddenDim > 0) {
    hidden = Matrix(x.rows(), cfg_.hiddenDim);
    for (int t = 0; t < x.rows(); ++t) {
      for (int h = 0; h < cfg_.hiddenDim; ++h) {
        double acc = b1[h];
        for (int i = 0; i < cfg_.inputDim; ++i) {
          acc += W1.at(h, i) * x.at(t, i);
        }
        hidden.at(t, h) = std::tanh(acc);
      }
    }
    features = &hidden;
  }
  Matrix out(x.rows(), cfg_.outputDim);
  for (int t = 0; t < x.rows(); ++t) {
    for (int k = 0; k < cfg_.outputDim; ++k) {
      double acc = b2[k];
      for (int i = 0; i < features->cols(); ++i) {
        acc += W2.at(k, i) * features->at(t, i);
      }
      out.at(t, k) = acc;
    }
  }
  return out;
}

Matrix FrameClassifier::forward(const Matrix& x) const {
  return logSoftmaxRows(scores(x));
}

ClassifierGrads FrameClassifier::zeroGrads() const {
  ClassifierGrads g;
  if (cfg_.hiddenDim > 0) {
    g.dW1 = Matrix(W1.rows(), W1.cols());
    g.dB1.assign(b1.size(), 0.0);
  }
  g.dW2 = Matrix(W2.rows(), W2.cols());
  g.dB2.assign(b2.size(), 0.0);
  return g;
}

void FrameClassifier::backprop(const Matrix& x, const Matrix& dScores,
                               ClassifierGrads& grads) const {
  if (cfg_.hiddenDim == 0) {
    for (int t = 0; t < x.rows(); ++t) {
      for (int k = 0; k < cfg_.outputDim; ++k) {
        double d = dScores.at(t, k);
        if (d == 0.0) {
          continue;
        }
        grads.dB2[k] += d;
        for (int i = 0; i < cfg_.inputDim; ++i) {
          grads.dW2.at(k, i) += d * x.at(t, i);
        }
      }
    }
    return;
  }
  // recompute the hidden activations; desk-scale models are tiny
  for (int t = 0; t < x.rows(); ++t) {
    std::vector<double> h(cfg_.hiddenDim);
    for (int j = 0; j < cfg_.hiddenDim; ++j) {
      double acc = b1[j];
      for (int i = 0; i < cfg_.inputDim; ++i) {
        acc += W1.at(j, i) * x.at(t, i);
      }
      h[j] = std::tanh(acc);
    }
    std::vector<double> dh(cfg_.hiddenDim, 0.0);
    for (int k = 0; k < cfg_.outputDim; ++k) {
      double d = dScores.at(t, k);
      if (d == 0.0) {
        continue;
      }
      grads.dB2[k] += d;
      for (int j = 0; j < cfg_.hiddenDim; ++j) {
        grads.dW2.at(k, j) += d * h[j];
        dh[j] += d * W2.at(k, j);
      }
    }
    for (int j = 0; j < cfg_.hiddenDim; ++j) {
      double dpre = dh[j] * (1.0 - h[j] * h[j]);
      if (dpre == 0.0) {
        continue;
      }
      grads.dB1[j] += dpre;
      for (int i = 0; i < cfg_.inputDim; ++i) {
        grads.dW1.at(j, i) += dpre * x.at(t, i);
      }
    }
  }
}

void FrameClassifier::backpropLogProbs(const Matrix& x, const Matrix& logProbs,
                                       const Matrix& dLogProbs,
                                       ClassifierGrads& grads) const {
  backprop(x, logSoftmaxRowsBackward(logProbs, dLogProbs), grads);
}

void Adagrad::step(std::vector<double>& params,
                   const std::vector<double>& grads,
                   std::vector<double>& accumulator) const {
  if (accumulator.size() != params.size()) {
    accumulator.assign(params.size(), 0.0);
  }
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    accumulator[i] += g * g;
    params[i] -= lr_ * g / std::sqrt(accumulator[i] + eps_);
  }
}

void Adagrad::step(FrameClassifier& model, const ClassifierGrads& grads) {
  if (model.config().hiddenDim > 0) {
    step(model.W1.data(), grads.dW1.data(), accW1);
    step(model.b1, grads.dB1, accB1);
  }
  step(model.W2.data(), grads.dW2.data(), accW2);
  step(model.b2, grads.dB2, accB2);
}

LetterToWordEncoder::LetterToWordEncoder(
    int letters, int blankLetter, int padLetter,
    const std::vector<std::vector<int>>& words, int maxLen)
    : letters_(letters), maxLen_(maxLen) {
  auto checkLetter = [&](int l) {
    if (l < 0 || l >= letters) {
      throw std::invalid_argument("letter id out of range");
    }
  };
  checkLetter(blankLetter);
  checkLetter(padLetter);

  auto rowFor = [&](const std::vector<int>& seq) {
    if (static_cast<int>(seq.size()) > maxLen) {
      throw std::invalid_argument("word longer than the encoder's max length");
    }
    std::vector<int> cols;
    cols.reserve(maxLen);
    for (int pos = 0; pos < maxLen; ++pos) {
      int letter =
          pos < static_cast<int>(seq.size()) ? seq[pos] : padLetter;
      checkLetter(letter);
      cols.push_back(pos * letters + letter);
    }
    return cols;
  };
  for (const auto& w : words) {
    if (w.empty()) {
      throw std::invalid_argument("empty word in encoder vocabulary");
    }
    rows_.push_back(rowFor(w));
  }
  rows_.push_back(rowFor({blankLetter}));

  e_ = Matrix(static_cast<int>(rows_.size()), letters_ * maxLen_);
  for (size_t r = 0; r < rows_.size(); ++r) {
    for (int c : rows_[r]) {
      e_.at(static_cast<int>(r), c) = 1.0;
    }
  }
}

Matrix LetterToWordEncoder::encode(const Matrix& letterScores) const {
  if (letterScores.cols() != inputDim()) {
    throw std::invalid_argument("letter score layout mismatch");
  }
  Matrix out(letterScores.rows(), outputDim());
  for (int t = 0; t < letterScores.rows(); ++t) {
    for (size_t r = 0; r < rows_.size(); ++r) {
      double acc = 0.0;
      for (int c : rows_[r]) {
        acc += letterScores.at(t, c);
      }
      out.at(t, static_cast<int>(r)) = acc;
    }
  }
  return out;
}

Matrix LetterToWordEncoder::backward(const Matrix& dOut) const {
  if (dOut.cols() != outputDim()) {
    throw std::invalid_argument("word score layout mismatch");
  }
  Matrix dIn(dOut.rows(), inputDim());
  for (int t = 0; t < dOut.rows(); ++t) {
    for (size_t r = 0; r < rows_.size(); ++r) {
      double d = dOut.at(t, static_cast<int>(r));
      if (d == 0.0) {
        continue;
      }
      for (int c : rows_[r]) {
        dIn.at(t, c) += d;
      }
    }
  }
  return dIn;
}

std::vector<int> greedyDecode(const Matrix& logProbs, CollapseMode mode) {
  int blank = logProbs.cols() - 1;
  std::vector<int> best(logProbs.rows());
  for (int t = 0; t < logProbs.rows(); ++t) {
    int arg = 0;
    for (int k = 1; k < logProbs.cols(); ++k) {
      if (logProbs.at(t, k) > logProbs.at(t, arg)) {
        arg = k;
      }
    }
    best[t] = arg;
  }
  std::vector<int> out;
  int prev = -1;
  for (int s : best) {
    if (mode == CollapseMode::Ctc) {
      if (s != prev && s != blank) {
        out.push_back(s);
      }
      prev = s;
    } else if (s != blank) {
      out.push_back(s);
    }
  }
  return out;
}

int editDistance(const std::vector<int>& hyp, const std::vector<int>& ref) {
  size_t n = hyp.size(), m = ref.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) {
    prev[j] = static_cast<int>(j);
  }
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double editDistanceRate(const std::vector<int>& hyp,
                        const std::vector<int>& ref) {
  return static_cast<double>(editDistance(hyp, ref)) /
         std::max<size_t>(1, ref.size());
}

} // namespace stc
