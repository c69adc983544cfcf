#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stc/matrix.h"

namespace stc {

// log-softmax per row; each output row log-sum-exps to 0.
Matrix logSoftmaxRows(const Matrix& scores);
// Backward of logSoftmaxRows: dScores from dLogProbs.
Matrix logSoftmaxRowsBackward(const Matrix& logProbs, const Matrix& dLogProbs);

struct ClassifierConfig {
  int inputDim = 0;
  int outputDim = 0;
  int hiddenDim = 0; // 0 = plain affine map; > 0 adds one tanh layer
  double initScale = 0.1;
  std::uint64_t seed = 0;
};

struct ClassifierGrads {
  Matrix dW1, dW2;
  std::vector<double> dB1, dB2;
};

// Frame-wise classifier: affine map (optionally through one tanh hidden
// layer), log-softmax applied per frame. Gradients are hand-derived.
class FrameClassifier {
 public:
  explicit FrameClassifier(const ClassifierConfig& cfg);

  // T x inputDim -> T x outputDim raw scores (pre-softmax).
  Matrix scores(const Matrix& x) const;
  // T x inputDim -> T x outputDim log-probabilities.
  Matrix forward(const Matrix& x) const;

  // Backprop of raw scores: accumulate parameter gradients for dScores.
  void backprop(const Matrix& x, const Matrix& dScores,
                ClassifierGrads& grads) const;
  // Convenience: forward() gradients, i.e. dScores = logsoftmax-backward.
  void backpropLogProbs(const Matrix& x, const Matrix& logProbs,
                        const Matrix& dLogProbs, ClassifierGrads& grads) const;

  ClassifierGrads zeroGrads() const;
  const ClassifierConfig& config() const { return cfg_; }

  // Parameters, exposed for the optimizer and checkpoints.
  Matrix W1, W2;              // hidden x input, output x (hidden|input)
  std::vector<double> b1, b2; // hidden, output

 private:
  ClassifierConfig cfg_;
};

// Adagrad: theta -= lr * g / sqrt(acc + eps), acc += g^2.
// Accumulators never decrease.
class Adagrad {
 public:
  Adagrad(double learningRate, double epsilon = 1e-8)
      : lr_(learningRate), eps_(epsilon) {}

  void step(FrameClassifier& model, const ClassifierGrads& grads);
  void step(std::vector<double>& params, const std::vector<double>& grads,
            std::vector<double>& accumulator) const;

  double learningRate() const { return lr_; }
  void setLearningRate(double lr) { lr_ = lr; }
  double epsilon() const { return eps_; }

  // Per-tensor accumulated squared gradients (sized on first step).
  std::vector<double> accW1, accW2, accB1, accB2;

 private:
  double lr_;
  double eps_;
};

// Fixed 0/1 matrix mapping per-frame letter scores, laid out as maxLen
// one-hot blocks over the letter alphabet, to word scores plus a blank row.
// Words shorter than maxLen are padded with the pad letter; the blank row is
// the blank letter followed by pads. Exactly maxLen ones per row.
class LetterToWordEncoder {
 public:
  // letters: size of the letter alphabet including blank and pad letters.
  // blankLetter/padLetter index into that alphabet. words[i] lists letter
  // ids; row i of the output scores word i, the last row scores blank.
  LetterToWordEncoder(int letters, int blankLetter, int padLetter,
                      const std::vector<std::vector<int>>& words,
                      int maxLen = 20);

  // T x (letters*maxLen) -> T x (numWords+1)
  Matrix encode(const Matrix& letterScores) const;
  // dOut -> dLetterScores (transpose product; the encoder is linear).
  Matrix backward(const Matrix& dOut) const;

  int inputDim() const { return letters_ * maxLen_; }
  int outputDim() const { return static_cast<int>(rows_.size()); }
  const Matrix& matrix() const { return e_; }

 private:
  int letters_;
  int maxLen_;
  std::vector<std::vector<int>> rows_; // per output row: the set columns
  Matrix e_;
};

// Per-frame argmax (ties to the lowest id), then collapse.
enum class CollapseMode {
  Ctc, // merge consecutive repeats, then drop blanks
  Stc  // drop blanks only
};
std::vector<int> greedyDecode(const Matrix& logProbs, CollapseMode mode);

// Levenshtein distance over token sequences, divided by max(1, |ref|).
double editDistanceRate(const std::vector<int>& hyp,
                        const std::vector<int>& ref);
int editDistance(const std::vector<int>& hyp, const std::vector<int>& ref);

} // namespace stc
