#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stc/data.h"
#include "stc/losses.h"
#include "stc/model.h"

namespace stc {

enum class LossKind { Ctc, SelflessCtc, Stc };

std::string lossKindName(LossKind k);
LossKind lossKindFromName(const std::string& name);

struct TrainConfig {
  LossKind loss = LossKind::Ctc;
  // token insertion penalty schedule (STC only)
  double p0 = 0.5;
  double pMax = 0.9;
  double tHalf = 10000;
  double learningRate = 0.5;
  int batchSize = 8;
  std::uint64_t seed = 1;
  bool reducedAlphabet = true;
  int threads = 1;
  int hiddenDim = 0;
  double initScale = 0.01;
  int vocabSize = 0;
  CollapseMode decode = CollapseMode::Ctc;
};

struct EpochMetrics {
  int epoch = 0;       // 1-based
  double loss = 0.0;   // mean finite per-sample training loss
  double ter = 0.0;    // greedy-decode token error rate on the dev split
  double lambda = 0.0; // penalty at the first step of the epoch (STC)
  double seconds = 0.0;
  int skipped = 0; // samples with no valid alignment
};

// Reference training loop: frame classifier on CPU, per-sample losses over
// WFST lattices (optionally on a worker pool), gradients reduced in sample
// order so results are identical for any thread count, Adagrad updates per
// batch.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  EpochMetrics runEpoch(const std::vector<Sample>& train,
                        const std::vector<Sample>& dev);

  // Corpus-level TER: total edit distance over total reference length.
  double evaluateTer(const std::vector<Sample>& samples) const;
  // Mean finite loss without updating anything.
  double evaluateLoss(const std::vector<Sample>& samples) const;

  const TrainConfig& config() const { return cfg_; }
  const FrameClassifier& model() const { return model_; }
  FrameClassifier& model() { return model_; }
  int stepsDone() const { return steps_; }
  int epochsDone() const { return epochsDone_; }
  double currentLambda() const;

  void saveCheckpoint(const std::string& path) const;
  static Trainer loadCheckpoint(const std::string& path);

 private:
  LossResult sampleLoss(const Matrix& logProbs, const Sample& s,
                        double lambda) const;

  TrainConfig cfg_;
  FrameClassifier model_;
  Adagrad optimizer_;
  int steps_ = 0;
  int epochsDone_ = 0;
};

} // namespace stc
