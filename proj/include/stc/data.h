#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stc/matrix.h"

namespace stc {

// One unsegmented training example. partialLabel is always an
// order-preserving subsequence of fullLabel.
struct Sample {
  std::string id;
  Matrix frames; // T x d
  std::vector<int> fullLabel;
  std::vector<int> partialLabel;
};

enum class DropStrategy {
  Uniform,        // one pDrop for every token
  PerSampleSplit, // samples split into parts, one pDrop per part
  PerTokenSplit   // vocabulary split into parts, one pDrop per part
};

struct DropConfig {
  DropStrategy strategy = DropStrategy::Uniform;
  std::vector<double> pDrop; // size 1 for Uniform, numSplits otherwise
  int numSplits = 1;
  std::uint64_t seed = 0;
  int vocabSize = 0; // required for PerTokenSplit
};

struct SyntheticConfig {
  int vocabSize = 0;
  int numSamples = 0;
  int minLabelLen = 1;
  int maxLabelLen = 1;
  int minFramesPerToken = 1;
  int maxFramesPerToken = 1;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Token sequences with no immediate repeats; each token emits a uniform
// number of frames in range, each frame is the token's one-hot plus
// Gaussian noise (feature dim = vocabSize). Fully deterministic per seed.
std::vector<Sample> generateSynthetic(const SyntheticConfig& cfg);

// Keeps each token with probability 1 - pDrop of its split; drops are keyed
// by (seed, sample id, token index) so the outcome does not depend on
// iteration order. Samples whose partial label comes out empty are pruned.
std::vector<Sample> applyDrop(const std::vector<Sample>& samples,
                              const DropConfig& cfg);

// Per-sample retained fraction |partial| / |full| bucketed into `bins`
// equal-width bins over [0, 1]; the last bin includes 1.0.
std::vector<int> retentionHistogram(const std::vector<Sample>& samples,
                                    int bins);
// CSV form: header + one "bin_lo,bin_hi,count" row per bin.
std::string retentionHistogramCsv(const std::vector<Sample>& samples,
                                  int bins);

// Line-delimited corpus: one sample per line,
//   id <TAB> T d <TAB> full label <TAB> partial label <TAB> frames
// with labels and frames space-separated and frames row-major, printed so
// doubles round-trip exactly. Parse errors name the offending line.
void writeCorpus(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> readCorpus(const std::string& path);
std::string corpusToString(const std::vector<Sample>& samples);
std::vector<Sample> corpusFromString(const std::string& text);

} // namespace stc
