// Command-line front end: dataset creation, training, evaluation, label
// graph inspection and CTC/STC timing comparison.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "stc/alphabet.h"
#include "stc/data.h"
#include "stc/io.h"
#include "stc/label_graphs.h"
#include "stc/losses.h"
#include "stc/model.h"
#include "stc/trainer.h"

namespace fs = std::filesystem;
using namespace stc;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void writeFile(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  f << content;
  if (!f) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

std::vector<int> parseLabel(const std::string& text, const Alphabet& alphabet) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'z') {
      out.push_back(tok[0] - 'a');
    } else {
      out.push_back(std::stoi(tok));
    }
    alphabet.checkToken(out.back());
  }
  return out;
}

struct MakeDataArgs {
  int vocab = 30;
  int numSamples = 2000;
  int devSamples = 200;
  int lenMin = 3, lenMax = 8;
  int framesMin = 1, framesMax = 3;
  double noise = 0.3;
  std::uint64_t seed = 1;
  std::string strategy = "uniform";
  std::vector<double> pDrop{0.0};
  int histogramBins = 20;
  std::string outDir = "data";
};

int cmdMakeData(const MakeDataArgs& a) {
  SyntheticConfig gen;
  gen.vocabSize = a.vocab;
  gen.numSamples = a.numSamples + a.devSamples;
  gen.minLabelLen = a.lenMin;
  gen.maxLabelLen = a.lenMax;
  gen.minFramesPerToken = a.framesMin;
  gen.maxFramesPerToken = a.framesMax;
  gen.noise = a.noise;
  gen.seed = a.seed;
  auto all = generateSynthetic(gen);

  std::vector<Sample> train(all.begin(), all.begin() + a.numSamples);
  std::vector<Sample> dev(all.begin() + a.numSamples, all.end());

  DropConfig drop;
  drop.seed = a.seed;
  drop.pDrop = a.pDrop;
  drop.vocabSize = a.vocab;
  if (a.strategy == "uniform") {
    drop.strategy = DropStrategy::Uniform;
    if (a.pDrop.size() != 1) {
      std::cerr << "uniform strategy takes exactly one --p-drop value\n";
      return kExitConfigError;
    }
  } else if (a.strategy == "per-sample-split") {
    drop.strategy = DropStrategy::PerSampleSplit;
    drop.numSplits = static_cast<int>(a.pDrop.size());
  } else if (a.strategy == "per-token-split") {
    drop.strategy = DropStrategy::PerTokenSplit;
    drop.numSplits = static_cast<int>(a.pDrop.size());
  } else {
    std::cerr << "unknown strategy '" << a.strategy << "'\n";
    return kExitConfigError;
  }
  auto corrupted = applyDrop(train, drop);
  if (corrupted.empty()) {
    std::cerr << "all samples were pruned (every partial label is empty); "
                 "nothing to write\n";
    return kExitDataError;
  }

  fs::create_directories(a.outDir);
  writeCorpus(corrupted, (fs::path(a.outDir) / "train.corpus").string());
  writeCorpus(dev, (fs::path(a.outDir) / "dev.corpus").string());
  writeFile(fs::path(a.outDir) / "retention.csv",
            retentionHistogramCsv(corrupted, a.histogramBins));

  std::ostringstream cfg;
  cfg << "vocab=" << a.vocab << "\ntrain_samples=" << corrupted.size()
      << "\ndev_samples=" << dev.size() << "\nlen=" << a.lenMin << ".."
      << a.lenMax << "\nframes_per_token=" << a.framesMin << ".."
      << a.framesMax << "\nnoise=" << fmt(a.noise) << "\nseed=" << a.seed
      << "\nstrategy=" << a.strategy << "\np_drop=";
  for (size_t i = 0; i < a.pDrop.size(); ++i) {
    cfg << (i ? "," : "") << fmt(a.pDrop[i]);
  }
  cfg << "\n";
  writeFile(fs::path(a.outDir) / "config.txt", cfg.str());

  std::cout << "wrote " << corrupted.size() << " train / " << dev.size()
            << " dev samples to " << a.outDir << "\n";
  return 0;
}

struct TrainArgs {
  std::string trainPath;
  std::string devPath;
  std::string outDir = "run";
  std::string resumeFrom;
  TrainConfig cfg;
  int epochs = 10;
  std::string lossName = "ctc";
  std::string decodeName = "ctc";
};

int runTraining(Trainer& trainer, const TrainArgs& a,
                const std::vector<Sample>& train,
                const std::vector<Sample>& dev, std::ostream& metricsOut) {
  for (int e = trainer.epochsDone(); e < a.epochs; ++e) {
    EpochMetrics m = trainer.runEpoch(train, dev);
    std::ostringstream row;
    row << m.epoch << ",dev," << fmt(m.loss) << "," << fmt(m.ter) << ","
        << fmt(m.lambda) << "," << fmt(m.seconds);
    metricsOut << row.str() << "\n";
    metricsOut.flush();
    std::cout << "epoch " << m.epoch << " loss " << fmt(m.loss) << " ter "
              << fmt(m.ter) << " lambda " << fmt(m.lambda) << " ("
              << fmt(m.seconds) << "s";
    if (m.skipped > 0) {
      std::cout << ", " << m.skipped << " unalignable";
    }
    std::cout << ")\n";
    trainer.saveCheckpoint(
        (fs::path(a.outDir) / "checkpoint.txt").string());
  }
  return 0;
}

int cmdTrain(const TrainArgs& argsIn) {
  TrainArgs a = argsIn;
  auto train = readCorpus(a.trainPath);
  if (train.empty()) {
    std::cerr << "training corpus is empty\n";
    return kExitDataError;
  }
  std::vector<Sample> dev;
  if (!a.devPath.empty()) {
    dev = readCorpus(a.devPath);
  }

  fs::create_directories(a.outDir);
  fs::path metricsPath = fs::path(a.outDir) / "metrics.csv";

  if (!a.resumeFrom.empty()) {
    Trainer trainer = Trainer::loadCheckpoint(a.resumeFrom);
    std::ofstream metrics(metricsPath, std::ios::app);
    return runTraining(trainer, a, train, dev, metrics);
  }

  a.cfg.loss = lossKindFromName(a.lossName);
  a.cfg.decode =
      a.decodeName == "stc" ? CollapseMode::Stc : CollapseMode::Ctc;
  a.cfg.vocabSize = train[0].frames.cols();
  Trainer trainer(a.cfg);

  std::ostringstream resolved;
  resolved << "loss=" << a.lossName << "\nvocab=" << a.cfg.vocabSize
           << "\nlr=" << fmt(a.cfg.learningRate)
           << "\nbatch=" << a.cfg.batchSize << "\nepochs=" << a.epochs
           << "\nseed=" << a.cfg.seed << "\np0=" << fmt(a.cfg.p0)
           << "\np_max=" << fmt(a.cfg.pMax)
           << "\nt_half=" << fmt(a.cfg.tHalf)
           << "\nreduced_alphabet=" << (a.cfg.reducedAlphabet ? 1 : 0)
           << "\nhidden=" << a.cfg.hiddenDim << "\ndecode=" << a.decodeName
           << "\nthreads=" << a.cfg.threads << "\n";
  writeFile(fs::path(a.outDir) / "config.txt", resolved.str());

  std::ofstream metrics(metricsPath);
  metrics << "epoch,split,loss,ter,lambda,seconds\n";
  return runTraining(trainer, a, train, dev, metrics);
}

int cmdEval(const std::string& dataPath, const std::string& checkpointPath,
            const std::string& decodeName) {
  auto samples = readCorpus(dataPath);
  if (samples.empty()) {
    std::cerr << "evaluation corpus is empty\n";
    return kExitDataError;
  }
  Trainer trainer = Trainer::loadCheckpoint(checkpointPath);
  long long edits = 0, refLen = 0;
  CollapseMode mode =
      decodeName == "stc" ? CollapseMode::Stc : CollapseMode::Ctc;
  for (const Sample& s : samples) {
    auto hyp = greedyDecode(trainer.model().forward(s.frames), mode);
    edits += editDistance(hyp, s.fullLabel);
    refLen += static_cast<long long>(s.fullLabel.size());
  }
  double ter = refLen == 0 ? 0.0 : static_cast<double>(edits) / refLen;
  std::cout << "samples," << samples.size() << "\nedits," << edits
            << "\nref_tokens," << refLen << "\nter," << fmt(ter) << "\n";
  return 0;
}

int cmdInspectGraph(const std::string& labelText, const std::string& kind,
                    double lambda, int vocab, bool dot) {
  Alphabet alphabet(vocab);
  std::vector<int> label = parseLabel(labelText, alphabet);
  Graph g;
  if (kind == "ctc") {
    g = buildCtcLabel(alphabet, label).graph;
  } else if (kind == "selfless-ctc") {
    g = buildSelflessCtcLabel(alphabet, label).graph;
  } else if (kind == "stc") {
    g = buildStcLabel(alphabet, label, lambda).graph;
  } else {
    std::cerr << "unknown graph kind '" << kind << "'\n";
    return kExitConfigError;
  }
  if (dot) {
    std::cout << exportDot(g, [&](int id) { return alphabet.name(id); });
  } else {
    std::cout << exportText(g);
  }
  return 0;
}

struct BenchArgs {
  int epochs = 3;
  int vocab = 30;
  int numSamples = 300;
  double pDrop = 0.5;
  std::uint64_t seed = 7;
  int bigVocab = 1000;
  int threads = 1;
};

int cmdBench(const BenchArgs& a) {
  SyntheticConfig gen;
  gen.vocabSize = a.vocab;
  gen.numSamples = a.numSamples;
  gen.minLabelLen = 3;
  gen.maxLabelLen = 8;
  gen.minFramesPerToken = 1;
  gen.maxFramesPerToken = 3;
  gen.noise = 0.3;
  gen.seed = a.seed;
  auto train = generateSynthetic(gen);
  DropConfig drop;
  drop.pDrop = {a.pDrop};
  drop.seed = a.seed;
  auto partial = applyDrop(train, drop);

  auto timeEpochs = [&](LossKind kind, bool reduced) {
    TrainConfig cfg;
    cfg.loss = kind;
    cfg.vocabSize = a.vocab;
    cfg.seed = a.seed;
    cfg.reducedAlphabet = reduced;
    cfg.threads = a.threads;
    Trainer trainer(cfg);
    std::vector<double> times;
    for (int e = 0; e < a.epochs; ++e) {
      times.push_back(trainer.runEpoch(partial, {}).seconds);
    }
    double mean = 0.0;
    for (double t : times) {
      mean += t;
    }
    return mean / times.size();
  };

  double ctcMean = timeEpochs(LossKind::Ctc, false);
  double stcMean = timeEpochs(LossKind::Stc, true);
  std::cout << "metric,value\n";
  std::cout << "ctc_epoch_seconds," << fmt(ctcMean) << "\n";
  std::cout << "stc_epoch_seconds," << fmt(stcMean) << "\n";
  std::cout << "stc_over_ctc," << fmt(stcMean / ctcMean) << "\n";

  // reduced- vs full-alphabet STC loss at a large vocabulary
  Alphabet big(a.bigVocab);
  Matrix logits(8, big.numClasses());
  std::mt19937_64 rng(a.seed);
  for (auto& v : logits.data()) {
    v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 4.0 - 2.0;
  }
  Matrix logProbs = logSoftmaxRows(logits);
  std::vector<int> partialLabel{1, 5, 9};
  auto timeLoss = [&](bool reduced) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 50; ++i) {
      stcLoss(logProbs, partialLabel, -0.5, reduced);
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };
  double fullTime = timeLoss(false);
  double reducedTime = timeLoss(true);
  std::cout << "stc_full_alphabet_seconds," << fmt(fullTime) << "\n";
  std::cout << "stc_reduced_alphabet_seconds," << fmt(reducedTime) << "\n";
  std::cout << "reduced_over_full," << fmt(reducedTime / fullTime) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable WFST losses (CTC / selfless-CTC / STC) with a "
               "synthetic training harness"};
  app.require_subcommand(1);
  // optional config file; explicit flags win over file values
  app.set_config("--config")->configurable(false);

  MakeDataArgs md;
  auto* makeData = app.add_subcommand(
      "make-data", "Generate a synthetic corpus with partial labels");
  makeData->add_option("--vocab", md.vocab, "vocabulary size");
  makeData->add_option("--num-samples", md.numSamples, "training samples");
  makeData->add_option("--dev-samples", md.devSamples, "held-out samples");
  makeData->add_option("--len-min", md.lenMin, "min label length");
  makeData->add_option("--len-max", md.lenMax, "max label length");
  makeData->add_option("--frames-min", md.framesMin, "min frames per token");
  makeData->add_option("--frames-max", md.framesMax, "max frames per token");
  makeData->add_option("--noise", md.noise, "feature noise stddev");
  makeData->add_option("--seed", md.seed, "RNG seed");
  makeData->add_option("--strategy", md.strategy,
                       "uniform | per-sample-split | per-token-split");
  makeData
      ->add_option("--p-drop", md.pDrop,
                   "drop probability (list for split strategies)")
      ->delimiter(',');
  makeData->add_option("--bins", md.histogramBins, "histogram bins");
  makeData->add_option("--out", md.outDir, "output directory");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a frame classifier");
  train->add_option("--train", ta.trainPath, "training corpus")->required();
  train->add_option("--dev", ta.devPath, "held-out corpus for TER");
  train->add_option("--loss", ta.lossName, "ctc | selfless-ctc | stc");
  train->add_option("--epochs", ta.epochs, "total epochs to reach");
  train->add_option("--lr", ta.cfg.learningRate, "Adagrad learning rate");
  train->add_option("--batch-size", ta.cfg.batchSize, "batch size");
  train->add_option("--seed", ta.cfg.seed, "RNG seed");
  train->add_option("--p0", ta.cfg.p0, "penalty schedule p0");
  train->add_option("--p-max", ta.cfg.pMax, "penalty schedule p_max");
  train->add_option("--t-half", ta.cfg.tHalf, "penalty half-life in steps");
  train->add_flag("--reduced-alphabet,!--full-alphabet",
                  ta.cfg.reducedAlphabet,
                  "restrict STC emission graphs to the partial label tokens");
  train->add_option("--hidden", ta.cfg.hiddenDim, "hidden layer width");
  train->add_option("--init-scale", ta.cfg.initScale, "weight init scale");
  train->add_option("--threads", ta.cfg.threads, "loss worker threads");
  train->add_option("--decode", ta.decodeName,
                    "collapse used for TER: ctc | stc");
  train->add_option("--out", ta.outDir, "run directory");
  train->add_option("--resume", ta.resumeFrom, "checkpoint to resume from");

  std::string evalData, evalCheckpoint, evalDecode = "ctc";
  auto* eval = app.add_subcommand("eval", "Decode a corpus and report TER");
  eval->add_option("--data", evalData, "corpus to evaluate")->required();
  eval->add_option("--checkpoint", evalCheckpoint, "model checkpoint")
      ->required();
  eval->add_option("--decode", evalDecode, "ctc | stc");

  std::string igLabel, igKind = "stc";
  double igLambda = -0.5;
  int igVocab = 26;
  bool igDot = false;
  auto* inspect = app.add_subcommand(
      "inspect-graph", "Print a label graph in text or DOT form");
  inspect->add_option("--label", igLabel, "tokens, e.g. 'a b c' or '0 1 2'")
      ->required();
  inspect->add_option("--kind", igKind, "ctc | selfless-ctc | stc");
  inspect->add_option("--lambda", igLambda,
                      "token insertion penalty (-inf allowed)");
  inspect->add_option("--vocab", igVocab, "vocabulary size");
  inspect->add_flag("--dot", igDot, "emit Graphviz instead of text");

  BenchArgs ba;
  auto* bench =
      app.add_subcommand("bench", "Compare CTC and STC epoch times");
  bench->add_option("--epochs", ba.epochs, "epochs per measurement (>= 3)");
  bench->add_option("--vocab", ba.vocab, "vocabulary size");
  bench->add_option("--num-samples", ba.numSamples, "samples per epoch");
  bench->add_option("--p-drop", ba.pDrop, "drop probability for STC data");
  bench->add_option("--seed", ba.seed, "RNG seed");
  bench->add_option("--big-vocab", ba.bigVocab,
                    "vocabulary for the reduced-vs-full comparison");
  bench->add_option("--threads", ba.threads, "loss worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (makeData->parsed()) {
      return cmdMakeData(md);
    }
    if (train->parsed()) {
      return cmdTrain(ta);
    }
    if (eval->parsed()) {
      return cmdEval(evalData, evalCheckpoint, evalDecode);
    }
    if (inspect->parsed()) {
      return cmdInspectGraph(igLabel, igKind, igLambda, igVocab, igDot);
    }
    if (bench->parsed()) {
      return cmdBench(ba);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return 0;
}
