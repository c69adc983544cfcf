#include "stc/trainer.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stc {

namespace {

ClassifierConfig classifierConfig(const TrainConfig& cfg) {
  if (cfg.vocabSize < 2) {
    throw std::invalid_argument("trainer needs vocabSize >= 2");
  }
  ClassifierConfig c;
  c.inputDim = cfg.vocabSize;
  c.outputDim = cfg.vocabSize + 1; // tokens + blank
  c.hiddenDim = cfg.hiddenDim;
  c.initScale = cfg.initScale;
  c.seed = cfg.seed;
  return c;
}

void parallelFor(int threads, int n, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  int workers = std::min(threads, n);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      int i;
      while ((i = next.fetch_add(1)) < n) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void writeTensor(std::ostream& out, const std::string& name,
                 const double* v, size_t n) {
  out << "tensor " << name << " " << n;
  char buf[32];
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    out << " " << buf;
  }
  out << "\n";
}

std::vector<double> readTensor(std::istream& in, const std::string& expect) {
  std::string kw, name;
  size_t n;
  if (!(in >> kw >> name >> n) || kw != "tensor" || name != expect) {
    throw std::runtime_error("checkpoint: expected tensor " + expect);
  }
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(in >> v[i])) {
      throw std::runtime_error("checkpoint: truncated tensor " + expect);
    }
  }
  return v;
}

} // namespace

std::string lossKindName(LossKind k) {
  switch (k) {
    case LossKind::Ctc:
      return "ctc";
    case LossKind::SelflessCtc:
      return "selfless-ctc";
    case LossKind::Stc:
      return "stc";
  }
  return "?";
}

LossKind lossKindFromName(const std::string& name) {
  if (name == "ctc") {
    return LossKind::Ctc;
  }
  if (name == "selfless-ctc") {
    return LossKind::SelflessCtc;
  }
  if (name == "stc") {
    return LossKind::Stc;
  }
  throw std::invalid_argument("unknown loss kind '" + name + "'");
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      model_(classifierConfig(cfg)),
      optimizer_(cfg.learningRate) {}

double Trainer::currentLambda() const {
  return PenaltySchedule::fromHalfLife(cfg_.p0, cfg_.pMax, cfg_.tHalf)
      .lambdaAt(steps_);
}

LossResult Trainer::sampleLoss(const Matrix& logProbs, const Sample& s,
                               double lambda) const {
  switch (cfg_.loss) {
    case LossKind::Ctc:
      return ctcLoss(logProbs, s.partialLabel);
    case LossKind::SelflessCtc:
      return selflessCtcLoss(logProbs, s.partialLabel);
    case LossKind::Stc:
      return stcLoss(logProbs, s.partialLabel, lambda, cfg_.reducedAlphabet);
  }
  throw std::logic_error("unreachable");
}

EpochMetrics Trainer::runEpoch(const std::vector<Sample>& train,
                               const std::vector<Sample>& dev) {
  auto t0 = std::chrono::steady_clock::now();
  EpochMetrics metrics;
  metrics.epoch = epochsDone_ + 1;
  metrics.lambda = currentLambda();

  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  // reseeded per epoch: shuffle order survives checkpoint resume
  std::mt19937_64 rng(mix(cfg_.seed ^ mix(epochsDone_ + 1)));
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }

  PenaltySchedule schedule =
      PenaltySchedule::fromHalfLife(cfg_.p0, cfg_.pMax, cfg_.tHalf);

  double lossSum = 0.0;
  int lossCount = 0;
  for (size_t batchStart = 0; batchStart < order.size();
       batchStart += cfg_.batchSize) {
    size_t batchEnd =
        std::min(order.size(), batchStart + cfg_.batchSize);
    int n = static_cast<int>(batchEnd - batchStart);
    double lambda = schedule.lambdaAt(steps_);

    std::vector<Matrix> logProbs(n);
    std::vector<LossResult> losses(n);
    parallelFor(cfg_.threads, n, [&](int i) {
      const Sample& s = train[order[batchStart + i]];
      logProbs[i] = model_.forward(s.frames);
      losses[i] = sampleLoss(logProbs[i], s, lambda);
    });

    // reduce in sample order: results do not depend on the thread count
    ClassifierGrads grads = model_.zeroGrads();
    int finite = 0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(losses[i].loss)) {
        ++metrics.skipped;
        continue;
      }
      ++finite;
      lossSum += losses[i].loss;
      const Sample& s = train[order[batchStart + i]];
      model_.backpropLogProbs(s.frames, logProbs[i], losses[i].grad, grads);
    }
    if (finite > 0) {
      double scale = 1.0 / finite;
      for (auto& v : grads.dW2.data()) {
        v *= scale;
      }
      for (auto& v : grads.dB2) {
        v *= scale;
      }
      if (model_.config().hiddenDim > 0) {
        for (auto& v : grads.dW1.data()) {
          v *= scale;
        }
        for (auto& v : grads.dB1) {
          v *= scale;
        }
      }
      optimizer_.step(model_, grads);
      lossCount += finite;
    }
    ++steps_;
  }
  ++epochsDone_;

  metrics.loss = lossCount > 0 ? lossSum / lossCount
                               : std::numeric_limits<double>::infinity();
  metrics.ter = dev.empty() ? 0.0 : evaluateTer(dev);
  metrics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return metrics;
}

double Trainer::evaluateTer(const std::vector<Sample>& samples) const {
  long long edits = 0;
  long long refLen = 0;
  for (const Sample& s : samples) {
    auto hyp = greedyDecode(model_.forward(s.frames), cfg_.decode);
    edits += editDistance(hyp, s.fullLabel);
    refLen += static_cast<long long>(s.fullLabel.size());
  }
  return refLen == 0 ? 0.0 : static_cast<double>(edits) / refLen;
}

double Trainer::evaluateLoss(const std::vector<Sample>& samples) const {
  double sum = 0.0;
  int count = 0;
  double lambda = currentLambda();
  for (const Sample& s : samples) {
    LossResult r = sampleLoss(model_.forward(s.frames), s, lambda);
    if (std::isfinite(r.loss)) {
      sum += r.loss;
      ++count;
    }
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::infinity();
}

void Trainer::saveCheckpoint(const std::string& path) const {
  std::ostringstream out;
  char buf[32];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "stc-checkpoint 1\n";
  out << "loss " << lossKindName(cfg_.loss) << "\n";
  out << "vocab " << cfg_.vocabSize << "\n";
  out << "hidden " << cfg_.hiddenDim << "\n";
  out << "lr " << fmt(cfg_.learningRate) << "\n";
  out << "batch " << cfg_.batchSize << "\n";
  out << "seed " << cfg_.seed << "\n";
  out << "reduced " << (cfg_.reducedAlphabet ? 1 : 0) << "\n";
  out << "decode " << (cfg_.decode == CollapseMode::Ctc ? "ctc" : "stc")
      << "\n";
  out << "threads " << cfg_.threads << "\n";
  out << "init_scale " << fmt(cfg_.initScale) << "\n";
  out << "schedule " << fmt(cfg_.p0) << " " << fmt(cfg_.pMax) << " "
      << fmt(cfg_.tHalf) << "\n";
  out << "epochs_done " << epochsDone_ << "\n";
  out << "steps " << steps_ << "\n";
  if (cfg_.hiddenDim > 0) {
    writeTensor(out, "W1", model_.W1.data().data(), model_.W1.size());
    writeTensor(out, "b1", model_.b1.data(), model_.b1.size());
    writeTensor(out, "accW1", optimizer_.accW1.data(),
                optimizer_.accW1.size());
    writeTensor(out, "accB1", optimizer_.accB1.data(),
                optimizer_.accB1.size());
  }
  writeTensor(out, "W2", model_.W2.data().data(), model_.W2.size());
  writeTensor(out, "b2", model_.b2.data(), model_.b2.size());
  writeTensor(out, "accW2", optimizer_.accW2.data(), optimizer_.accW2.size());
  writeTensor(out, "accB2", optimizer_.accB2.data(), optimizer_.accB2.size());
  out << "end\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  f << out.str();
  if (!f) {
    throw std::runtime_error("failed writing " + path);
  }
}

Trainer Trainer::loadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string kw;
  int version;
  if (!(in >> kw >> version) || kw != "stc-checkpoint" || version != 1) {
    throw std::runtime_error(path + ": not a version-1 checkpoint");
  }
  TrainConfig cfg;
  auto expect = [&](const std::string& want) {
    if (!(in >> kw) || kw != want) {
      throw std::runtime_error(path + ": expected field '" + want + "'");
    }
  };
  std::string s;
  expect("loss");
  in >> s;
  cfg.loss = lossKindFromName(s);
  expect("vocab");
  in >> cfg.vocabSize;
  expect("hidden");
  in >> cfg.hiddenDim;
  expect("lr");
  in >> cfg.learningRate;
  expect("batch");
  in >> cfg.batchSize;
  expect("seed");
  in >> cfg.seed;
  expect("reduced");
  int r;
  in >> r;
  cfg.reducedAlphabet = r != 0;
  expect("decode");
  in >> s;
  cfg.decode = s == "stc" ? CollapseMode::Stc : CollapseMode::Ctc;
  expect("threads");
  in >> cfg.threads;
  expect("init_scale");
  in >> cfg.initScale;
  expect("schedule");
  in >> cfg.p0 >> cfg.pMax >> cfg.tHalf;
  int epochsDone, steps;
  expect("epochs_done");
  in >> epochsDone;
  expect("steps");
  in >> steps;
  if (!in) {
    throw std::runtime_error(path + ": malformed header");
  }

  Trainer trainer(cfg);
  trainer.epochsDone_ = epochsDone;
  trainer.steps_ = steps;
  auto intoVec = [&](std::vector<double>& dst, const std::string& name) {
    dst = readTensor(in, name);
  };
  auto intoMatrix = [&](Matrix& dst, const std::string& name) {
    auto v = readTensor(in, name);
    if (v.size() != dst.size()) {
      throw std::runtime_error(path + ": tensor " + name + " has wrong size");
    }
    dst.data() = std::move(v);
  };
  if (cfg.hiddenDim > 0) {
    intoMatrix(trainer.model_.W1, "W1");
    intoVec(trainer.model_.b1, "b1");
    intoVec(trainer.optimizer_.accW1, "accW1");
    intoVec(trainer.optimizer_.accB1, "accB1");
  }
  intoMatrix(trainer.model_.W2, "W2");
  intoVec(trainer.model_.b2, "b2");
  intoVec(trainer.optimizer_.accW2, "accW2");
  intoVec(trainer.optimizer_.accB2, "accB2");
  expect("end");
  return trainer;
}

} // namespace stc
