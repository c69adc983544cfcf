#include <cmath>

#include "doctest.h"
#include "oracles.h"
#include "stc/losses.h"
#include "stc/model.h"

using namespace stc;

namespace {

// the worked letter-to-word example: letters {a, b, c, blank, pad},
// three-letter words {a, cab, ca}, one frame of letter scores
struct EncoderFixture {
  LetterToWordEncoder encoder{5, 3, 4, {{0}, {2, 0, 1}, {2, 0}}, 3};
  Matrix scores{1, 15};
  EncoderFixture() {
    double v[15] = {0.9,  -0.4, 0.2,  1.8, -0.1,  // position 1
                    -0.4, 1.2,  -1.3, 0.1, 1.2,   // position 2
                    2.1,  -0.8, -1.4, 0.0, 0.1};  // position 3
    for (int i = 0; i < 15; ++i) {
      scores.at(0, i) = v[i];
    }
  }
};

} // namespace

TEST_CASE("classifier rows are log-distributions") {
  SUBCASE("zero weights give uniform rows") {
    ClassifierConfig cfg;
    cfg.inputDim = 4;
    cfg.outputDim = 5;
    cfg.initScale = 0.0;
    FrameClassifier model(cfg);
    Matrix x(3, 4, 0.7);
    Matrix lp = model.forward(x);
    for (int t = 0; t < 3; ++t) {
      for (int k = 0; k < 5; ++k) {
        CHECK(lp.at(t, k) == doctest::Approx(-std::log(5.0)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("random weights still normalize") {
    for (int hidden : {0, 6}) {
      ClassifierConfig cfg;
      cfg.inputDim = 4;
      cfg.outputDim = 5;
      cfg.hiddenDim = hidden;
      cfg.seed = 3;
      FrameClassifier model(cfg);
      oracle::Rng rng(5);
      Matrix x(3, 4);
      for (auto& v : x.data()) {
        v = rng.uniformReal(-1, 1);
      }
      Matrix lp = model.forward(x);
      for (int t = 0; t < 3; ++t) {
        CHECK(logSumExp(std::span<const double>(lp.row(t), 5)) ==
              doctest::Approx(0.0).epsilon(1e-6));
      }
    }
  }
  SUBCASE("shape mismatch throws") {
    ClassifierConfig cfg;
    cfg.inputDim = 4;
    cfg.outputDim = 5;
    FrameClassifier model(cfg);
    CHECK_THROWS_AS(model.forward(Matrix(3, 7)), std::invalid_argument);
  }
}

TEST_CASE("classifier gradients match finite differences through a loss") {
  for (int hidden : {0, 5}) {
    ClassifierConfig cfg;
    cfg.inputDim = 3;
    cfg.outputDim = 4;
    cfg.hiddenDim = hidden;
    cfg.seed = 11;
    FrameClassifier model(cfg);
    oracle::Rng rng(13);
    Matrix x(3, 3);
    for (auto& v : x.data()) {
      v = rng.uniformReal(-1, 1);
    }
    std::vector<int> y{1, 2};

    auto lossOf = [&]() { return ctcLoss(model.forward(x), y).loss; };
    Matrix lp = model.forward(x);
    auto r = ctcLoss(lp, y);
    ClassifierGrads grads = model.zeroGrads();
    model.backpropLogProbs(x, lp, r.grad, grads);

    Matrix& w = hidden ? model.W1 : model.W2;
    Matrix& dw = hidden ? grads.dW1 : grads.dW2;
    double h = 1e-5;
    for (size_t i = 0; i < w.size(); i += 2) {
      double orig = w.data()[i];
      w.data()[i] = orig + h;
      double up = lossOf();
      w.data()[i] = orig - h;
      double down = lossOf();
      w.data()[i] = orig;
      double fd = (up - down) / (2 * h);
      double ad = dw.data()[i];
      CHECK(std::abs(fd - ad) / std::max({1.0, std::abs(fd), std::abs(ad)}) <
            1e-4);
    }
  }
}

TEST_CASE("letter-to-word encoder reproduces the worked example") {
  EncoderFixture fx;
  CHECK(fx.encoder.outputDim() == 4);
  CHECK(fx.encoder.inputDim() == 15);
  Matrix out = fx.encoder.encode(fx.scores);
  // direct matrix multiplication
  CHECK(out.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-12)); // "cab"
  CHECK(out.at(0, 3) == doctest::Approx(3.1).epsilon(1e-12));  // blank
  CHECK(out.at(0, 0) == doctest::Approx(2.2).epsilon(1e-12));  // "a"
  CHECK(out.at(0, 2) == doctest::Approx(-0.1).epsilon(1e-12)); // "ca"
}

TEST_CASE("encoder matrix has exactly maxLen ones per row") {
  EncoderFixture fx;
  const Matrix& e = fx.encoder.matrix();
  for (int r = 0; r < e.rows(); ++r) {
    int ones = 0;
    for (int c = 0; c < e.cols(); ++c) {
      CHECK((e.at(r, c) == 0.0 || e.at(r, c) == 1.0));
      ones += e.at(r, c) == 1.0;
    }
    CHECK(ones == 3);
  }
}

TEST_CASE("encoder is linear and its backward is the transpose") {
  EncoderFixture fx;
  oracle::Rng rng(17);
  Matrix s1(2, 15), s2(2, 15);
  for (auto& v : s1.data()) {
    v = rng.uniformReal(-2, 2);
  }
  for (auto& v : s2.data()) {
    v = rng.uniformReal(-2, 2);
  }
  double alpha = -1.75;
  Matrix combo(2, 15);
  for (size_t i = 0; i < combo.size(); ++i) {
    combo.data()[i] = alpha * s1.data()[i] + s2.data()[i];
  }
  Matrix lhs = fx.encoder.encode(combo);
  Matrix e1 = fx.encoder.encode(s1);
  Matrix e2 = fx.encoder.encode(s2);
  for (size_t i = 0; i < lhs.size(); ++i) {
    CHECK(lhs.data()[i] ==
          doctest::Approx(alpha * e1.data()[i] + e2.data()[i]).epsilon(1e-12));
  }

  // backward equals finite differences of sum(encode(s) * dOut)
  Matrix dOut(2, 4);
  for (auto& v : dOut.data()) {
    v = rng.uniformReal(-1, 1);
  }
  Matrix dIn = fx.encoder.backward(dOut);
  auto f = [&](const Matrix& s) {
    Matrix o = fx.encoder.encode(s);
    double acc = 0;
    for (size_t i = 0; i < o.size(); ++i) {
      acc += o.data()[i] * dOut.data()[i];
    }
    return acc;
  };
  Matrix fd = oracle::finiteDifferenceGrad(f, s1, 1e-6);
  CHECK(oracle::maxAbsDifference(fd, dIn) < 1e-8);
}

TEST_CASE("encoder rejects malformed inputs") {
  CHECK_THROWS_AS(LetterToWordEncoder(5, 3, 4, {{0, 1, 2, 0}}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(LetterToWordEncoder(5, 9, 4, {{0}}, 3),
                  std::invalid_argument);
  EncoderFixture fx;
  CHECK_THROWS_AS(fx.encoder.encode(Matrix(1, 10)), std::invalid_argument);
  CHECK_THROWS_AS(fx.encoder.backward(Matrix(1, 7)), std::invalid_argument);
}

TEST_CASE("adagrad") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> params{1.0, -2.0};
    std::vector<double> acc;
    Adagrad opt(0.1);
    opt.step(params, {0.0, 0.0}, acc);
    CHECK(params[0] == 1.0);
    CHECK(params[1] == -2.0);
  }
  SUBCASE("constant gradient accumulates n * g^2") {
    std::vector<double> params{0.0};
    std::vector<double> acc;
    Adagrad opt(0.01);
    for (int n = 1; n <= 20; ++n) {
      opt.step(params, {0.5}, acc);
      CHECK(acc[0] == doctest::Approx(n * 0.25).epsilon(1e-12));
    }
  }
  SUBCASE("converges on a 1-D quadratic") {
    // f(x) = (x - 3)^2
    std::vector<double> x{0.0};
    std::vector<double> acc;
    Adagrad opt(0.5);
    for (int step = 0; step < 10000; ++step) {
      opt.step(x, {2.0 * (x[0] - 3.0)}, acc);
    }
    CHECK(std::abs(x[0] - 3.0) < 1e-3);
  }
  SUBCASE("accumulators never decrease") {
    oracle::Rng rng(19);
    std::vector<double> params{0.0, 0.0, 0.0};
    std::vector<double> acc;
    Adagrad opt(0.05);
    std::vector<double> prev(3, 0.0);
    for (int step = 0; step < 50; ++step) {
      std::vector<double> g{rng.uniformReal(-1, 1), rng.uniformReal(-1, 1),
                            rng.uniformReal(-1, 1)};
      opt.step(params, g, acc);
      for (int i = 0; i < 3; ++i) {
        CHECK(acc[i] >= prev[i]);
        prev[i] = acc[i];
      }
    }
  }
}

TEST_CASE("greedy decode") {
  auto logProbsFor = [](const std::vector<int>& argmax, int cols) {
    Matrix lp(static_cast<int>(argmax.size()), cols, -10.0);
    for (size_t t = 0; t < argmax.size(); ++t) {
      lp.at(static_cast<int>(t), argmax[t]) = -0.1;
    }
    return lp;
  };
  SUBCASE("merge repeats then drop blanks") {
    // (a, b, <b>, <b>, b, b, <b>, a) -> (a, b, b, a); blank id 2
    Matrix lp = logProbsFor({0, 1, 2, 2, 1, 1, 2, 0}, 3);
    CHECK(greedyDecode(lp, CollapseMode::Ctc) ==
          std::vector<int>{0, 1, 1, 0});
  }
  SUBCASE("all blanks decode to the empty sequence") {
    Matrix lp = logProbsFor({2, 2, 2}, 3);
    CHECK(greedyDecode(lp, CollapseMode::Ctc).empty());
    CHECK(greedyDecode(lp, CollapseMode::Stc).empty());
  }
  SUBCASE("blank-only collapse keeps repeats") {
    Matrix lp = logProbsFor({0, 2, 0}, 3);
    CHECK(greedyDecode(lp, CollapseMode::Stc) == std::vector<int>{0, 0});
    CHECK(greedyDecode(lp, CollapseMode::Ctc) == std::vector<int>{0, 0});
  }
  SUBCASE("ctc output never contains the blank") {
    oracle::Rng rng(23);
    for (int it = 0; it < 40; ++it) {
      Matrix lp = oracle::randomLogProbs(rng, rng.uniformInt(1, 8), 3);
      for (int tok : greedyDecode(lp, CollapseMode::Ctc)) {
        CHECK(tok != 3);
      }
    }
  }
  SUBCASE("ties break to the lowest token id") {
    Matrix lp(1, 3, std::log(1.0 / 3));
    CHECK(greedyDecode(lp, CollapseMode::Stc) == std::vector<int>{0});
  }
}

TEST_CASE("edit distance rate") {
  CHECK(editDistanceRate({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(editDistanceRate({}, {1, 2, 3, 4}) == 1.0);
  CHECK(editDistanceRate({0, 1, 2}, {0, 2}) == doctest::Approx(0.5));
  CHECK(editDistanceRate({5}, {}) == doctest::Approx(1.0)); // ref floor of 1
  CHECK(editDistance({0, 1, 2, 3}, {0, 9, 2}) == 2);
}

TEST_CASE("end-to-end gradients through encoder, stars and log-softmax") {
  // letters -> words -> log-softmax -> stc loss, differentiated back to the
  // classifier weights and checked against finite differences
  EncoderFixture fx;
  ClassifierConfig cfg;
  cfg.inputDim = 2;
  cfg.outputDim = 15; // letter blocks
  cfg.seed = 29;
  FrameClassifier model(cfg);
  oracle::Rng rng(31);
  Matrix x(3, 2);
  for (auto& v : x.data()) {
    v = rng.uniformReal(-1, 1);
  }
  std::vector<int> partial{1}; // the word "cab"

  auto lossOf = [&]() {
    Matrix lp = logSoftmaxRows(fx.encoder.encode(model.scores(x)));
    return stcLoss(lp, partial, -0.5).loss;
  };

  Matrix letterScores = model.scores(x);
  Matrix lp = logSoftmaxRows(fx.encoder.encode(letterScores));
  auto r = stcLoss(lp, partial, -0.5);
  REQUIRE(std::isfinite(r.loss));
  Matrix dWordScores = logSoftmaxRowsBackward(lp, r.grad);
  Matrix dLetterScores = fx.encoder.backward(dWordScores);
  ClassifierGrads grads = model.zeroGrads();
  model.backprop(x, dLetterScores, grads);

  double h = 1e-5;
  for (size_t i = 0; i < model.W2.size(); i += 3) {
    double orig = model.W2.data()[i];
    model.W2.data()[i] = orig + h;
    double up = lossOf();
    model.W2.data()[i] = orig - h;
    double down = lossOf();
    model.W2.data()[i] = orig;
    double fd = (up - down) / (2 * h);
    double ad = grads.dW2.data()[i];
    CHECK(std::abs(fd - ad) / std::max({1.0, std::abs(fd), std::abs(ad)}) <
          1e-4);
  }
}
