#include "stc/data.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stc {

namespace {

// splitmix64; the counter-based generator behind drop decisions
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hashString(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
  for (unsigned char c : s) {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return h;
}

double unitReal(std::uint64_t key) {
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

// uniform int in [lo, hi] from a stream; modulo bias is negligible at these
// range sizes
int uniformInt(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Box-Muller on explicit uniforms: identical output on every platform,
// unlike std::normal_distribution
double gaussian(std::mt19937_64& rng) {
  double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

std::vector<Sample> generateSynthetic(const SyntheticConfig& cfg) {
  if (cfg.vocabSize < 2) {
    throw std::invalid_argument("synthetic corpus needs a vocabulary >= 2");
  }
  if (cfg.numSamples < 0 || cfg.minLabelLen < 1 ||
      cfg.maxLabelLen < cfg.minLabelLen || cfg.minFramesPerToken < 1 ||
      cfg.maxFramesPerToken < cfg.minFramesPerToken || cfg.noise < 0.0) {
    throw std::invalid_argument("degenerate synthetic corpus configuration");
  }

  std::vector<Sample> out;
  out.reserve(cfg.numSamples);
  for (int n = 0; n < cfg.numSamples; ++n) {
    std::mt19937_64 rng(mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(n))));
    Sample s;
    s.id = "s" + std::to_string(n);

    int len = uniformInt(rng, cfg.minLabelLen, cfg.maxLabelLen);
    s.fullLabel.reserve(len);
    int prev = -1;
    for (int i = 0; i < len; ++i) {
      // no immediate repeats: keeps the greedy collapse unambiguous and
      // every sample CTC-alignable at T >= U
      int tok = uniformInt(rng, 0, cfg.vocabSize - (prev >= 0 ? 2 : 1));
      if (prev >= 0 && tok >= prev) {
        ++tok;
      }
      s.fullLabel.push_back(tok);
      prev = tok;
    }

    std::vector<int> framesPerToken(len);
    int total = 0;
    for (int i = 0; i < len; ++i) {
      framesPerToken[i] =
          uniformInt(rng, cfg.minFramesPerToken, cfg.maxFramesPerToken);
      total += framesPerToken[i];
    }
    s.frames = Matrix(total, cfg.vocabSize);
    int t = 0;
    for (int i = 0; i < len; ++i) {
      for (int f = 0; f < framesPerToken[i]; ++f, ++t) {
        for (int dIdx = 0; dIdx < cfg.vocabSize; ++dIdx) {
          double v = (dIdx == s.fullLabel[i]) ? 1.0 : 0.0;
          if (cfg.noise > 0.0) {
            v += cfg.noise * gaussian(rng);
          }
          s.frames.at(t, dIdx) = v;
        }
      }
    }
    s.partialLabel = s.fullLabel;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> applyDrop(const std::vector<Sample>& samples,
                              const DropConfig& cfg) {
  size_t expected = cfg.strategy == DropStrategy::Uniform
                        ? 1
                        : static_cast<size_t>(cfg.numSplits);
  if (cfg.pDrop.size() != expected) {
    throw std::invalid_argument("pDrop list does not match the strategy");
  }
  for (double p : cfg.pDrop) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("pDrop must lie in [0, 1]");
    }
  }
  if (cfg.strategy == DropStrategy::PerTokenSplit && cfg.vocabSize <= 0) {
    throw std::invalid_argument("per-token split needs the vocabulary size");
  }

  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    std::uint64_t sampleKey = mix64(cfg.seed ^ hashString(s.id));
    double pSample = cfg.pDrop[0];
    if (cfg.strategy == DropStrategy::PerSampleSplit) {
      pSample = cfg.pDrop[mix64(sampleKey ^ 0x5917ULL) %
                          static_cast<std::uint64_t>(cfg.numSplits)];
    }
    Sample kept = s;
    kept.partialLabel.clear();
    for (size_t i = 0; i < s.fullLabel.size(); ++i) {
      double p = pSample;
      if (cfg.strategy == DropStrategy::PerTokenSplit) {
        std::uint64_t tokenKey =
            mix64(cfg.seed ^ (0x70c3ULL + s.fullLabel[i]));
        p = cfg.pDrop[tokenKey % static_cast<std::uint64_t>(cfg.numSplits)];
      }
      if (unitReal(sampleKey ^ mix64(i + 1)) >= p) {
        kept.partialLabel.push_back(s.fullLabel[i]);
      }
    }
    if (!kept.partialLabel.empty()) {
      out.push_back(std::move(kept));
    }
  }
  return out;
}

std::vector<int> retentionHistogram(const std::vector<Sample>& samples,
                                    int bins) {
  if (bins < 1) {
    throw std::invalid_argument("histogram needs at least one bin");
  }
  std::vector<int> counts(bins, 0);
  for (const Sample& s : samples) {
    if (s.fullLabel.empty()) {
      continue;
    }
    double frac = static_cast<double>(s.partialLabel.size()) /
                  static_cast<double>(s.fullLabel.size());
    int b = std::min(bins - 1, static_cast<int>(frac * bins));
    ++counts[b];
  }
  return counts;
}

std::string retentionHistogramCsv(const std::vector<Sample>& samples,
                                  int bins) {
  auto counts = retentionHistogram(samples, bins);
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < bins; ++b) {
    out << formatDouble(static_cast<double>(b) / bins) << ","
        << formatDouble(static_cast<double>(b + 1) / bins) << "," << counts[b]
        << "\n";
  }
  return out.str();
}

std::string corpusToString(const std::vector<Sample>& samples) {
  std::ostringstream out;
  for (const Sample& s : samples) {
    out << s.id << "\t" << s.frames.rows() << " " << s.frames.cols() << "\t";
    for (size_t i = 0; i < s.fullLabel.size(); ++i) {
      out << (i ? " " : "") << s.fullLabel[i];
    }
    out << "\t";
    for (size_t i = 0; i < s.partialLabel.size(); ++i) {
      out << (i ? " " : "") << s.partialLabel[i];
    }
    out << "\t";
    for (size_t i = 0; i < s.frames.size(); ++i) {
      out << (i ? " " : "") << formatDouble(s.frames.data()[i]);
    }
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<int> parseIntList(const std::string& field, int lineNo) {
  std::vector<int> out;
  std::istringstream ss(field);
  int v;
  while (ss >> v) {
    out.push_back(v);
  }
  if (!ss.eof()) {
    throw std::runtime_error("line " + std::to_string(lineNo) +
                             ": bad token list");
  }
  return out;
}

} // namespace

std::vector<Sample> corpusFromString(const std::string& text) {
  std::vector<Sample> out;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) {
      continue;
    }
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("line " + std::to_string(lineNo) + ": " + what);
    };
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string::npos
                                            ? std::string::npos
                                            : tab - pos));
      if (tab == std::string::npos) {
        break;
      }
      pos = tab + 1;
    }
    if (fields.size() != 5) {
      fail("expected 5 tab-separated fields, got " +
           std::to_string(fields.size()));
    }
    Sample s;
    s.id = fields[0];
    int rows = 0, cols = 0;
    {
      std::istringstream ss(fields[1]);
      if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
        fail("bad shape field");
      }
    }
    s.fullLabel = parseIntList(fields[2], lineNo);
    s.partialLabel = parseIntList(fields[3], lineNo);
    s.frames = Matrix(rows, cols);
    {
      std::istringstream ss(fields[4]);
      for (size_t i = 0; i < s.frames.size(); ++i) {
        if (!(ss >> s.frames.data()[i])) {
          fail("frame matrix has fewer than " +
               std::to_string(s.frames.size()) + " values");
        }
      }
      double extra;
      if (ss >> extra) {
        fail("frame matrix has trailing values");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void writeCorpus(const std::vector<Sample>& samples, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  f << corpusToString(samples);
  if (!f) {
    throw std::runtime_error("failed writing " + path);
  }
}

std::vector<Sample> readCorpus(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    return corpusFromString(buf.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

} // namespace stc
