#include "stc/io.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace stc {

namespace {

std::string formatWeight(double w) {
  if (w == kNegInf) {
    return "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

double parseWeight(const std::string& tok, int lineNo) {
  if (tok == "-inf") {
    return kNegInf;
  }
  try {
    size_t pos = 0;
    double w = std::stod(tok, &pos);
    if (pos != tok.size()) {
      throw std::invalid_argument(tok);
    }
    return w;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(lineNo) +
                             ": bad weight '" + tok + "'");
  }
}

} // namespace

std::string defaultSymbolName(int label) {
  return label == kEpsilon ? "eps" : std::to_string(label);
}

std::string exportText(const Graph& g) {
  std::ostringstream out;
  out << "states " << g.numStates() << "\n";
  out << "start";
  for (int s : g.startStates()) {
    out << " " << s;
  }
  out << "\nfinal";
  for (int s : g.finalStates()) {
    out << " " << s;
  }
  out << "\n";
  for (int i = 0; i < g.numArcs(); ++i) {
    const Arc& a = g.arc(i);
    out << a.src << " " << a.dst << " " << a.ilabel << " " << a.olabel << " "
        << formatWeight(a.weight) << "\n";
  }
  return out.str();
}

Graph parseText(std::istream& in) {
  Graph g;
  std::string line;
  int lineNo = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("line " + std::to_string(lineNo) + ": " + what);
  };

  auto nextLine = [&]() -> bool {
    if (!std::getline(in, line)) {
      return false;
    }
    ++lineNo;
    return true;
  };

  if (!nextLine()) {
    fail("missing 'states' header");
  }
  std::istringstream hdr(line);
  std::string kw;
  int numStates = -1;
  if (!(hdr >> kw >> numStates) || kw != "states" || numStates < 0) {
    fail("expected 'states <N>'");
  }

  auto readStateLine = [&](const std::string& expect,
                           std::vector<int>& out) {
    if (!nextLine()) {
      fail("missing '" + expect + "' header");
    }
    std::istringstream ss(line);
    std::string k;
    if (!(ss >> k) || k != expect) {
      fail("expected '" + expect + "' line");
    }
    int s;
    while (ss >> s) {
      if (s < 0 || s >= numStates) {
        fail("state " + std::to_string(s) + " out of range");
      }
      out.push_back(s);
    }
    if (!ss.eof()) {
      fail("trailing garbage on '" + expect + "' line");
    }
  };

  std::vector<int> starts, finals;
  readStateLine("start", starts);
  readStateLine("final", finals);

  std::vector<bool> isStart(numStates, false), isFinal(numStates, false);
  for (int s : starts) {
    isStart[s] = true;
  }
  for (int s : finals) {
    isFinal[s] = true;
  }
  for (int s = 0; s < numStates; ++s) {
    g.addNode(isStart[s], isFinal[s]);
  }

  while (nextLine()) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    int src, dst, il, ol;
    std::string wtok;
    if (!(ss >> src >> dst >> il >> ol >> wtok)) {
      fail("expected 'src dst ilabel olabel weight'");
    }
    std::string extra;
    if (ss >> extra) {
      fail("trailing garbage after arc");
    }
    if (src < 0 || src >= numStates || dst < 0 || dst >= numStates) {
      fail("arc references state out of range");
    }
    g.addArc(src, dst, il, ol, parseWeight(wtok, lineNo));
  }
  return g;
}

Graph parseText(const std::string& text) {
  std::istringstream in(text);
  return parseText(in);
}

std::string exportDot(const Graph& g, const SymbolNamer& namer) {
  std::ostringstream out;
  out << "digraph FST {\n  rankdir = LR;\n  node [shape = circle];\n";
  for (int s = 0; s < g.numStates(); ++s) {
    out << "  " << s << " [shape = "
        << (g.isFinal(s) ? "doublecircle" : "circle");
    if (g.isStart(s)) {
      out << ", penwidth = 2";
    }
    out << "];\n";
  }
  for (int i = 0; i < g.numArcs(); ++i) {
    const Arc& a = g.arc(i);
    out << "  " << a.src << " -> " << a.dst << " [label = \"";
    if (a.ilabel == a.olabel) {
      out << namer(a.ilabel);
    } else {
      out << namer(a.ilabel) << ":" << namer(a.olabel);
    }
    out << "/" << formatWeight(a.weight) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

bool structuralEqual(const Graph& a, const Graph& b) {
  if (a.numStates() != b.numStates() || a.numArcs() != b.numArcs()) {
    return false;
  }
  for (int s = 0; s < a.numStates(); ++s) {
    if (a.isStart(s) != b.isStart(s) || a.isFinal(s) != b.isFinal(s)) {
      return false;
    }
  }
  for (int i = 0; i < a.numArcs(); ++i) {
    const Arc& x = a.arc(i);
    const Arc& y = b.arc(i);
    bool sameWeight =
        x.weight == y.weight || (std::isnan(x.weight) && std::isnan(y.weight));
    if (x.src != y.src || x.dst != y.dst || x.ilabel != y.ilabel ||
        x.olabel != y.olabel || !sameWeight) {
      return false;
    }
  }
  return true;
}

} // namespace stc
