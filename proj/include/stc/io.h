#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "stc/graph.h"

namespace stc {

// Maps a label id to a display name; kEpsilon and reserved ids included.
using SymbolNamer = std::function<std::string(int)>;

// Default namer: plain integers, "eps" for kEpsilon.
std::string defaultSymbolName(int label);

// Byte-deterministic text form:
//   states <N>
//   start <ids...>
//   final <ids...>
//   <src> <dst> <ilabel> <olabel> <weight>   (one line per arc, in order)
// Weights print with enough digits to round-trip doubles exactly.
std::string exportText(const Graph& g);

// Inverse of exportText. Throws std::runtime_error naming the offending line.
Graph parseText(const std::string& text);
Graph parseText(std::istream& in);

// Graphviz form: bold circles for start states, concentric circles for final
// states; arc labels "i:o/w", shortened to "i/w" when the labels agree.
std::string exportDot(const Graph& g, const SymbolNamer& namer = defaultSymbolName);

// Exact structural equality: state count, start/final flags, and the arc
// sequence (including insertion order and bit-identical weights).
bool structuralEqual(const Graph& a, const Graph& b);

} // namespace stc
