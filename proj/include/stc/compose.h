#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stc/graph.h"

namespace stc {

// Composition output plus per-arc provenance for gradient scatter:
// arcSources[i] = {arc index in g1 or -1, arc index in g2 or -1}. An arc
// created by an epsilon move on one side references only that side.
struct Composition {
  Graph graph;
  std::vector<std::array<std::int32_t, 2>> arcSources;
};

// Relational composition in the log semiring: a path transducing a->b in g1
// matched with a path transducing b->c in g2 yields a->c with the weights
// added. Epsilon labels are handled with a sequencing filter (virtual
// self-loop method): between two matches all g1-side epsilon moves are taken
// before any g2-side ones, so no composed path is generated twice.
//
// Throws std::invalid_argument if both graphs declare symbol spaces and they
// differ.
Composition compose(const Graph& g1, const Graph& g2);

} // namespace stc
