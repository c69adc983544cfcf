#include "stc/graph.h"

#include <stdexcept>
#include <string>

namespace stc {

void Graph::checkState(int s) const {
  if (s < 0 || s >= numStates_) {
    throw std::invalid_argument(
        "arc references state " + std::to_string(s) + " but graph has " +
        std::to_string(numStates_) + " states");
  }
}

} // namespace stc
