#pragma once

#include <stdexcept>
#include <string>

#include "stc/graph.h"

namespace stc {

// Symbol-id layout for a vocabulary of V tokens:
//   0 .. V-1   vocabulary tokens
//   V          blank <b>
//   V+1        star <s> (any vocabulary token)
//   V+2+t      complement <s>\t (any vocabulary token except t)
// kEpsilon stays -1. Reserved ids never collide with token ids.
class Alphabet {
 public:
  explicit Alphabet(int vocabSize) : vocab_(vocabSize) {
    if (vocabSize < 1) {
      throw std::invalid_argument("alphabet needs at least one token");
    }
  }

  int vocabSize() const { return vocab_; }
  // Emission columns: vocabulary plus blank.
  int numClasses() const { return vocab_ + 1; }
  // Total id space including star and complements.
  int symbolSpace() const { return vocab_ + 2 + vocab_; }

  int blank() const { return vocab_; }
  int star() const { return vocab_ + 1; }
  int complementOf(int token) const {
    checkToken(token);
    return vocab_ + 2 + token;
  }

  bool isToken(int id) const { return id >= 0 && id < vocab_; }
  bool isBlank(int id) const { return id == vocab_; }
  bool isStar(int id) const { return id == vocab_ + 1; }
  bool isComplement(int id) const {
    return id >= vocab_ + 2 && id < symbolSpace();
  }
  int complementToken(int id) const { return id - vocab_ - 2; }

  void checkToken(int token) const {
    if (token < 0 || token >= vocab_) {
      throw std::invalid_argument("token id " + std::to_string(token) +
                                  " outside vocabulary of size " +
                                  std::to_string(vocab_));
    }
  }

  // Display names for text/DOT export: letters for small vocabularies,
  // otherwise t<i>; <b>, <s>, <s>\t for the reserved ids.
  std::string name(int id) const {
    if (id == kEpsilon) {
      return "eps";
    }
    if (isToken(id)) {
      if (vocab_ <= 26) {
        return std::string(1, static_cast<char>('a' + id));
      }
      return "t" + std::to_string(id);
    }
    if (isBlank(id)) {
      return "<b>";
    }
    if (isStar(id)) {
      return "<s>";
    }
    if (isComplement(id)) {
      return "<s>\\" + name(complementToken(id));
    }
    return "?" + std::to_string(id);
  }

 private:
  int vocab_;
};

} // namespace stc
