#pragma once

#include <stdexcept>
#include <string>

namespace fgb {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two words (or a word and an action) built over different ranks.
struct RankMismatch : Error {
  using Error::Error;
};

// A boundary prefix is too shallow to determine the requested quantity.
struct InsufficientDepth : Error {
  using Error::Error;
};

// Horospheres meet only even-radius spheres.
struct EvenRadiusRequired : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

// No inner automorphism can carry one prefix to the other.
struct IncompatiblePair : Error {
  using Error::Error;
};

// An enumeration would exceed the configured sphere/support cap.
struct ResourceCap : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace fgb
