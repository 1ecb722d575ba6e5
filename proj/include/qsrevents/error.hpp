#pragma once

#include <stdexcept>
#include <string>

namespace qsrev {

// Bad arguments or malformed data handed to an operation.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A Frenet-Serret frame was required but the motion is degenerate.
struct DegenerateFrameError : std::domain_error {
  using std::domain_error::domain_error;
};

// A tracking gap touches the first or last frame of a point; the caller
// must trim the sequence instead of extrapolating.
struct BoundaryExtrapolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every label combination is masked out; decoding has no feasible answer.
struct InfeasibleDecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File or serialization problems (missing paths, malformed JSON/CSV).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qsrev
