#pragma once

#include <stdexcept>

namespace alilab {

// Tensor shapes violate an operation's contract.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A value lies outside an operation's numeric domain (log of a non-positive,
// discriminator probability on the closed boundary, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition unrelated to shapes or numeric domains was violated.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite quantity and the run must stop. CLI exit code 3.
struct RuntimeAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration (file, flags, or checkpoint header). CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required run artifact is missing. CLI exit code 4.
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem read/write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace alilab
