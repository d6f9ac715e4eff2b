#pragma once

#include <stdexcept>
#include <string>

namespace dfm {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or unsupported geometry (overlapping fractures, degenerate cells, ...).
struct GeometryError : Error {
    using Error::Error;
};

/// Mesh generation or mesh import failure.
struct MeshError : Error {
    using Error::Error;
};

/// Configuration file problems (unknown keys, missing files, bad values).
struct ConfigError : Error {
    using Error::Error;
};

/// Linear or nonlinear solver failure (singular matrix, Newton divergence).
struct SolverError : Error {
    using Error::Error;
};

}  // namespace dfm
