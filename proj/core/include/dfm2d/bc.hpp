#pragma once

#include <vector>

#include "dfm2d/grid.hpp"

namespace dfm {

enum class BC : std::uint8_t { Interior = 0, Dirichlet, Neumann };

/// Scalar boundary condition kinds, one entry per face. Interior faces must
/// stay Interior; every boundary-like face (outer boundary or fracture wall)
/// must be Dirichlet or Neumann. Values are supplied separately as a vector
/// over faces: pressure for Dirichlet faces, total outward flux for Neumann
/// faces.
struct ScalarBC {
    std::vector<BC> kind;

    ScalarBC() = default;
    explicit ScalarBC(const Grid& g, BC default_boundary = BC::Neumann);
    void validate(const Grid& g) const;

    bool is_dir(int f) const { return kind[f] == BC::Dirichlet; }
    bool is_neu(int f) const { return kind[f] == BC::Neumann; }
};

/// Vector (mechanics) boundary conditions with per-component kinds. Values:
/// displacement components for Dirichlet, total traction components for
/// Neumann, in a vector of size 2*num_faces.
struct VectorBC {
    std::vector<std::array<BC, 2>> kind;

    VectorBC() = default;
    explicit VectorBC(const Grid& g, BC default_boundary = BC::Neumann);
    void validate(const Grid& g) const;

    bool is_dir(int f, int comp) const { return kind[f][comp] == BC::Dirichlet; }
    bool is_neu(int f, int comp) const { return kind[f][comp] == BC::Neumann; }
};

}  // namespace dfm
