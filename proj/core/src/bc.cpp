#include "dfm2d/bc.hpp"

#include "dfm2d/errors.hpp"

namespace dfm {

ScalarBC::ScalarBC(const Grid& g, BC default_boundary)
{
    kind.assign(g.num_faces(), BC::Interior);
    for (int f = 0; f < g.num_faces(); ++f)
        if (g.is_boundary_face(f)) kind[f] = default_boundary;
}

void ScalarBC::validate(const Grid& g) const
{
    if (static_cast<int>(kind.size()) != g.num_faces())
        throw Error("bc: size mismatch with grid");
    for (int f = 0; f < g.num_faces(); ++f) {
        const bool bnd = g.is_boundary_face(f);
        if (bnd && kind[f] == BC::Interior)
            throw Error("bc: boundary face " + std::to_string(f) + " has no condition");
        if (!bnd && kind[f] != BC::Interior)
            throw Error("bc: interior face " + std::to_string(f) + " carries a condition");
    }
}

VectorBC::VectorBC(const Grid& g, BC default_boundary)
{
    kind.assign(g.num_faces(), {BC::Interior, BC::Interior});
    for (int f = 0; f < g.num_faces(); ++f)
        if (g.is_boundary_face(f)) kind[f] = {default_boundary, default_boundary};
}

void VectorBC::validate(const Grid& g) const
{
    if (static_cast<int>(kind.size()) != g.num_faces())
        throw Error("bc: size mismatch with grid");
    for (int f = 0; f < g.num_faces(); ++f) {
        const bool bnd = g.is_boundary_face(f);
        for (int d = 0; d < 2; ++d) {
            if (bnd && kind[f][d] == BC::Interior)
                throw Error("bc: boundary face " + std::to_string(f) + " has no condition");
            if (!bnd && kind[f][d] != BC::Interior)
                throw Error("bc: interior face " + std::to_string(f) + " carries a condition");
        }
    }
}

}  // namespace dfm
