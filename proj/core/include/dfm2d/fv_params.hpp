#pragma once

#include <Eigen/Dense>

#include "dfm2d/errors.hpp"
#include "dfm2d/grid.hpp"

namespace dfm {

/// Cell-wise symmetric 2x2 tensor field, stored as (kxx, kyy, kxy) rows.
struct TensorField {
    Eigen::Matrix3Xd data;  // 3 x num_cells

    static TensorField isotropic(int nc, double k)
    {
        TensorField t;
        t.data.resize(3, nc);
        t.data.row(0).setConstant(k);
        t.data.row(1).setConstant(k);
        t.data.row(2).setZero();
        return t;
    }
    Eigen::Matrix2d tensor(int c) const
    {
        Eigen::Matrix2d k;
        k << data(0, c), data(2, c), data(2, c), data(1, c);
        return k;
    }
    void validate() const
    {
        for (int c = 0; c < data.cols(); ++c) {
            const double det = data(0, c) * data(1, c) - data(2, c) * data(2, c);
            if (data(0, c) <= 0 || det <= 0)
                throw Error("permeability tensor not positive definite in cell "
                            + std::to_string(c));
        }
    }
};

/// Parameters for scalar diffusion / flow on one subdomain. In lower
/// dimensions the permeability is the aperture-scaled effective tangential
/// permeability.
struct FlowParameters {
    TensorField permeability;       // K (or effective tangential K * aperture)
    Eigen::VectorXd viscosity;      // per cell
    Eigen::VectorXd source;         // source density (per unit measure)
    Eigen::VectorXd porosity;       // phi, used by transport/storage terms
    TensorField diffusivity;        // D for transport

    static FlowParameters uniform(const Grid& g, double k, double mu = 1.0, double phi = 1.0,
                                  double d = 0.0)
    {
        FlowParameters p;
        const int nc = g.num_cells();
        p.permeability = TensorField::isotropic(nc, k);
        p.viscosity = Eigen::VectorXd::Constant(nc, mu);
        p.source = Eigen::VectorXd::Zero(nc);
        p.porosity = Eigen::VectorXd::Constant(nc, phi);
        p.diffusivity = TensorField::isotropic(nc, d > 0 ? d : 1e-300);
        return p;
    }
};

/// Parameters for (poro)elasticity on the matrix subdomain plus the contact
/// data used on fracture subdomains.
struct MechanicsParameters {
    Eigen::VectorXd lame_lambda;   // per cell
    Eigen::VectorXd lame_mu;       // shear modulus G, per cell
    double biot_alpha = 1.0;
    double storage = 0.0;          // theta (matrix)
    Vec2 body_force{0.0, 0.0};     // density
    double friction = 0.6;         // F, fracture cells
    double c_num_n = 1.0;          // NCP constant c_n > 0
    double c_num_t = 1.0;          // NCP constant c_tau > 0
    double residual_aperture = 1e-4;  // a0 > 0

    static MechanicsParameters uniform(const Grid& g, double lambda, double mu)
    {
        MechanicsParameters m;
        m.lame_lambda = Eigen::VectorXd::Constant(g.num_cells(), lambda);
        m.lame_mu = Eigen::VectorXd::Constant(g.num_cells(), mu);
        return m;
    }
    void validate() const
    {
        if ((lame_mu.array() <= 0).any()) throw Error("shear modulus must be positive");
        if (biot_alpha < 0 || biot_alpha > 1) throw Error("biot alpha must lie in [0,1]");
        if (storage < 0 || friction < 0) throw Error("storage and friction must be >= 0");
        if (c_num_n <= 0 || c_num_t <= 0) throw Error("NCP constants must be positive");
        if (residual_aperture <= 0) throw Error("residual aperture must be positive");
    }
};

}  // namespace dfm
