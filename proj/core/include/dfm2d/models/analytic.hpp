#pragma once

#include "dfm2d/geom.hpp"
#include "dfm2d/linalg.hpp"

namespace dfm {

/// Uniformly pressurized line crack in an infinite elastic plane.
struct SneddonConfig {
    double nu = 0.25;      // Poisson ratio, in (0, 0.5)
    double shear_g = 1.0;  // shear modulus
    double p0 = 1e-4;      // internal pressure
    double length = 0.3;   // fracture length L
    double beta = 0.0;     // angle with the horizontal, radians
    Vec2 center{0.5, 0.5};
    int num_elements = 400;  // subdivision of the superposition

    void validate() const;
};

/// Relative normal displacement at signed distance d_f from the center:
/// (1-nu) p0 L / G * sqrt(1 - d_f^2/(L/2)^2). Throws outside |d_f| <= L/2.
double sneddon_jump(double d_f, const SneddonConfig& cfg);

/// Displacement field of one constant displacement-discontinuity element of
/// half-length a on the local x-axis; dd = (shear, normal) discontinuity,
/// as the lower-face minus upper-face displacement.
Vec2 displacement_discontinuity_field(const Vec2& x_local, double a, const Vec2& dd,
                                      double nu);

/// Far-field displacement of the pressurized crack: superposition of
/// constant-discontinuity elements carrying the analytic opening profile.
/// Throws when x lies on the crack line.
Vec2 sneddon_boundary_displacement(const Vec2& x, const SneddonConfig& cfg);

/// Mandel's consolidation problem on the quarter domain [0,a]x[0,b].
struct MandelConfig {
    double a = 100.0, b = 10.0;
    double force = 6e8;          // applied load magnitude F (per unit thickness)
    double young = 5.94e9;
    double nu = 0.2;
    double alpha = 1.0;          // Biot coefficient
    double biot_modulus = 1.65e10;
    double permeability = 9.87e-14;
    double viscosity = 1e-3;

    double shear_g() const { return young / (2 * (1 + nu)); }
    double bulk() const { return young / (3 * (1 - 2 * nu)); }
    double undrained_nu() const;
    double skempton() const;
    /// Consolidation coefficient c = k / (mu (1/M + alpha^2 / K_v)).
    double consolidation() const;
    /// Initial (undrained) uniform pressure F B (1+nu_u) / (3a).
    double initial_pressure() const;
};

/// First n roots of tan(x) = w x with w > 1, one per interval
/// ((k-1) pi, (k-1) pi + pi/2).
std::vector<double> mandel_roots(double w, int n);

/// Series solution: pressure and horizontal displacement at position x in
/// [0, a] and time t > 0, truncated at cfg-independent n_terms.
struct MandelPoint {
    double pressure;
    double ux;
};
MandelPoint mandel_solution(double x, double t, const MandelConfig& cfg, int n_terms = 200);

/// Vertical displacement of the top boundary (y = b) at time t.
double mandel_top_displacement(double t, const MandelConfig& cfg, int n_terms = 200);

}  // namespace dfm
