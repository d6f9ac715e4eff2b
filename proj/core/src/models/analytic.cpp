#include "dfm2d/models/analytic.hpp"

#include <cmath>

#include "dfm2d/errors.hpp"

namespace dfm {

void SneddonConfig::validate() const
{
    if (!(nu > 0 && nu < 0.5)) throw ConfigError("sneddon: nu must lie in (0, 0.5)");
    if (!(shear_g > 0 && length > 0)) throw ConfigError("sneddon: G and L must be positive");
}

double sneddon_jump(double d_f, const SneddonConfig& cfg)
{
    cfg.validate();
    const double half = 0.5 * cfg.length;
    if (std::abs(d_f) > half) throw Error("sneddon_jump: |d_f| exceeds L/2");
    const double s = 1.0 - d_f * d_f / (half * half);
    return (1.0 - cfg.nu) * cfg.p0 * cfg.length / cfg.shear_g * std::sqrt(std::max(0.0, s));
}

Vec2 displacement_discontinuity_field(const Vec2& x, double a, const Vec2& dd, double nu)
{
    const double xx = x.x(), yy = x.y();
    const double r1s = (xx - a) * (xx - a) + yy * yy;
    const double r2s = (xx + a) * (xx + a) + yy * yy;
    const double th1 = std::atan2(yy, xx - a);
    const double th2 = std::atan2(yy, xx + a);
    const double pref = 1.0 / (4.0 * M_PI * (1.0 - nu));
    const double f2 = pref * 0.5 * (std::log(r1s) - std::log(r2s));
    const double f3 = -pref * (th1 - th2);
    const double f4 = pref * (yy / r1s - yy / r2s);
    const double f5 = pref * ((xx - a) / r1s - (xx + a) / r2s);

    const double dx = dd.x(), dy = dd.y();
    return Vec2(dx * (2 * (1 - nu) * f3 - yy * f5) + dy * (-(1 - 2 * nu) * f2 - yy * f4),
                dx * ((1 - 2 * nu) * f2 - yy * f4) + dy * (2 * (1 - nu) * f3 - yy * f5));
}

Vec2 sneddon_boundary_displacement(const Vec2& x, const SneddonConfig& cfg)
{
    cfg.validate();
    const Vec2 t{std::cos(cfg.beta), std::sin(cfg.beta)};
    const Vec2 n{-t.y(), t.x()};
    const Segment crack{cfg.center - 0.5 * cfg.length * t, cfg.center + 0.5 * cfg.length * t};
    if (point_segment_distance(x, crack) < 1e-12 * cfg.length)
        throw Error("sneddon_boundary_displacement: point lies on the crack");

    const int ne = cfg.num_elements;
    const double a_e = 0.5 * cfg.length / ne;
    Vec2 u{0, 0};
    for (int i = 0; i < ne; ++i) {
        const double s = -0.5 * cfg.length + (2 * i + 1) * a_e;  // element center offset
        const Vec2 xc = cfg.center + s * t;
        // local frame of the element
        const Vec2 d = x - xc;
        const Vec2 xl{t.dot(d), n.dot(d)};
        // opening carried by this element; the discontinuity is lower minus
        // upper face, so an opening crack has negative normal component
        const Vec2 dd{0.0, -sneddon_jump(s, cfg)};
        const Vec2 ul = displacement_discontinuity_field(xl, a_e, dd, cfg.nu);
        u += ul.x() * t + ul.y() * n;
    }
    return u;
}

double MandelConfig::undrained_nu() const
{
    const double bsk = skempton();
    return (3 * nu + alpha * bsk * (1 - 2 * nu)) / (3 - alpha * bsk * (1 - 2 * nu));
}

double MandelConfig::skempton() const
{
    const double ku = bulk() + alpha * alpha * biot_modulus;
    return alpha * biot_modulus / ku;
}

double MandelConfig::consolidation() const
{
    const double kv = bulk() + 4.0 * shear_g() / 3.0;  // uniaxial drained modulus
    const double storage = 1.0 / biot_modulus + alpha * alpha / kv;
    return permeability / (viscosity * storage);
}

double MandelConfig::initial_pressure() const
{
    return force * skempton() * (1.0 + undrained_nu()) / (3.0 * a);
}

std::vector<double> mandel_roots(double w, int n)
{
    if (!(w > 1.0)) throw Error("mandel_roots: needs w > 1");
    std::vector<double> roots;
    for (int k = 0; k < n; ++k) {
        double lo = k * M_PI + 1e-12;
        double hi = k * M_PI + M_PI / 2 - 1e-12;
        auto f = [&](double x) { return std::tan(x) - w * x; };
        // f(lo) < 0 (tan below the line), f(hi) -> +inf
        double flo = f(lo);
        if (flo > 0) throw Error("mandel_roots: bracketing failed");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid) > 0)
                hi = mid;
            else
                lo = mid;
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

MandelPoint mandel_solution(double x, double t, const MandelConfig& cfg, int n_terms)
{
    if (x < 0 || x > cfg.a || t <= 0) throw Error("mandel_solution: needs 0<=x<=a, t>0");
    const double nu = cfg.nu, nuu = cfg.undrained_nu();
    const double g = cfg.shear_g();
    const double w = (1.0 - nu) / (nuu - nu);
    const auto roots = mandel_roots(w, n_terms);
    const double c = cfg.consolidation();
    const double f = cfg.force, a = cfg.a;

    double p = 0, ux_series = 0, ux_coeff_series = 0;
    for (double an : roots) {
        const double s = std::sin(an), co = std::cos(an);
        const double den = an - s * co;
        const double decay = std::exp(-an * an * c * t / (a * a));
        p += s / den * (std::cos(an * x / a) - co) * decay;
        ux_series += co / den * std::sin(an * x / a) * decay;
        ux_coeff_series += s * co / den * decay;
    }
    MandelPoint out;
    out.pressure = 2.0 * f * cfg.skempton() * (1.0 + nuu) / (3.0 * a) * p;
    out.ux = (f * nu / (2 * g * a) - f * nuu / (g * a) * ux_coeff_series) * x
           + f / g * ux_series;
    return out;
}

double mandel_top_displacement(double t, const MandelConfig& cfg, int n_terms)
{
    const double nu = cfg.nu, nuu = cfg.undrained_nu();
    const double g = cfg.shear_g();
    const double w = (1.0 - nu) / (nuu - nu);
    const auto roots = mandel_roots(w, n_terms);
    const double c = cfg.consolidation();
    double series = 0;
    for (double an : roots) {
        const double s = std::sin(an), co = std::cos(an);
        series += s * co / (an - s * co) * std::exp(-an * an * c * t / (cfg.a * cfg.a));
    }
    return (-cfg.force * (1 - nu) / (2 * g * cfg.a)
            + cfg.force * (1 - nuu) / (g * cfg.a) * series)
         * cfg.b;
}

}  // namespace dfm
