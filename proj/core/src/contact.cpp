#include "dfm2d/contact.hpp"

#include <cmath>

namespace dfm {

ContactBranch classify_contact(const ContactPointState& s, double c_n, double c_t, double F)
{
    // Ties classify as contact so the all-zero state starts sticking.
    const double r_n = -s.sigma_n - c_n * s.jump_n;
    if (r_n < 0) return {ContactMode::Open, 1};
    const double bound = F * r_n;
    const double trial = s.sigma_t - c_t * s.djump_t;
    if (std::abs(trial) <= bound) return {ContactMode::Stick, trial >= 0 ? 1 : -1};
    return {ContactMode::Slip, trial >= 0 ? 1 : -1};
}

Eigen::Vector2d contact_residual(const ContactPointState& s, double c_n, double c_t, double F)
{
    const ContactBranch b = classify_contact(s, c_n, c_t, F);
    switch (b.mode) {
        case ContactMode::Open:
            return {s.sigma_t, s.sigma_n};
        case ContactMode::Stick:
            return {c_t * s.djump_t, c_n * s.jump_n};
        case ContactMode::Slip:
            return {s.sigma_t + b.slip_sign * F * (s.sigma_n + c_n * s.jump_n),
                    c_n * s.jump_n};
    }
    return {0, 0};
}

ContactRows contact_rows(const ContactBranch& branch, double jump_t_prev, double c_n,
                         double c_t, double F)
{
    ContactRows out;
    out.coef_sigma.setZero();
    out.coef_jump.setZero();
    out.rhs.setZero();
    switch (branch.mode) {
        case ContactMode::Open:
            out.coef_sigma(0, 0) = 1.0;  // sigma_t = 0
            out.coef_sigma(1, 1) = 1.0;  // sigma_n = 0
            break;
        case ContactMode::Stick:
            out.coef_jump(0, 0) = c_t;  // jump_t = jump_t_prev
            out.rhs(0) = -c_t * jump_t_prev;
            out.coef_jump(1, 1) = c_n;  // jump_n = 0
            break;
        case ContactMode::Slip:
            out.coef_sigma(0, 0) = 1.0;
            out.coef_sigma(0, 1) = branch.slip_sign * F;
            out.coef_jump(0, 1) = branch.slip_sign * F * c_n;
            out.coef_jump(1, 1) = c_n;  // jump_n = 0
            break;
    }
    return out;
}

}  // namespace dfm
