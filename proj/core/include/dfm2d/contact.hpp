#pragma once

#include <Eigen/Dense>

#include "dfm2d/fv_params.hpp"

namespace dfm {

enum class ContactMode { Open, Stick, Slip };

/// Sign conventions (opening positive): the displacement jump is
/// plus-side minus minus-side displacement, its normal component positive
/// when the fracture opens. Contact pressure sigma_n <= 0 in compression.
/// The tangential traction on the plus wall is sigma_t; friction makes it
/// antiparallel to the tangential slip increment.
struct ContactPointState {
    double sigma_n, sigma_t;  // contact traction, local frame
    double jump_n, djump_t;   // normal jump, tangential jump increment
};

struct ContactBranch {
    ContactMode mode;
    int slip_sign;  // sign of the trial traction, meaningful in slip
};

/// Active-set classification of one fracture cell. The penalized normal
/// r_n = -sigma_n - c_n jump_n selects open (r_n <= 0) versus contact; in
/// contact, the trial traction sigma_t - c_t djump_t against the friction
/// bound F r_n separates stick from slip.
ContactBranch classify_contact(const ContactPointState& s, double c_n, double c_t, double F);

/// Contact residual of the semi-smooth scheme, self-classifying; jump-valued
/// rows are scaled by the NCP constants so all rows carry traction units:
///   open : (sigma_t, sigma_n) = 0
///   stick: (c_t djump_t, c_n jump_n) = 0
///   slip : (sigma_t + sign(trial) F (sigma_n + c_n jump_n), c_n jump_n) = 0
/// Its zero set coincides exactly with the contact conditions: the
/// opening/normal-traction complementarity and Coulomb friction with slip
/// antiparallel to the tangential traction.
Eigen::Vector2d contact_residual(const ContactPointState& s, double c_n, double c_t, double F);

/// Affine row coefficients of the contact equations on a frozen branch:
/// residual = coef_sigma (sigma_t, sigma_n)^T + coef_jump (jump_t, jump_n)^T
/// + rhs, where jump_t is the absolute tangential jump (the increment is
/// formed against jump_t_prev inside rhs).
struct ContactRows {
    Eigen::Matrix2d coef_sigma;  // rows: (tangential eq, normal eq)
    Eigen::Matrix2d coef_jump;
    Eigen::Vector2d rhs;
};

ContactRows contact_rows(const ContactBranch& branch, double jump_t_prev, double c_n,
                         double c_t, double F);

}  // namespace dfm
