// SE(2) / se(2) primitives.
//
// Conventions used throughout the library:
//  - A twist xi = (rho1, rho2, phi) maps to the 3x3 generator
//        xi^ = [ 0  -phi  rho1 ]
//              [ phi  0   rho2 ]
//              [ 0    0    0   ]
//    and exp/log are the matrix exponential and its inverse on SE(2)
//    (right-handed rotation, counterclockwise positive).
//  - Pose2 stores a rotation angle in (-pi, pi] plus a translation; the
//    angle representation keeps the rotation exactly orthonormal under
//    arbitrarily long composition chains.
#pragma once

#include <Eigen/Core>

namespace corrnoise {

/// Tangent-space element (rho1, rho2, phi): metres, metres, radians
/// (or their per-second rates when used as a velocity).
using Twist2 = Eigen::Vector3d;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

class Pose2 {
  public:
    Pose2() : theta_(0.0), t_(Eigen::Vector2d::Zero()) {}
    Pose2(double theta, const Eigen::Vector2d& t) : theta_(wrap_angle(theta)), t_(t) {}

    static Pose2 identity() { return Pose2(); }
    /// Builds from the serialized parameter order (x, y, theta).
    static Pose2 from_xytheta(double x, double y, double theta) {
        return Pose2(theta, Eigen::Vector2d(x, y));
    }

    double theta() const { return theta_; }
    const Eigen::Vector2d& translation() const { return t_; }
    Eigen::Matrix2d rotation() const;
    /// 3x3 homogeneous matrix.
    Eigen::Matrix3d matrix() const;

    /// Applies the transform to a point: R p + t.
    Eigen::Vector2d act(const Eigen::Vector2d& p) const;

  private:
    double theta_;
    Eigen::Vector2d t_;
};

/// exp of a twist; throws InvalidArgumentError on non-finite input.
Pose2 exp_se2(const Twist2& xi);

/// log of a pose; the returned angle lies in (-pi, pi] (ties at pi map to +pi).
Twist2 log_se2(const Pose2& T);

Pose2 compose(const Pose2& A, const Pose2& B);
Pose2 inverse(const Pose2& T);

/// 3x3 generator matrix of a twist.
Eigen::Matrix3d hat_se2(const Twist2& xi);

/// Adjoint of a pose: Ad(T) xi = (T exp(xi^) T^{-1})^vee.
Eigen::Matrix3d adjoint(const Pose2& T);

/// Little adjoint ad(xi) = d/dt Ad(exp(t xi)) at t = 0.
Eigen::Matrix3d ad_se2(const Twist2& xi);

// First-order BCH Jacobians:
//   log(exp(eta^) exp(xi^))^vee ~= xi + Jl_inv(xi) eta
//   log(exp(xi^) exp(eta^))^vee ~= xi + Jr_inv(xi) eta
Eigen::Matrix3d left_jacobian(const Twist2& xi);
Eigen::Matrix3d right_jacobian(const Twist2& xi);
Eigen::Matrix3d left_jacobian_inverse(const Twist2& xi);
Eigen::Matrix3d right_jacobian_inverse(const Twist2& xi);

}  // namespace corrnoise
