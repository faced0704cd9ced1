#include "corrnoise/se2.hpp"

#include <cmath>
#include <numbers>

#include "corrnoise/errors.hpp"

namespace corrnoise {

namespace {

constexpr double kPi = std::numbers::pi;
// Below this angle the trigonometric coefficients switch to series form.
constexpr double kSmallAngle = 1e-7;

// Skew generator of so(2).
const Eigen::Matrix2d kG = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

}  // namespace

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // (-pi, pi] up to the -pi boundary
    if (a <= -kPi) a = kPi;
    return a;
}

Eigen::Matrix2d Pose2::rotation() const {
    const double c = std::cos(theta_), s = std::sin(theta_);
    Eigen::Matrix2d R;
    R << c, -s, s, c;
    return R;
}

Eigen::Matrix3d Pose2::matrix() const {
    Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
    M.topLeftCorner<2, 2>() = rotation();
    M.topRightCorner<2, 1>() = t_;
    return M;
}

Eigen::Vector2d Pose2::act(const Eigen::Vector2d& p) const {
    return rotation() * p + t_;
}

Pose2 exp_se2(const Twist2& xi) {
    if (!xi.allFinite()) throw InvalidArgumentError("exp_se2: non-finite twist");
    const double phi = xi.z();
    double a, b;  // V = [a -b; b a], translation = V * rho
    if (std::abs(phi) < kSmallAngle) {
        const double p2 = phi * phi;
        a = 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
        b = phi / 2.0 - p2 * phi / 24.0;
    } else {
        const double sh = std::sin(phi / 2.0);
        a = std::sin(phi) / phi;
        b = 2.0 * sh * sh / phi;  // (1 - cos phi) / phi, cancellation-free
    }
    const Eigen::Vector2d rho = xi.head<2>();
    const Eigen::Vector2d t(a * rho.x() - b * rho.y(), b * rho.x() + a * rho.y());
    return Pose2(phi, t);
}

Twist2 log_se2(const Pose2& T) {
    const double phi = T.theta();
    double a;  // V^{-1} = [a b; -b a], b = phi/2
    if (std::abs(phi) < kSmallAngle) {
        const double p2 = phi * phi;
        a = 1.0 - p2 / 12.0 - p2 * p2 / 720.0;
    } else {
        const double h = phi / 2.0;
        a = h * std::cos(h) / std::sin(h);
    }
    const double b = phi / 2.0;
    const Eigen::Vector2d& t = T.translation();
    Twist2 xi;
    xi << a * t.x() + b * t.y(), -b * t.x() + a * t.y(), phi;
    return xi;
}

Pose2 compose(const Pose2& A, const Pose2& B) {
    return Pose2(A.theta() + B.theta(), A.rotation() * B.translation() + A.translation());
}

Pose2 inverse(const Pose2& T) {
    const Eigen::Matrix2d Rt = T.rotation().transpose();
    return Pose2(-T.theta(), -(Rt * T.translation()));
}

Eigen::Matrix3d hat_se2(const Twist2& xi) {
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    H(0, 1) = -xi.z();
    H(1, 0) = xi.z();
    H(0, 2) = xi.x();
    H(1, 2) = xi.y();
    return H;
}

Eigen::Matrix3d adjoint(const Pose2& T) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    A.topLeftCorner<2, 2>() = T.rotation();
    A.topRightCorner<2, 1>() = -kG * T.translation();
    return A;
}

Eigen::Matrix3d ad_se2(const Twist2& xi) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    A.topLeftCorner<2, 2>() = xi.z() * kG;
    A(0, 2) = xi.y();
    A(1, 2) = -xi.x();
    return A;
}

// The se(2) little adjoint satisfies ad^3 = -phi^2 ad, so the Jacobian
// series collapse to quadratics in ad.
Eigen::Matrix3d right_jacobian(const Twist2& xi) {
    const double phi = xi.z();
    double a, b;
    if (std::abs(phi) < kSmallAngle) {
        const double p2 = phi * phi;
        a = 0.5 - p2 / 24.0;
        b = 1.0 / 6.0 - p2 / 120.0;
    } else {
        const double sh = std::sin(phi / 2.0);
        a = 2.0 * sh * sh / (phi * phi);          // (1 - cos phi) / phi^2
        b = (phi - std::sin(phi)) / (phi * phi * phi);
    }
    const Eigen::Matrix3d ad = ad_se2(xi);
    return Eigen::Matrix3d::Identity() - a * ad + b * ad * ad;
}

Eigen::Matrix3d left_jacobian(const Twist2& xi) {
    return right_jacobian(-xi);
}

Eigen::Matrix3d right_jacobian_inverse(const Twist2& xi) {
    const double phi = xi.z();
    double c;
    if (std::abs(phi) < kSmallAngle) {
        const double p2 = phi * phi;
        c = 1.0 / 12.0 + p2 / 720.0;
    } else {
        const double h = phi / 2.0;
        // 1/phi^2 - cot(phi/2) / (2 phi)
        c = 1.0 / (phi * phi) - std::cos(h) / (2.0 * phi * std::sin(h));
    }
    const Eigen::Matrix3d ad = ad_se2(xi);
    return Eigen::Matrix3d::Identity() + 0.5 * ad + c * ad * ad;
}

Eigen::Matrix3d left_jacobian_inverse(const Twist2& xi) {
    return right_jacobian_inverse(-xi);
}

}  // namespace corrnoise
