#include "corrnoise/banded_matrix.hpp"

#include <cassert>
#include <cmath>

#include "corrnoise/errors.hpp"

namespace corrnoise {

BandedSymmetricMatrix::BandedSymmetricMatrix(int n, int bandwidth)
    : n_(n), w_(std::min(bandwidth, n > 0 ? n - 1 : 0)) {
    if (n <= 0) throw InvalidArgumentError("BandedSymmetricMatrix: n must be positive");
    band_ = Eigen::MatrixXd::Zero(w_ + 1, n_);
}

double& BandedSymmetricMatrix::at(int i, int j) {
    assert(i >= j && i - j <= w_ && j >= 0 && i < n_);
    return band_(i - j, i);
}

double BandedSymmetricMatrix::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i - j > w_) return 0.0;
    return band_(i - j, i);
}

void BandedSymmetricMatrix::add_block(int row0, int col0, const Eigen::MatrixXd& block) {
    for (int r = 0; r < block.rows(); ++r) {
        for (int c = 0; c < block.cols(); ++c) {
            const int i = row0 + r, j = col0 + c;
            if (i < j) continue;
            at(i, j) += block(r, c);
        }
    }
}

Eigen::MatrixXd BandedSymmetricMatrix::get_block(int row0, int col0, int rows, int cols) const {
    Eigen::MatrixXd out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out(r, c) = get(row0 + r, col0 + c);
    return out;
}

Eigen::VectorXd BandedSymmetricMatrix::multiply(const Eigen::VectorXd& x) const {
    assert(x.size() == n_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
        y(i) += band_(0, i) * x(i);
        const int dmax = std::min(w_, i);
        for (int d = 1; d <= dmax; ++d) {
            const double v = band_(d, i);
            y(i) += v * x(i - d);
            y(i - d) += v * x(i);
        }
    }
    return y;
}

double BandedSymmetricMatrix::quadratic_form(const Eigen::VectorXd& x) const {
    assert(x.size() == n_);
    double q = 0.0;
    for (int i = 0; i < n_; ++i) {
        q += band_(0, i) * x(i) * x(i);
        const int dmax = std::min(w_, i);
        for (int d = 1; d <= dmax; ++d) q += 2.0 * band_(d, i) * x(i) * x(i - d);
    }
    return q;
}

Eigen::MatrixXd BandedSymmetricMatrix::to_dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
        const int dmax = std::min(w_, i);
        for (int d = 0; d <= dmax; ++d) {
            D(i, i - d) = band_(d, i);
            D(i - d, i) = band_(d, i);
        }
    }
    return D;
}

void BandedSymmetricMatrix::add_diagonal(double s) {
    band_.row(0).array() += s;
}

BandedCholesky::BandedCholesky(const BandedSymmetricMatrix& A) : n_(A.size()), w_(A.bandwidth()) {
    // Repack to column-wise band: band_(d, j) = A(j + d, j).
    band_ = Eigen::MatrixXd::Zero(w_ + 1, n_);
    for (int j = 0; j < n_; ++j) {
        const int dmax = std::min(w_, n_ - 1 - j);
        for (int d = 0; d <= dmax; ++d) band_(d, j) = A.band_(d, j + d);
    }
    for (int j = 0; j < n_; ++j) {
        const int kmin = std::max(0, j - w_);
        double diag = band_(0, j);
        for (int k = kmin; k < j; ++k) {
            const double l = band_(j - k, k);
            diag -= l * l;
        }
        if (!(diag > 0.0) || !std::isfinite(diag))
            throw ConditioningError("banded Cholesky: matrix not positive definite at pivot " +
                                    std::to_string(j));
        const double ljj = std::sqrt(diag);
        band_(0, j) = ljj;
        const int imax = std::min(n_ - 1, j + w_);
        for (int i = j + 1; i <= imax; ++i) {
            double s = band_(i - j, j);
            const int k0 = std::max({0, j - w_, i - w_});
            for (int k = k0; k < j; ++k) s -= band_(i - k, k) * band_(j - k, k);
            band_(i - j, j) = s / ljj;
        }
    }
}

Eigen::VectorXd BandedCholesky::solve(const Eigen::VectorXd& rhs) const {
    assert(rhs.size() == n_);
    Eigen::VectorXd y = rhs;
    // Forward: L y = rhs
    for (int j = 0; j < n_; ++j) {
        y(j) /= band_(0, j);
        const int imax = std::min(n_ - 1, j + w_);
        for (int i = j + 1; i <= imax; ++i) y(i) -= band_(i - j, j) * y(j);
    }
    // Backward: L^T x = y
    for (int j = n_ - 1; j >= 0; --j) {
        const int imax = std::min(n_ - 1, j + w_);
        for (int i = j + 1; i <= imax; ++i) y(j) -= band_(i - j, j) * y(i);
        y(j) /= band_(0, j);
    }
    return y;
}

double BandedCholesky::log_det_half() const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += std::log(band_(0, j));
    return s;
}

BandedSymmetricMatrix BandedCholesky::sparse_inverse() const {
    // Takahashi recursion on A = L~ D L~^T with L~ unit lower:
    //   Z(i, j) = delta_ij / d_i - sum_{k > i} L~(k, i) Z(k, j),  j >= i,
    // where the sum runs over the band of column i and every needed Z
    // entry is itself in-band.
    BandedSymmetricMatrix Z(n_, w_);
    for (int i = n_ - 1; i >= 0; --i) {
        const double lii = band_(0, i);
        const int kmax = std::min(n_ - 1, i + w_);
        for (int j = std::min(n_ - 1, i + w_); j >= i; --j) {
            double s = 0.0;
            for (int k = i + 1; k <= kmax; ++k) s += (band_(k - i, i) / lii) * Z.get(k, j);
            if (i == j)
                Z.at(i, i) = 1.0 / (lii * lii) - s;
            else
                Z.at(j, i) = -s;
        }
    }
    return Z;
}

Eigen::VectorXd solve_banded(const BandedSymmetricMatrix& A, const Eigen::VectorXd& g) {
    return BandedCholesky(A).solve(g);
}

std::vector<Eigen::MatrixXd> takahashi_marginals(const BandedCholesky& factor, int block_dim) {
    const BandedSymmetricMatrix Z = factor.sparse_inverse();
    const int count = factor.size() / block_dim;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k)
        out.push_back(Z.get_block(k * block_dim, k * block_dim, block_dim, block_dim));
    return out;
}

}  // namespace corrnoise
