// Symmetric banded matrices with Cholesky factorization, triangular
// solves, and Takahashi's recursion for the in-band entries of the
// inverse. Block-banded matrices of block dimension M and block
// bandwidth b are stored as scalar-banded with bandwidth b*M + M - 1.
#pragma once

#include <Eigen/Core>
#include <vector>

namespace corrnoise {

/// Lower-band storage of a symmetric n x n matrix with scalar bandwidth w:
/// entry (i, j) with 0 <= i - j <= w lives at band(i - j, i).
class BandedSymmetricMatrix {
  public:
    BandedSymmetricMatrix(int n, int bandwidth);

    int size() const { return n_; }
    int bandwidth() const { return w_; }

    /// Mutable in-band access; requires 0 <= i - j <= w.
    double& at(int i, int j);
    /// Symmetric read access; returns 0 outside the band.
    double get(int i, int j) const;

    void set_zero() { band_.setZero(); }

    /// Adds a dense block with top-left corner (row0, col0). Entries that
    /// fall strictly above the diagonal are ignored (symmetry implied), so
    /// callers add the diagonal block plus the lower off-diagonal blocks.
    void add_block(int row0, int col0, const Eigen::MatrixXd& block);

    /// Reads the dense block with top-left corner (row0, col0), using
    /// symmetry for above-band entries.
    Eigen::MatrixXd get_block(int row0, int col0, int rows, int cols) const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    double quadratic_form(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd to_dense() const;

    /// Adds s to every diagonal entry.
    void add_diagonal(double s);

  private:
    int n_, w_;
    Eigen::MatrixXd band_;  // (w+1) x n

    friend class BandedCholesky;
};

/// Lower Cholesky factor of a banded SPD matrix; throws ConditioningError
/// if the matrix is not positive definite.
class BandedCholesky {
  public:
    explicit BandedCholesky(const BandedSymmetricMatrix& A);

    int size() const { return n_; }
    int bandwidth() const { return w_; }

    /// Solves A x = rhs.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    /// Sum of log of the factor diagonal; log|A| = 2 * log_det_half().
    double log_det_half() const;

    /// In-band entries of A^{-1} via Takahashi's recursion. Off-band
    /// entries of the inverse are not computed.
    BandedSymmetricMatrix sparse_inverse() const;

    /// Entry (i, j) of the factor, 0 <= i - j <= w.
    double factor_at(int i, int j) const { return band_(i - j, j); }

  private:
    int n_, w_;
    Eigen::MatrixXd band_;  // band_(d, j) = L(j + d, j), column-wise
};

/// Convenience: factor and solve A x = g.
Eigen::VectorXd solve_banded(const BandedSymmetricMatrix& A, const Eigen::VectorXd& g);

/// Diagonal blocks of A^{-1} of size block_dim, via Takahashi's recursion.
std::vector<Eigen::MatrixXd> takahashi_marginals(const BandedCholesky& factor, int block_dim);

}  // namespace corrnoise
