// Block-banded inverse-covariance noise models.
//
// The inverse covariance of a stacked error sequence e_{1:K} (block
// dimension M) is parameterized as R^{-1} = S^T W S, where W is block
// diagonal with SPD blocks W_k and S is unit lower triangular with
// correlation blocks S_{k,j} at block position (k, k-j), j = 1..b.
// Rows k <= b carry fewer correlation blocks (effective bandwidth k-1).
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "corrnoise/banded_matrix.hpp"

namespace corrnoise {

/// Per-measurement descriptor: landmark count, 2D sample mean of the
/// body-frame points, and the upper triangle (xx, xy, yy) of their 1/n
/// sample covariance.
struct Feature {
    Eigen::Matrix<double, 6, 1> psi = Eigen::Matrix<double, 6, 1>::Zero();

    double count() const { return psi(0); }
    static constexpr int dim = 6;
};

/// Squared-exponential kernel weight matrix (PSD; diagonal in practice).
struct KernelWeights {
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();

    static KernelWeights zero() { return {}; }
    static KernelWeights diagonal(const Eigen::Matrix<double, 6, 1>& d) {
        KernelWeights w;
        w.M = d.asDiagonal();
        return w;
    }
};

/// h(psi_i, psi_*) = exp(-1/2 (psi_i - psi_*)^T M (psi_i - psi_*)), in (0, 1].
double kernel_eval(const Feature& psi_i, const Feature& psi_star, const KernelWeights& weights);

/// Groundtruth-evaluated residual sequence for training, one contiguous
/// recording. errors.col(i) is the i-th M-dimensional error; features are
/// optional and required only by the varying-noise learner.
struct ErrorDataset {
    Eigen::MatrixXd errors;         // M x N
    std::vector<Feature> features;  // empty or size N

    int block_dim() const { return static_cast<int>(errors.rows()); }
    int length() const { return static_cast<int>(errors.cols()); }
};

class BandedNoiseModel {
  public:
    struct Row {
        Eigen::MatrixXd W;               // M x M, SPD
        std::vector<Eigen::MatrixXd> S;  // S[j-1] = S_{k,j}, j = 1..min(b, k-1)
    };

    BandedNoiseModel() = default;
    BandedNoiseModel(int bandwidth, int block_dim, std::vector<Row> rows);

    int bandwidth() const { return bandwidth_; }
    int block_dim() const { return block_dim_; }
    int length() const { return static_cast<int>(rows_.size()); }
    const Row& row(int k) const { return rows_.at(k); }

    /// Validates block shapes, boundary structure, and that every W_k is SPD.
    void validate() const;

  private:
    int bandwidth_ = 0;
    int block_dim_ = 0;
    std::vector<Row> rows_;
};

/// Assembles R^{-1} = S^T W S as a symmetric banded matrix of size
/// M*K with scalar bandwidth b*M + M - 1. Throws ModelInvalidError if a
/// weight block is not SPD.
BandedSymmetricMatrix assemble_inverse_covariance(const BandedNoiseModel& model);

/// One factor of the likelihood factorization: for a window
/// e_{k-b':k} stacked oldest-first ((b'+1)*M entries) and correlation
/// blocks S = [S_{k,b'} ... S_{k,1}] (M x b'*M), returns
///   1/2 r^T W r - 1/2 ln|W|,  r = [S 1] e.
double factor_negloglik(const Eigen::VectorXd& window_errors, const Eigen::MatrixXd& S_blocks,
                        const Eigen::MatrixXd& W);

/// Sum of all factors (including the lower-bandwidth boundary factors) of
/// a model over an error sequence; equals the dense
/// 1/2 e^T R^{-1} e - 1/2 ln|R^{-1}|.
double model_negloglik(const BandedNoiseModel& model, const Eigen::MatrixXd& errors);

/// Whitening residuals r_k = e_k + sum_j S_{k,j} e_{k-j}, one column per k.
Eigen::MatrixXd model_residuals(const BandedNoiseModel& model, const Eigen::MatrixXd& errors);

// JSON (de)serialization; floats are written with 17 significant digits so
// round trips are bit-stable.
std::string model_to_json(const BandedNoiseModel& model);
BandedNoiseModel model_from_json(const std::string& text);
void save_model(const std::string& path, const BandedNoiseModel& model);
BandedNoiseModel load_model(const std::string& path);

}  // namespace corrnoise
