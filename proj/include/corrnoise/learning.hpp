// Supervised learning of block-banded inverse-covariance noise models.
//
// The constant learner fits (S_*, W_*) in closed form from groundtruth
// residuals. The varying learner re-weights every training window by a
// squared-exponential kernel on a 6-dim feature and evaluates the same
// closed forms, yielding a per-timestep prediction; the kernel weight
// matrix is trained by maximizing a leave-one-out likelihood.
#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "corrnoise/noise_model.hpp"

namespace corrnoise {

/// Closed-form fit at one bandwidth. S = [S_b ... S_1] (M x b*M) applies to
/// a window stacked oldest-first; empty when bandwidth == 0.
struct ConstantFit {
    int bandwidth = 0;
    Eigen::MatrixXd S;  // M x bandwidth*M
    Eigen::MatrixXd W;  // M x M, SPD
};

/// Maximum-likelihood constant fit over one or more contiguous recordings
/// (windows never straddle recording boundaries).
/// Throws InsufficientDataError unless sum(N_seg - b) >= 10*M*(b+1),
/// RankDeficiencyError if the past-window Gram matrix is near singular.
ConstantFit learn_constant(std::span<const ErrorDataset> data, int bandwidth);
ConstantFit learn_constant(const ErrorDataset& data, int bandwidth);

/// Fits for the boundary factors: bandwidths 0 .. b-1 in order.
std::vector<ConstantFit> learn_boundary(std::span<const ErrorDataset> data, int bandwidth);

/// Realizes constant fits as a length-K model; rows k <= b use the
/// matching lower-bandwidth boundary fit.
BandedNoiseModel make_banded_model(const ConstantFit& interior,
                                   const std::vector<ConstantFit>& boundary, int length);

/// Splits a fit into one model row (S_{k,j} = columns of S, newest = S_1).
BandedNoiseModel::Row fit_to_row(const ConstantFit& fit);

struct PredictionResult {
    ConstantFit fit;
    bool fell_back = false;  // kernel support below threshold; constant fit returned
};

/// Kernel-weighted prediction of (S(psi), W(psi)). Precomputes per-window
/// moments once; predictions for distinct targets are independent and
/// const, so they may run in parallel.
class VaryingNoisePredictor {
  public:
    VaryingNoisePredictor(std::vector<ErrorDataset> data, int bandwidth,
                          const KernelWeights& weights);

    int bandwidth() const { return bandwidth_; }
    int block_dim() const { return block_dim_; }
    const KernelWeights& kernel() const { return weights_; }

    /// Prediction at the full bandwidth. Falls back to the unweighted
    /// constant fit when the kernel mass H < 5*M*(b+1).
    PredictionResult predict(const Feature& psi) const;

    /// Prediction at a smaller bandwidth (boundary rows).
    PredictionResult predict_at_bandwidth(const Feature& psi, int bandwidth) const;

    /// Per-timestep model for a test sequence: row k uses
    /// predict_at_bandwidth(psi_k, min(b, k)).
    BandedNoiseModel predict_model(std::span<const Feature> features) const;

  private:
    int bandwidth_, block_dim_;
    KernelWeights weights_;
    std::vector<ErrorDataset> data_;
    Eigen::MatrixXd windows_;                        // d x Nw, [past; current]
    Eigen::MatrixXd packed_moments_;                 // d(d+1)/2 x Nw
    Eigen::Matrix<double, 6, Eigen::Dynamic> feats_;  // 6 x Nw
    ConstantFit constant_fallback_;
};

struct KernelTrainConfig {
    int grid_points = 7;    // log-spaced candidates per dimension and pass
    int passes = 2;         // coordinate-descent refinement passes
    double exp_min = -4.0;  // log10 bounds of the normalized weight grid
    double exp_max = 2.0;
    int max_targets = 128;  // held-out evaluation points (evenly spaced)
    int min_train_length = 200;
};

/// Trains a diagonal kernel weight matrix by multi-start coordinate descent
/// on the leave-one-out negative log-likelihood. Feature dimensions with
/// zero variance are pinned to weight 0; if all are degenerate, returns
/// M = 0 with a warning.
KernelWeights train_kernel_weights(std::span<const ErrorDataset> data, int bandwidth,
                                   const KernelTrainConfig& config = {});

/// SPD inverse with the library-wide jitter policy: on Cholesky failure add
/// 1e-10 * trace/M to the diagonal once and retry, then throw
/// ConditioningError.
Eigen::MatrixXd invert_spd_with_jitter(const Eigen::MatrixXd& A, const char* context);

}  // namespace corrnoise
