#include "corrnoise/learning.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <spdlog/spdlog.h>

#include "corrnoise/errors.hpp"

namespace corrnoise {

namespace {

constexpr double kCondLimit = 1e12;

// Packed lower triangle of a symmetric d x d matrix, column-major.
int packed_size(int d) { return d * (d + 1) / 2; }

void pack_outer(const Eigen::VectorXd& w, Eigen::Ref<Eigen::VectorXd> out) {
    const int d = static_cast<int>(w.size());
    int idx = 0;
    for (int c = 0; c < d; ++c)
        for (int r = c; r < d; ++r) out(idx++) = w(r) * w(c);
}

Eigen::MatrixXd unpack_sym(const Eigen::VectorXd& p, int d) {
    Eigen::MatrixXd O(d, d);
    int idx = 0;
    for (int c = 0; c < d; ++c)
        for (int r = c; r < d; ++r) {
            O(r, c) = p(idx);
            O(c, r) = p(idx);
            ++idx;
        }
    return O;
}

// Closed-form (S, W) from the weighted window moment matrix
// O = sum_i h_i [past_i; e_i] [past_i; e_i]^T and the weight mass `scale`.
ConstantFit fit_from_moments(const Eigen::MatrixXd& O, double scale, int bandwidth,
                             int block_dim) {
    const int M = block_dim;
    const int p = bandwidth * M;
    ConstantFit fit;
    fit.bandwidth = bandwidth;
    if (bandwidth == 0) {
        fit.S.resize(M, 0);
        fit.W = scale * invert_spd_with_jitter(O, "sample covariance");
        return fit;
    }
    const Eigen::MatrixXd P = O.topLeftCorner(p, p);
    const Eigen::MatrixXd C = O.bottomLeftCorner(M, p);
    const Eigen::MatrixXd E = O.bottomRightCorner(M, M);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kCondLimit) {
        const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
        throw RankDeficiencyError("learn: past-window Gram matrix is near singular", cond);
    }
    fit.S = -(P.llt().solve(C.transpose())).transpose();
    Eigen::MatrixXd Rsum = E + C * fit.S.transpose();  // = E - C P^{-1} C^T
    Rsum = 0.5 * (Rsum + Rsum.transpose()).eval();
    fit.W = scale * invert_spd_with_jitter(Rsum, "residual covariance");
    return fit;
}

// Builds the stacked window matrix (d x Nw, [e_{i-b}; ...; e_i]) over all
// recordings; optionally the matching features of the newest sample.
struct Windows {
    Eigen::MatrixXd stacked;                          // d x Nw
    Eigen::Matrix<double, 6, Eigen::Dynamic> feats;   // 6 x Nw (or 6 x 0)
};

Windows build_windows(std::span<const ErrorDataset> data, int bandwidth, bool need_features) {
    if (data.empty()) throw InsufficientDataError("learn: no training data");
    const int M = data.front().block_dim();
    const int d = (bandwidth + 1) * M;
    int total = 0;
    for (const auto& ds : data) {
        if (ds.block_dim() != M)
            throw InvalidArgumentError("learn: recordings have mismatched block dimensions");
        if (!ds.errors.allFinite())
            throw InvalidArgumentError("learn: error dataset contains non-finite values");
        if (need_features && static_cast<int>(ds.features.size()) != ds.length())
            throw InvalidArgumentError("learn: features missing or wrong length");
        total += std::max(0, ds.length() - bandwidth);
    }
    Windows w;
    w.stacked.resize(d, total);
    if (need_features) w.feats.resize(6, total);
    int col = 0;
    for (const auto& ds : data) {
        for (int i = bandwidth; i < ds.length(); ++i) {
            for (int j = 0; j <= bandwidth; ++j)
                w.stacked.col(col).segment(j * M, M) = ds.errors.col(i - bandwidth + j);
            if (need_features) w.feats.col(col) = ds.features[i].psi;
            ++col;
        }
    }
    return w;
}

int identifiability_floor(int block_dim, int bandwidth) { return 10 * block_dim * (bandwidth + 1); }
int support_floor(int block_dim, int bandwidth) { return 5 * block_dim * (bandwidth + 1); }

}  // namespace

Eigen::MatrixXd invert_spd_with_jitter(const Eigen::MatrixXd& A, const char* context) {
    const int n = static_cast<int>(A.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success)
        return llt.solve(Eigen::MatrixXd::Identity(n, n));
    const double jitter = 1e-10 * A.trace() / n;
    Eigen::MatrixXd Aj = A + jitter * Eigen::MatrixXd::Identity(n, n);
    llt.compute(Aj);
    if (llt.info() == Eigen::Success) {
        spdlog::debug("invert_spd: applied jitter {:.3e} to {}", jitter, context);
        return llt.solve(Eigen::MatrixXd::Identity(n, n));
    }
    throw ConditioningError(std::string("SPD inversion failed after jitter retry: ") + context);
}

ConstantFit learn_constant(std::span<const ErrorDataset> data, int bandwidth) {
    if (bandwidth < 0) throw InvalidArgumentError("learn_constant: bandwidth must be >= 0");
    const int M = data.empty() ? 0 : data.front().block_dim();
    const Windows w = build_windows(data, bandwidth, /*need_features=*/false);
    const int Nw = static_cast<int>(w.stacked.cols());
    if (Nw < identifiability_floor(M, bandwidth))
        throw InsufficientDataError(
            "learn_constant: " + std::to_string(Nw) + " windows < identifiability floor " +
            std::to_string(identifiability_floor(M, bandwidth)) + " for bandwidth " +
            std::to_string(bandwidth));
    const int d = (bandwidth + 1) * M;
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(d, d);
    O.selfadjointView<Eigen::Lower>().rankUpdate(w.stacked, 1.0);
    O.triangularView<Eigen::StrictlyUpper>() = O.transpose();
    return fit_from_moments(O, static_cast<double>(Nw), bandwidth, M);
}

ConstantFit learn_constant(const ErrorDataset& data, int bandwidth) {
    return learn_constant(std::span<const ErrorDataset>(&data, 1), bandwidth);
}

std::vector<ConstantFit> learn_boundary(std::span<const ErrorDataset> data, int bandwidth) {
    std::vector<ConstantFit> fits;
    fits.reserve(bandwidth);
    for (int b = 0; b < bandwidth; ++b) fits.push_back(learn_constant(data, b));
    return fits;
}

BandedNoiseModel::Row fit_to_row(const ConstantFit& fit) {
    const int M = static_cast<int>(fit.W.rows());
    BandedNoiseModel::Row row;
    row.W = fit.W;
    row.S.resize(fit.bandwidth);
    for (int j = 1; j <= fit.bandwidth; ++j)
        row.S[j - 1] = fit.S.middleCols((fit.bandwidth - j) * M, M);
    return row;
}

BandedNoiseModel make_banded_model(const ConstantFit& interior,
                                   const std::vector<ConstantFit>& boundary, int length) {
    const int b = interior.bandwidth;
    if (static_cast<int>(boundary.size()) < std::min(b, length))
        throw InvalidArgumentError("make_banded_model: missing boundary fits");
    std::vector<BandedNoiseModel::Row> rows;
    rows.reserve(length);
    for (int k = 0; k < length; ++k)
        rows.push_back(k < b ? fit_to_row(boundary[k]) : fit_to_row(interior));
    return BandedNoiseModel(b, static_cast<int>(interior.W.rows()), std::move(rows));
}

VaryingNoisePredictor::VaryingNoisePredictor(std::vector<ErrorDataset> data, int bandwidth,
                                             const KernelWeights& weights)
    : bandwidth_(bandwidth), weights_(weights), data_(std::move(data)) {
    std::span<const ErrorDataset> span(data_);
    block_dim_ = data_.empty() ? 0 : data_.front().block_dim();
    const Windows w = build_windows(span, bandwidth_, /*need_features=*/true);
    windows_ = w.stacked;
    feats_ = w.feats;
    const int Nw = static_cast<int>(windows_.cols());
    if (Nw < identifiability_floor(block_dim_, bandwidth_))
        throw InsufficientDataError("VaryingNoisePredictor: not enough training windows");
    const int d = (bandwidth_ + 1) * block_dim_;
    packed_moments_.resize(packed_size(d), Nw);
    for (int i = 0; i < Nw; ++i) pack_outer(windows_.col(i), packed_moments_.col(i));
    constant_fallback_ = learn_constant(span, bandwidth_);
}

PredictionResult VaryingNoisePredictor::predict(const Feature& psi) const {
    const int Nw = static_cast<int>(windows_.cols());
    Eigen::VectorXd h(Nw);
    const Eigen::Matrix<double, 6, 6>& Mw = weights_.M;
    for (int i = 0; i < Nw; ++i) {
        const Eigen::Matrix<double, 6, 1> dlt = feats_.col(i) - psi.psi;
        h(i) = std::exp(-0.5 * dlt.dot(Mw * dlt));
    }
    const double H = h.sum();
    if (H < support_floor(block_dim_, bandwidth_)) {
        spdlog::warn("predict: kernel support H={:.2f} below floor {}; using constant model", H,
                     support_floor(block_dim_, bandwidth_));
        return {constant_fallback_, true};
    }
    const int d = (bandwidth_ + 1) * block_dim_;
    const Eigen::VectorXd packed = packed_moments_ * h;
    return {fit_from_moments(unpack_sym(packed, d), H, bandwidth_, block_dim_), false};
}

PredictionResult VaryingNoisePredictor::predict_at_bandwidth(const Feature& psi,
                                                             int bandwidth) const {
    if (bandwidth == bandwidth_) return predict(psi);
    if (bandwidth > bandwidth_)
        throw InvalidArgumentError("predict_at_bandwidth: bandwidth exceeds model bandwidth");
    // Boundary rows are rare; accumulate moments directly at the smaller
    // bandwidth (more windows exist than at the full bandwidth).
    const Windows w = build_windows(std::span<const ErrorDataset>(data_), bandwidth, true);
    const int d = (bandwidth + 1) * block_dim_;
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(d, d);
    double H = 0.0;
    const Eigen::Matrix<double, 6, 6>& Mw = weights_.M;
    for (int i = 0; i < w.stacked.cols(); ++i) {
        const Eigen::Matrix<double, 6, 1> dlt = w.feats.col(i) - psi.psi;
        const double hi = std::exp(-0.5 * dlt.dot(Mw * dlt));
        H += hi;
        O.selfadjointView<Eigen::Lower>().rankUpdate(w.stacked.col(i), hi);
    }
    O.triangularView<Eigen::StrictlyUpper>() = O.transpose();
    if (H < support_floor(block_dim_, bandwidth)) {
        spdlog::warn("predict: kernel support H={:.2f} below floor {}; using constant model", H,
                     support_floor(block_dim_, bandwidth));
        return {learn_constant(std::span<const ErrorDataset>(data_), bandwidth), true};
    }
    return {fit_from_moments(O, H, bandwidth, block_dim_), false};
}

BandedNoiseModel VaryingNoisePredictor::predict_model(std::span<const Feature> features) const {
    std::vector<BandedNoiseModel::Row> rows;
    rows.reserve(features.size());
    for (int k = 0; k < static_cast<int>(features.size()); ++k) {
        const int eff = std::min(bandwidth_, k);
        rows.push_back(fit_to_row(predict_at_bandwidth(features[k], eff).fit));
    }
    return BandedNoiseModel(bandwidth_, block_dim_, std::move(rows));
}

namespace {

// Leave-one-out machinery shared by the grid search. All targets are
// evaluated at once: kernels via per-dimension squared-distance matrices,
// moment sums via one GEMM against the packed per-window moments.
struct LooWorkspace {
    int b, M, d, Nw, T;
    Eigen::MatrixXd windows;         // d x Nw
    Eigen::MatrixXd packed;          // dp x Nw
    std::vector<int> target_idx;     // T窗 indices into windows
    Eigen::MatrixXd dist2[6];        // T x Nw per feature dimension
    double support_floor_value;
};

double loo_score(const LooWorkspace& ws, const Eigen::Matrix<double, 6, 1>& m_diag) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(ws.T, ws.Nw);
    for (int dim = 0; dim < 6; ++dim)
        if (m_diag(dim) != 0.0) Q.noalias() += m_diag(dim) * ws.dist2[dim];
    Eigen::MatrixXd H = (-0.5 * Q.array()).exp().matrix();
    for (int t = 0; t < ws.T; ++t) H(t, ws.target_idx[t]) = 0.0;  // hold out own window

    const Eigen::MatrixXd packed_sums = H * ws.packed.transpose();  // T x dp
    double score = 0.0;
    for (int t = 0; t < ws.T; ++t) {
        const double mass = H.row(t).sum();
        if (mass < ws.support_floor_value) return std::numeric_limits<double>::infinity();
        Eigen::MatrixXd O = unpack_sym(packed_sums.row(t).transpose(), ws.d);
        ConstantFit fit;
        try {
            fit = fit_from_moments(O, mass, ws.b, ws.M);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        score += factor_negloglik(ws.windows.col(ws.target_idx[t]), fit.S, fit.W);
    }
    return score;
}

}  // namespace

KernelWeights train_kernel_weights(std::span<const ErrorDataset> data, int bandwidth,
                                   const KernelTrainConfig& config) {
    const Windows w = build_windows(data, bandwidth, /*need_features=*/true);
    const int M = data.front().block_dim();
    const int Nw = static_cast<int>(w.stacked.cols());
    int total_len = 0;
    for (const auto& ds : data) total_len += ds.length();
    if (total_len < config.min_train_length)
        throw InsufficientDataError("train_kernel_weights: need at least " +
                                    std::to_string(config.min_train_length) + " samples");

    // Per-dimension feature variances; zero-variance dimensions carry no
    // information and stay at weight 0.
    Eigen::Matrix<double, 6, 1> mean = w.feats.rowwise().mean();
    Eigen::Matrix<double, 6, 1> var =
        (w.feats.colwise() - mean).array().square().rowwise().mean();
    const double var_floor = 1e-12 * std::max(1.0, var.maxCoeff());
    std::vector<int> active;
    for (int dim = 0; dim < 6; ++dim)
        if (var(dim) > var_floor) active.push_back(dim);
    if (active.empty()) {
        spdlog::warn("train_kernel_weights: all feature dimensions degenerate; returning M = 0");
        return KernelWeights::zero();
    }

    LooWorkspace ws;
    ws.b = bandwidth;
    ws.M = M;
    ws.d = (bandwidth + 1) * M;
    ws.Nw = Nw;
    ws.T = std::min(config.max_targets, Nw);
    ws.windows = w.stacked;
    ws.packed.resize(packed_size(ws.d), Nw);
    for (int i = 0; i < Nw; ++i) pack_outer(w.stacked.col(i), ws.packed.col(i));
    ws.target_idx.resize(ws.T);
    for (int t = 0; t < ws.T; ++t) ws.target_idx[t] = static_cast<int>((t * int64_t(Nw)) / ws.T);
    for (int dim = 0; dim < 6; ++dim) {
        ws.dist2[dim].resize(ws.T, Nw);
        for (int t = 0; t < ws.T; ++t) {
            const double f = w.feats(dim, ws.target_idx[t]);
            ws.dist2[dim].row(t) = (w.feats.row(dim).array() - f).square();
        }
    }
    ws.support_floor_value = support_floor(M, bandwidth);

    // gamma(dim) = log10 of the weight normalized by the feature variance:
    // m_dim = 10^gamma / var_dim.
    auto weights_from = [&](const Eigen::VectorXd& gamma) {
        Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
        for (size_t a = 0; a < active.size(); ++a)
            m(active[a]) = std::pow(10.0, gamma(a)) / var(active[a]);
        return m;
    };

    const int na = static_cast<int>(active.size());
    const double baseline = loo_score(ws, Eigen::Matrix<double, 6, 1>::Zero());

    double best_score = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_gamma;
    const double mid = 0.5 * (config.exp_min + config.exp_max);
    for (double start : {config.exp_min, mid}) {
        Eigen::VectorXd gamma = Eigen::VectorXd::Constant(na, start);
        double current = loo_score(ws, weights_from(gamma));
        double span = (config.exp_max - config.exp_min) / 2.0;
        for (int pass = 0; pass < config.passes; ++pass) {
            for (int a = 0; a < na; ++a) {
                const double lo = (pass == 0) ? config.exp_min : gamma(a) - span;
                const double hi = (pass == 0) ? config.exp_max : gamma(a) + span;
                double best_v = gamma(a);
                for (int g = 0; g < config.grid_points; ++g) {
                    const double v = lo + (hi - lo) * g / (config.grid_points - 1);
                    Eigen::VectorXd cand = gamma;
                    cand(a) = v;
                    const double s = loo_score(ws, weights_from(cand));
                    if (s < current) {
                        current = s;
                        best_v = v;
                    }
                }
                gamma(a) = best_v;
            }
            span /= 2.0;
        }
        if (current < best_score) {
            best_score = current;
            best_gamma = gamma;
        }
    }

    if (baseline <= best_score) return KernelWeights::zero();
    return KernelWeights::diagonal(weights_from(best_gamma));
}

}  // namespace corrnoise
