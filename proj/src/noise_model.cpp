#include "corrnoise/noise_model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <nlohmann/json.hpp>

#include "corrnoise/errors.hpp"
#include "corrnoise/json_util.hpp"

namespace corrnoise {

double kernel_eval(const Feature& psi_i, const Feature& psi_star, const KernelWeights& weights) {
    const Eigen::Matrix<double, 6, 1> d = psi_i.psi - psi_star.psi;
    return std::exp(-0.5 * d.dot(weights.M * d));
}

BandedNoiseModel::BandedNoiseModel(int bandwidth, int block_dim, std::vector<Row> rows)
    : bandwidth_(bandwidth), block_dim_(block_dim), rows_(std::move(rows)) {
    if (bandwidth < 0) throw InvalidArgumentError("BandedNoiseModel: bandwidth must be >= 0");
    if (block_dim <= 0) throw InvalidArgumentError("BandedNoiseModel: block_dim must be > 0");
    for (int k = 0; k < length(); ++k) {
        const Row& r = rows_[k];
        const int expected = std::min(bandwidth_, k);
        if (static_cast<int>(r.S.size()) != expected)
            throw ModelInvalidError("row " + std::to_string(k + 1) + ": expected " +
                                    std::to_string(expected) + " correlation blocks, got " +
                                    std::to_string(r.S.size()));
        if (r.W.rows() != block_dim_ || r.W.cols() != block_dim_)
            throw ModelInvalidError("row " + std::to_string(k + 1) + ": W has wrong shape");
        for (const auto& S : r.S)
            if (S.rows() != block_dim_ || S.cols() != block_dim_)
                throw ModelInvalidError("row " + std::to_string(k + 1) + ": S has wrong shape");
    }
}

void BandedNoiseModel::validate() const {
    for (int k = 0; k < length(); ++k) {
        const Eigen::MatrixXd& W = rows_[k].W;
        if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + W.cwiseAbs().maxCoeff()))
            throw ModelInvalidError("W_" + std::to_string(k + 1) + " is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(W);
        if (llt.info() != Eigen::Success)
            throw ModelInvalidError("W_" + std::to_string(k + 1) + " is not positive definite");
    }
}

BandedSymmetricMatrix assemble_inverse_covariance(const BandedNoiseModel& model) {
    model.validate();
    const int M = model.block_dim();
    const int K = model.length();
    const int b = model.bandwidth();
    BandedSymmetricMatrix R(K * M, b * M + M - 1);
    // Row k of S has blocks B_0 = I at column k and B_j = S_{k,j} at k - j;
    // R^{-1} accumulates B_a^T W_k B_c into block (k-a, k-c).
    for (int k = 0; k < K; ++k) {
        const auto& row = model.row(k);
        const int nb = static_cast<int>(row.S.size());
        for (int a = 0; a <= nb; ++a) {
            const Eigen::MatrixXd Ba =
                (a == 0) ? Eigen::MatrixXd::Identity(M, M) : Eigen::MatrixXd(row.S[a - 1]);
            for (int c = a; c <= nb; ++c) {
                // block row k-a >= block col k-c stays in the lower half
                const Eigen::MatrixXd Bc =
                    (c == 0) ? Eigen::MatrixXd::Identity(M, M) : Eigen::MatrixXd(row.S[c - 1]);
                R.add_block((k - a) * M, (k - c) * M, Ba.transpose() * row.W * Bc);
            }
        }
    }
    return R;
}

double factor_negloglik(const Eigen::VectorXd& window_errors, const Eigen::MatrixXd& S_blocks,
                        const Eigen::MatrixXd& W) {
    const int M = static_cast<int>(W.rows());
    const int past = static_cast<int>(S_blocks.cols());
    if (window_errors.size() != past + M)
        throw InvalidArgumentError("factor_negloglik: window size " +
                                   std::to_string(window_errors.size()) + " != " +
                                   std::to_string(past + M));
    Eigen::VectorXd r = window_errors.tail(M);
    if (past > 0) r += S_blocks * window_errors.head(past);
    Eigen::LLT<Eigen::MatrixXd> llt(W);
    if (llt.info() != Eigen::Success)
        throw ModelInvalidError("factor_negloglik: W not positive definite");
    const double logdet =
        2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    return 0.5 * r.dot(W * r) - 0.5 * logdet;
}

Eigen::MatrixXd model_residuals(const BandedNoiseModel& model, const Eigen::MatrixXd& errors) {
    if (errors.rows() != model.block_dim() || errors.cols() != model.length())
        throw InvalidArgumentError("model_residuals: error sequence shape mismatch");
    Eigen::MatrixXd r = errors;
    for (int k = 0; k < model.length(); ++k) {
        const auto& row = model.row(k);
        for (int j = 1; j <= static_cast<int>(row.S.size()); ++j)
            r.col(k) += row.S[j - 1] * errors.col(k - j);
    }
    return r;
}

double model_negloglik(const BandedNoiseModel& model, const Eigen::MatrixXd& errors) {
    const Eigen::MatrixXd r = model_residuals(model, errors);
    double total = 0.0;
    for (int k = 0; k < model.length(); ++k) {
        const Eigen::MatrixXd& W = model.row(k).W;
        Eigen::LLT<Eigen::MatrixXd> llt(W);
        if (llt.info() != Eigen::Success)
            throw ModelInvalidError("model_negloglik: W_" + std::to_string(k + 1) + " not SPD");
        const double logdet =
            2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
        total += 0.5 * r.col(k).dot(W * r.col(k)) - 0.5 * logdet;
    }
    return total;
}

std::string model_to_json(const BandedNoiseModel& model) {
    std::string out = "{\"bandwidth\":" + std::to_string(model.bandwidth()) +
                      ",\"block_dim\":" + std::to_string(model.block_dim()) +
                      ",\"length\":" + std::to_string(model.length()) + ",\"blocks\":[";
    for (int k = 0; k < model.length(); ++k) {
        const auto& row = model.row(k);
        if (k > 0) out += ",";
        out += "{\"k\":" + std::to_string(k + 1) + ",\"W\":" + matrix_to_json_array(row.W) +
               ",\"S\":[";
        for (int j = 1; j <= static_cast<int>(row.S.size()); ++j) {
            if (j > 1) out += ",";
            out += "{\"j\":" + std::to_string(j) +
                   ",\"block\":" + matrix_to_json_array(row.S[j - 1]) + "}";
        }
        out += "]}";
    }
    out += "]}";
    return out;
}

namespace {
Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr, int rows, int cols) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != rows * cols)
        throw IoError("model JSON: matrix entry count mismatch");
    Eigen::MatrixXd m(rows, cols);
    int idx = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = arr[idx++].get<double>();
    return m;
}
}  // namespace

BandedNoiseModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const int b = j.at("bandwidth").get<int>();
    const int M = j.at("block_dim").get<int>();
    const int K = j.at("length").get<int>();
    std::vector<BandedNoiseModel::Row> rows(K);
    for (const auto& blk : j.at("blocks")) {
        const int k = blk.at("k").get<int>() - 1;
        if (k < 0 || k >= K) throw IoError("model JSON: block index out of range");
        BandedNoiseModel::Row row;
        row.W = matrix_from_json(blk.at("W"), M, M);
        row.S.resize(blk.at("S").size());
        for (const auto& s : blk.at("S")) {
            const int jj = s.at("j").get<int>();
            if (jj < 1 || jj > static_cast<int>(row.S.size()))
                throw IoError("model JSON: correlation block index out of range");
            row.S[jj - 1] = matrix_from_json(s.at("block"), M, M);
        }
        rows[k] = std::move(row);
    }
    return BandedNoiseModel(b, M, std::move(rows));
}

void save_model(const std::string& path, const BandedNoiseModel& model) {
    write_text_file(path, model_to_json(model) + "\n");
}

BandedNoiseModel load_model(const std::string& path) {
    return model_from_json(read_text_file(path));
}

}  // namespace corrnoise
