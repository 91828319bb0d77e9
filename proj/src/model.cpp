#include "stcrf/model.hpp"

#include <Eigen/SVD>

namespace stcrf {

namespace {

void check_label_sequence(const PotentialTables &tables, const std::vector<int> &y) {
    if (static_cast<int>(y.size()) != tables.length())
        throw DimensionError("score: sequence length " + std::to_string(y.size()) +
                             " != chain length " + std::to_string(tables.length()));
    for (int t = 0; t < tables.length(); ++t)
        if (y[t] < 0 || y[t] >= tables.num_labels(t))
            throw std::out_of_range("score: label " + std::to_string(y[t]) +
                                    " out of range at position " + std::to_string(t));
}

}  // namespace

Vec unary_table(const ModelParams &params, const EmbeddingSet &emb, const Vec &x, int t) {
    const Mat &W = params.W.at(t);
    const Mat &V = emb.V.at(t);
    if (x.size() != W.cols())
        throw DimensionError("unary_table: feature length " + std::to_string(x.size()) +
                             " != input_dim " + std::to_string(W.cols()));
    if (V.cols() != W.rows())
        throw DimensionError("unary_table: embedding dim " + std::to_string(V.cols()) +
                             " != W rows " + std::to_string(W.rows()));
    return V * (W * x);
}

Mat binary_table(const ModelParams &params, const EmbeddingSet &emb, int t) {
    const Mat &Z = params.Z.at(t);
    const Mat &Vl = emb.V.at(t);
    const Mat &Vr = emb.V.at(t + 1);
    if (Vl.cols() != Z.rows() || Vr.cols() != Z.cols())
        throw DimensionError("binary_table: Z[" + std::to_string(t) + "] is " +
                             std::to_string(Z.rows()) + "x" + std::to_string(Z.cols()) +
                             " but embeddings have dims " + std::to_string(Vl.cols()) +
                             ", " + std::to_string(Vr.cols()));
    return Vl * Z * Vr.transpose();
}

PotentialTables build_tables(const ModelParams &params, const EmbeddingSet &emb,
                             const Vec &x) {
    PotentialTables tables;
    const int T = static_cast<int>(params.W.size());
    tables.unary.reserve(T);
    for (int t = 0; t < T; ++t) tables.unary.push_back(unary_table(params, emb, x, t));
    tables.binary.reserve(T - 1);
    for (int t = 0; t + 1 < T; ++t) tables.binary.push_back(binary_table(params, emb, t));
    return tables;
}

double score(const PotentialTables &tables, const std::vector<int> &y) {
    check_label_sequence(tables, y);
    double total = 0.0;
    for (int t = 0; t < tables.length(); ++t) total += tables.unary[t](y[t]);
    for (int t = 0; t + 1 < tables.length(); ++t) total += tables.binary[t](y[t], y[t + 1]);
    return total;
}

double score(const ModelParams &params, const EmbeddingSet &emb, const Vec &x,
             const std::vector<int> &y) {
    return score(build_tables(params, emb, x), y);
}

namespace {

MatrixRank matrix_rank(const Mat &m, const std::string &name, double tolerance) {
    Eigen::JacobiSVD<Mat> svd(m);
    MatrixRank r;
    r.name = name;
    const auto &sv = svd.singularValues();
    r.singular_values.assign(sv.data(), sv.data() + sv.size());
    r.nuclear_norm = sv.sum();
    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    if (sigma_max > 0.0) {
        for (double s : r.singular_values)
            if (s > tolerance * sigma_max) ++r.effective_rank;
    }
    return r;
}

}  // namespace

RankReport rank_report(const ModelParams &params, double tolerance) {
    RankReport report;
    for (std::size_t t = 0; t < params.W.size(); ++t)
        report.unary.push_back(matrix_rank(params.W[t], "W" + std::to_string(t), tolerance));
    for (std::size_t t = 0; t < params.Z.size(); ++t)
        report.binary.push_back(matrix_rank(params.Z[t], "Z" + std::to_string(t), tolerance));
    return report;
}

}  // namespace stcrf
