#include "stcrf/embeddings.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace stcrf {

EmbeddingSet indicator_embeddings(const ChainSpec &spec) {
    EmbeddingSet emb;
    for (int t = 0; t < spec.length(); ++t) {
        const int n = spec.num_labels(t);
        emb.V.push_back(Mat::Identity(n, n));
        emb.source.push_back(EmbeddingSource::Indicator);
    }
    return emb;
}

CooccurrenceCounts count_equivalences(const Dataset &dataset, int position) {
    const ChainSpec &spec = dataset.spec;
    if (position < 0 || position >= spec.length())
        throw std::out_of_range("count_equivalences: position " +
                                std::to_string(position) + " out of range");
    const int n = spec.num_labels(position);
    CooccurrenceCounts result;
    result.argument_type = spec.position(position).argument_type;
    result.counts = Eigen::MatrixXi::Zero(n, n);

    for (const auto &image : dataset.images) {
        const auto &tuples = image.gold_tuples;
        for (std::size_t i = 0; i < tuples.size(); ++i) {
            for (std::size_t j = i + 1; j < tuples.size(); ++j) {
                bool same_elsewhere = true;
                for (int t = 0; t < spec.length(); ++t) {
                    if (t == position) continue;
                    if (tuples[i][t] != tuples[j][t]) {
                        same_elsewhere = false;
                        break;
                    }
                }
                const int a = tuples[i][position];
                const int b = tuples[j][position];
                if (same_elsewhere && a != b) {
                    result.counts(a, b) += 1;
                    result.counts(b, a) += 1;
                }
            }
        }
    }
    return result;
}

Mat ser_embeddings(const CooccurrenceCounts &counts) {
    const long n = counts.counts.rows();
    if (counts.counts.cols() != n)
        throw DimensionError("ser_embeddings: counts matrix must be square");
    Mat emb = Mat::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        const double row_sum = counts.counts.row(i).cast<double>().sum();
        if (row_sum > 0.0)
            emb.row(i) = counts.counts.row(i).cast<double>() / row_sum;
        else
            emb(i, i) = 1.0;  // isolated argument: indicator fallback
    }
    return emb;
}

namespace {

bool parse_double(const std::string &field, double &out) {
    try {
        std::size_t consumed = 0;
        out = std::stod(field, &consumed);
        return consumed == field.size();
    } catch (const std::exception &) {
        return false;
    }
}

bool is_header(const std::vector<std::string> &fields) {
    if (fields.size() != 2) return false;
    for (const auto &f : fields)
        for (char c : f)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::vector<std::string> split_ws(const std::string &line) {
    std::istringstream in(line);
    std::vector<std::string> fields;
    std::string field;
    while (in >> field) fields.push_back(field);
    return fields;
}

}  // namespace

Mat load_external_vectors(const std::string &path, const Vocabulary &vocab, int dim,
                          OovPolicy policy) {
    if (dim < 1) throw std::invalid_argument("load_external_vectors: dim must be >= 1");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vector file: " + path);

    std::unordered_map<std::string, Vec> found;
    std::string line;
    int line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (first && is_header(fields)) {
            first = false;
            continue;
        }
        first = false;
        if (static_cast<int>(fields.size()) != dim + 1)
            throw IoError(path + ":" + std::to_string(line_no) + ": expected token plus " +
                          std::to_string(dim) + " values, got " +
                          std::to_string(fields.size() - 1));
        Vec v(dim);
        for (int i = 0; i < dim; ++i) {
            double value = 0.0;
            if (!parse_double(fields[i + 1], value) || !std::isfinite(value))
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": non-numeric value '" + fields[i + 1] + "'");
            v(i) = value;
        }
        if (!found.emplace(fields[0], std::move(v)).second)
            throw IoError(path + ":" + std::to_string(line_no) + ": duplicate token '" +
                          fields[0] + "'");
    }

    std::vector<int> missing;
    for (int l = 0; l < vocab.size(); ++l)
        if (!found.count(vocab.token(l))) missing.push_back(l);

    if (policy == OovPolicy::Fail && !missing.empty()) {
        std::string list;
        for (int l : missing) list += (list.empty() ? "" : ", ") + vocab.token(l);
        throw IoError(path + ": missing vectors for: " + list);
    }

    const int cols =
        policy == OovPolicy::IndicatorFallback ? dim + vocab.size() : dim;
    Mat result = Mat::Zero(vocab.size(), cols);
    for (int l = 0; l < vocab.size(); ++l) {
        auto it = found.find(vocab.token(l));
        if (it != found.end())
            result.row(l).head(dim) = it->second;
        else
            result(l, dim + l) = 1.0;  // one-hot extension for OOV tokens
    }
    return result;
}

void write_vectors(const std::string &path, const Vocabulary &vocab, const Mat &matrix) {
    if (matrix.rows() != vocab.size())
        throw DimensionError("write_vectors: matrix rows " + std::to_string(matrix.rows()) +
                             " != vocabulary size " + std::to_string(vocab.size()));
    std::ofstream out(path);
    if (!out) throw IoError("cannot write vector file: " + path);
    out << std::setprecision(17);
    out << vocab.size() << " " << matrix.cols() << "\n";
    for (int l = 0; l < vocab.size(); ++l) {
        out << vocab.token(l);
        for (long c = 0; c < matrix.cols(); ++c) out << " " << matrix(l, c);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace stcrf
