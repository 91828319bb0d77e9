#include "stcrf/io.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>

#include <json.hpp>

namespace stcrf {

using nlohmann::json;

namespace {

json parse_line(const std::string &path, int line_no, const std::string &line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error &e) {
        throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

json parse_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw IoError(path + ": " + e.what());
    }
}

json matrix_to_json(const Mat &m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json &j, const std::string &what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw IoError(what + ": expected an array of rows");
    const long rows = static_cast<long>(j.size());
    const long cols = static_cast<long>(j[0].size());
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (static_cast<long>(j[r].size()) != cols)
            throw IoError(what + ": ragged rows");
        for (long c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw IoError(what + ": non-numeric entry");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

}  // namespace

FeatureTable load_features(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    FeatureTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json record = parse_line(path, line_no, line);
        if (!record.contains("id") || !record["id"].is_string() ||
            !record.contains("features") || !record["features"].is_array())
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected {\"id\": string, \"features\": [numbers]}");
        const std::string id = record["id"].get<std::string>();
        const auto &values = record["features"];
        Vec v(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i].is_number())
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": non-numeric feature value");
            v(static_cast<long>(i)) = values[i].get<double>();
        }
        if (!v.allFinite())
            throw IoError(path + ":" + std::to_string(line_no) + ": non-finite feature");
        if (table.dim == 0)
            table.dim = static_cast<int>(v.size());
        else if (static_cast<int>(v.size()) != table.dim)
            throw IoError(path + ":" + std::to_string(line_no) + ": feature length " +
                          std::to_string(v.size()) + " != " + std::to_string(table.dim));
        if (!table.by_id.emplace(id, std::move(v)).second)
            throw IoError(path + ":" + std::to_string(line_no) + ": duplicate id '" + id +
                          "'");
        table.ids.push_back(id);
    }
    if (table.ids.empty()) throw IoError(path + ": no feature records");
    return table;
}

std::vector<AnnotationRecord> read_annotation_records(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path);
    std::vector<AnnotationRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(path, line_no, line);
        if (!j.contains("image_id") || !j["image_id"].is_string() ||
            !j.contains("tuples") || !j["tuples"].is_array())
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected {\"image_id\": string, \"tuples\": [[tokens]]}");
        AnnotationRecord record;
        record.line = line_no;
        record.image_id = j["image_id"].get<std::string>();
        for (const auto &tuple : j["tuples"]) {
            if (!tuple.is_array())
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": tuple is not an array");
            std::vector<std::string> tokens;
            for (const auto &token : tuple) {
                if (!token.is_string())
                    throw IoError(path + ":" + std::to_string(line_no) +
                                  ": tuple entry is not a string");
                tokens.push_back(token.get<std::string>());
            }
            record.tuples.push_back(std::move(tokens));
        }
        records.push_back(std::move(record));
    }
    return records;
}

AnnotationLoad load_annotations(const std::string &path, const ChainSpec &spec,
                                const FeatureTable &features) {
    if (features.dim != spec.input_dim())
        throw DimensionError("load_annotations: feature dim " +
                             std::to_string(features.dim) + " != spec input_dim " +
                             std::to_string(spec.input_dim()));
    AnnotationLoad result{{spec, {}}, {}};
    for (const auto &record : read_annotation_records(path)) {
        for (const auto &tuple : record.tuples)
            if (static_cast<int>(tuple.size()) != spec.length())
                throw IoError(path + ":" + std::to_string(record.line) + ": tuple arity " +
                              std::to_string(tuple.size()) + " != chain length " +
                              std::to_string(spec.length()));

        auto feat = features.by_id.find(record.image_id);
        if (feat == features.by_id.end()) {
            result.excluded.push_back({record.image_id, "no feature vector"});
            continue;
        }
        AnnotatedImage image;
        image.image_id = record.image_id;
        image.features = feat->second;
        std::string oov;
        for (const auto &tuple : record.tuples) {
            std::vector<int> ids(spec.length());
            for (int t = 0; t < spec.length() && oov.empty(); ++t) {
                ids[t] = spec.position(t).vocab->lookup(tuple[t]);
                if (ids[t] < 0) oov = tuple[t];
            }
            if (!oov.empty()) break;
            image.gold_tuples.push_back(std::move(ids));
        }
        if (!oov.empty()) {
            result.excluded.push_back({record.image_id, "out-of-vocabulary token '" + oov + "'"});
            continue;
        }
        result.dataset.images.push_back(std::move(image));
    }
    return result;
}

namespace {

json config_to_json(const TrainConfig &c) {
    return json{{"c1", c.c1},
                {"c2", c.c2},
                {"base_step", c.base_step},
                {"max_iter", c.max_iter},
                {"step_schedule",
                 c.step_schedule == StepSchedule::Constant ? "constant" : "inverse-sqrt"},
                {"seed", c.seed},
                {"tolerance", c.tolerance}};
}

TrainConfig config_from_json(const json &j) {
    TrainConfig c;
    c.c1 = j.at("c1").get<double>();
    c.c2 = j.at("c2").get<double>();
    c.base_step = j.at("base_step").get<double>();
    c.max_iter = j.at("max_iter").get<int>();
    c.step_schedule = j.at("step_schedule").get<std::string>() == "constant"
                          ? StepSchedule::Constant
                          : StepSchedule::InverseSqrt;
    c.seed = j.at("seed").get<unsigned>();
    c.tolerance = j.at("tolerance").get<double>();
    return c;
}

}  // namespace

void save_model(const Model &model, const std::string &path) {
    check_shapes(model.spec, model.emb, model.params);
    json j;
    j["format_version"] = kModelFormatVersion;
    json positions = json::array();
    for (const auto &pos : model.spec.positions())
        positions.push_back({{"argument_type", pos.argument_type},
                             {"tokens", pos.vocab->tokens()},
                             {"embedding_dim", pos.embedding_dim}});
    j["spec"] = {{"input_dim", model.spec.input_dim()}, {"positions", positions}};

    json embeddings = json::array();
    for (std::size_t t = 0; t < model.emb.V.size(); ++t)
        embeddings.push_back({{"source", to_string(model.emb.source[t])},
                              {"matrix", matrix_to_json(model.emb.V[t])}});
    j["embeddings"] = embeddings;

    json w = json::array(), z = json::array();
    for (const auto &m : model.params.W) w.push_back(matrix_to_json(m));
    for (const auto &m : model.params.Z) z.push_back(matrix_to_json(m));
    j["params"] = {{"W", w}, {"Z", z}};

    if (model.config) j["train_config"] = config_to_json(*model.config);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << j.dump(1) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Model load_model(const std::string &path) {
    const json j = parse_file(path);
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        throw IoError(path + ": missing format_version");
    if (j["format_version"].get<int>() != kModelFormatVersion)
        throw IoError(path + ": unsupported format_version " +
                      j["format_version"].dump());

    std::vector<ChainPosition> positions;
    try {
        for (const auto &pos : j.at("spec").at("positions")) {
            ChainPosition p;
            p.argument_type = pos.at("argument_type").get<std::string>();
            p.vocab = std::make_shared<Vocabulary>(
                p.argument_type, pos.at("tokens").get<std::vector<std::string>>());
            p.embedding_dim = pos.at("embedding_dim").get<int>();
            positions.push_back(std::move(p));
        }
    } catch (const json::exception &e) {
        throw IoError(path + ": malformed spec: " + e.what());
    }
    ChainSpec spec(std::move(positions), j.at("spec").at("input_dim").get<int>());

    EmbeddingSet emb;
    for (std::size_t t = 0; t < j.at("embeddings").size(); ++t) {
        const auto &entry = j["embeddings"][t];
        emb.source.push_back(
            embedding_source_from_string(entry.at("source").get<std::string>()));
        emb.V.push_back(matrix_from_json(entry.at("matrix"),
                                         path + ": embeddings[" + std::to_string(t) + "]"));
    }

    ModelParams params;
    for (std::size_t t = 0; t < j.at("params").at("W").size(); ++t)
        params.W.push_back(matrix_from_json(j["params"]["W"][t],
                                            path + ": W[" + std::to_string(t) + "]"));
    for (std::size_t t = 0; t < j.at("params").at("Z").size(); ++t)
        params.Z.push_back(matrix_from_json(j["params"]["Z"][t],
                                            path + ": Z[" + std::to_string(t) + "]"));

    Model model{std::move(spec), std::move(emb), std::move(params), std::nullopt};
    if (j.contains("train_config")) model.config = config_from_json(j["train_config"]);
    check_shapes(model.spec, model.emb, model.params);
    return model;
}

void write_features(const std::string &path, const Dataset &dataset) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature file: " + path);
    for (const auto &image : dataset.images) {
        json features = json::array();
        for (long i = 0; i < image.features.size(); ++i)
            features.push_back(image.features(i));
        out << json{{"id", image.image_id}, {"features", features}}.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_annotations(const std::string &path, const Dataset &dataset) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write annotation file: " + path);
    for (const auto &image : dataset.images) {
        json tuples = json::array();
        for (const auto &tuple : image.gold_tuples) {
            json tokens = json::array();
            for (int t = 0; t < dataset.spec.length(); ++t)
                tokens.push_back(dataset.spec.position(t).vocab->token(tuple[t]));
            tuples.push_back(std::move(tokens));
        }
        out << json{{"image_id", image.image_id}, {"tuples", tuples}}.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_predictions(const std::string &path,
                       const std::vector<ImagePredictions> &predictions) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write predictions file: " + path);
    for (const auto &pred : predictions) {
        json tuples = json::array();
        for (const auto &tuple : pred.tuples)
            tuples.push_back({{"tuple", tuple.tokens}, {"score", tuple.score}});
        out << json{{"image_id", pred.image_id}, {"predictions", tuples}}.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<ImagePredictions> read_predictions(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions file: " + path);
    std::vector<ImagePredictions> result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(path, line_no, line);
        ImagePredictions pred;
        try {
            pred.image_id = j.at("image_id").get<std::string>();
            for (const auto &entry : j.at("predictions")) {
                PredictedTuple tuple;
                tuple.tokens = entry.at("tuple").get<std::vector<std::string>>();
                tuple.score = entry.at("score").get<double>();
                pred.tuples.push_back(std::move(tuple));
            }
        } catch (const json::exception &e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        result.push_back(std::move(pred));
    }
    return result;
}

void write_report(const std::string &path, const EvalReport &report) {
    json per_type = json::array();
    for (const auto &tp : report.per_type)
        per_type.push_back({{"argument_type", tp.argument_type},
                            {"precision", tp.precision},
                            {"predicted", tp.predicted},
                            {"matched", tp.matched}});
    const json j{{"per_type", per_type}, {"mean_precision", report.mean_precision}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report file: " + path);
    out << j.dump(1) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace stcrf
