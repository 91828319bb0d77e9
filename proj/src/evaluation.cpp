#include "stcrf/evaluation.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace stcrf {

PredictionSet predict_topk(const ModelParams &params, const EmbeddingSet &emb,
                           const AnnotatedImage &image, int k) {
    if (k < 1) throw std::invalid_argument("predict_topk: k must be >= 1");
    PredictionSet result;
    result.image_id = image.image_id;
    result.top_k = kbest(build_tables(params, emb, image.features), k);
    return result;
}

namespace {

struct TypeTally {
    long predicted = 0;
    long matched = 0;
    double macro_sum = 0.0;  // sum of per-image precisions
    long macro_images = 0;   // images with at least one prediction
};

}  // namespace

EvalReport per_type_precision(const std::vector<PredictionSet> &predictions,
                              const Dataset &gold, Averaging averaging) {
    const ChainSpec &spec = gold.spec;
    const int T = spec.length();

    std::unordered_map<std::string, const AnnotatedImage *> by_id;
    for (const auto &image : gold.images) by_id[image.image_id] = &image;

    std::vector<TypeTally> tally(T);
    for (const auto &pred : predictions) {
        auto it = by_id.find(pred.image_id);
        if (it == by_id.end())
            throw std::invalid_argument("per_type_precision: unknown image id '" +
                                        pred.image_id + "'");
        const AnnotatedImage &image = *it->second;
        for (int t = 0; t < T; ++t) {
            std::set<int> predicted;
            for (const auto &seq : pred.top_k) predicted.insert(seq.labels.at(t));
            std::set<int> gold_args;
            for (const auto &tuple : image.gold_tuples) gold_args.insert(tuple.at(t));
            long matched = 0;
            for (int label : predicted)
                if (gold_args.count(label)) ++matched;
            tally[t].predicted += static_cast<long>(predicted.size());
            tally[t].matched += matched;
            if (!predicted.empty()) {
                tally[t].macro_sum +=
                    static_cast<double>(matched) / static_cast<double>(predicted.size());
                ++tally[t].macro_images;
            }
        }
    }

    EvalReport report;
    double sum = 0.0;
    for (int t = 0; t < T; ++t) {
        TypePrecision tp;
        tp.argument_type = spec.position(t).argument_type;
        tp.predicted = tally[t].predicted;
        tp.matched = tally[t].matched;
        if (averaging == Averaging::Micro)
            tp.precision = tally[t].predicted > 0
                               ? static_cast<double>(tally[t].matched) /
                                     static_cast<double>(tally[t].predicted)
                               : 0.0;
        else
            tp.precision = tally[t].macro_images > 0
                               ? tally[t].macro_sum / static_cast<double>(tally[t].macro_images)
                               : 0.0;
        sum += tp.precision;
        report.per_type.push_back(tp);
    }
    report.mean_precision = T > 0 ? sum / T : 0.0;
    return report;
}

std::map<std::string, std::string> combo_select(const std::vector<NamedModel> &models,
                                                const Dataset &validation, int k) {
    if (models.empty()) throw std::invalid_argument("combo_select: empty model list");
    if (validation.images.empty())
        throw std::invalid_argument("combo_select: empty validation set");

    const int T = validation.spec.length();
    std::vector<double> best(T, -1.0);
    std::map<std::string, std::string> assignment;
    for (const auto &model : models) {
        std::vector<PredictionSet> predictions;
        predictions.reserve(validation.images.size());
        for (const auto &image : validation.images)
            predictions.push_back(predict_topk(model.params, model.emb, image, k));
        const EvalReport report = per_type_precision(predictions, validation);
        for (int t = 0; t < T; ++t) {
            if (report.per_type[t].precision > best[t]) {
                best[t] = report.per_type[t].precision;
                assignment[report.per_type[t].argument_type] = model.name;
            }
        }
    }
    return assignment;
}

std::map<std::string, std::set<int>> combo_predict(
    const std::map<std::string, std::string> &assignment,
    const std::vector<NamedModel> &models, const ChainSpec &spec,
    const AnnotatedImage &image, int k) {
    std::map<std::string, std::set<int>> result;
    for (int t = 0; t < spec.length(); ++t) {
        const std::string &type = spec.position(t).argument_type;
        auto it = assignment.find(type);
        if (it == assignment.end())
            throw std::invalid_argument("combo_predict: no model assigned for type '" +
                                        type + "'");
        const NamedModel *model = nullptr;
        for (const auto &m : models)
            if (m.name == it->second) {
                model = &m;
                break;
            }
        if (!model)
            throw std::invalid_argument("combo_predict: unknown model '" + it->second + "'");
        const PredictionSet pred = predict_topk(model->params, model->emb, image, k);
        std::set<int> args;
        for (const auto &seq : pred.top_k) args.insert(seq.labels.at(t));
        result[type] = std::move(args);
    }
    return result;
}

ModelParams independent_mode(const ModelParams &params) {
    ModelParams result = params;
    for (auto &z : result.Z) z.setZero();
    return result;
}

std::string format_report(const EvalReport &report) {
    std::ostringstream out;
    out << "type precision predicted matched\n";
    out.precision(6);
    out << std::fixed;
    for (const auto &tp : report.per_type)
        out << tp.argument_type << " " << tp.precision << " " << tp.predicted << " "
            << tp.matched << "\n";
    out << "mean " << report.mean_precision << "\n";
    return out.str();
}

}  // namespace stcrf
