// Command-line front end: synth, build-ser, train, predict, eval, inspect,
// combo. See README.md for the file formats each subcommand reads and writes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stcrf/embeddings.hpp"
#include "stcrf/evaluation.hpp"
#include "stcrf/inference.hpp"
#include "stcrf/io.hpp"
#include "stcrf/learning.hpp"
#include "stcrf/model.hpp"
#include "stcrf/synth.hpp"

namespace fs = std::filesystem;
using namespace stcrf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitOther = 5;

std::vector<std::string> default_type_names(int chain_length) {
    if (chain_length == 3) return {"locative", "predicate", "actor"};
    std::vector<std::string> names;
    for (int t = 0; t < chain_length; ++t) names.push_back("pos" + std::to_string(t));
    return names;
}

int tuple_arity(const std::vector<AnnotationRecord> &records) {
    for (const auto &record : records)
        if (!record.tuples.empty()) return static_cast<int>(record.tuples[0].size());
    throw IoError("annotation file contains no tuples");
}

// Frequency-ranked vocabulary per position, built from annotation tokens.
std::vector<std::shared_ptr<Vocabulary>> build_vocabularies(
    const std::vector<AnnotationRecord> &records, const std::vector<std::string> &names,
    std::size_t max_vocab) {
    const int T = static_cast<int>(names.size());
    std::vector<std::shared_ptr<Vocabulary>> vocabs;
    for (int t = 0; t < T; ++t) {
        std::vector<std::vector<std::string>> corpus;
        for (const auto &record : records) {
            std::vector<std::string> tokens;
            for (const auto &tuple : record.tuples)
                if (static_cast<int>(tuple.size()) == T) tokens.push_back(tuple[t]);
            if (!tokens.empty()) corpus.push_back(std::move(tokens));
        }
        vocabs.push_back(std::make_shared<Vocabulary>(
            build_vocabulary(names[t], corpus, max_vocab)));
    }
    return vocabs;
}

int infer_vector_dim(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vector file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::vector<std::string> parts;
        std::string part;
        while (fields >> part) parts.push_back(part);
        if (parts.empty()) continue;
        const bool header = parts.size() == 2 &&
                            parts[0].find_first_not_of("0123456789") == std::string::npos &&
                            parts[1].find_first_not_of("0123456789") == std::string::npos;
        if (header) return std::stoi(parts[1]);
        return static_cast<int>(parts.size()) - 1;
    }
    throw IoError("vector file is empty: " + path);
}

// "--emb locative=ser:path" style per-type embedding choices.
struct EmbChoice {
    EmbeddingSource source = EmbeddingSource::Indicator;
    std::string path;
};

std::map<std::string, EmbChoice> parse_emb_flags(const std::vector<std::string> &flags) {
    std::map<std::string, EmbChoice> choices;
    for (const auto &flag : flags) {
        const auto eq = flag.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--emb expects TYPE=SOURCE[:PATH], got '" + flag +
                                        "'");
        const std::string type = flag.substr(0, eq);
        const std::string spec = flag.substr(eq + 1);
        EmbChoice choice;
        const auto colon = spec.find(':');
        const std::string source = spec.substr(0, colon);
        choice.source = embedding_source_from_string(source);
        if (colon != std::string::npos) choice.path = spec.substr(colon + 1);
        if (choice.source != EmbeddingSource::Indicator && choice.path.empty())
            throw std::invalid_argument("--emb " + type + "=" + source +
                                        " requires a file path (" + source + ":PATH)");
        choices[type] = choice;
    }
    return choices;
}

void print_rank_report(const RankReport &report, std::ostream &out) {
    auto print = [&out](const MatrixRank &r) {
        out << r.name << ": nuclear_norm=" << r.nuclear_norm
            << " effective_rank=" << r.effective_rank << " singular_values=[";
        for (std::size_t i = 0; i < r.singular_values.size(); ++i)
            out << (i ? ", " : "") << r.singular_values[i];
        out << "]\n";
    };
    for (const auto &r : report.unary) print(r);
    for (const auto &r : report.binary) print(r);
}

struct SynthOptions {
    std::string out_dir;
    SynthConfig config;
};

void run_synth(const SynthOptions &opt) {
    fs::create_directories(opt.out_dir);
    const SynthOutput output = generate_synthetic(opt.config);
    const fs::path dir(opt.out_dir);

    write_features((dir / "train_features.jsonl").string(), output.train);
    write_annotations((dir / "train_annotations.jsonl").string(), output.train);
    if (!output.test.images.empty()) {
        write_features((dir / "test_features.jsonl").string(), output.test);
        write_annotations((dir / "test_annotations.jsonl").string(), output.test);
    }
    save_model(output.true_model, (dir / "true_model.json").string());
    for (int t = 0; t < output.true_model.spec.length(); ++t) {
        const auto &pos = output.true_model.spec.position(t);
        write_vectors((dir / ("vectors_" + pos.argument_type + ".txt")).string(),
                      *pos.vocab, output.true_model.emb.V[t]);
    }
    std::cout << "wrote " << output.train.images.size() << " train and "
              << output.test.images.size() << " test samples to " << opt.out_dir << "\n";
}

struct BuildSerOptions {
    std::string annotations;
    std::string out_dir;
    std::size_t max_vocab = SIZE_MAX;
};

void run_build_ser(const BuildSerOptions &opt) {
    const auto records = read_annotation_records(opt.annotations);
    const int T = tuple_arity(records);
    const auto names = default_type_names(T);
    const auto vocabs = build_vocabularies(records, names, opt.max_vocab);

    std::vector<ChainPosition> positions;
    for (int t = 0; t < T; ++t)
        positions.push_back({names[t], vocabs[t], vocabs[t]->size()});
    const ChainSpec spec(std::move(positions), 1);

    Dataset dataset{spec, {}};
    for (const auto &record : records) {
        AnnotatedImage image;
        image.image_id = record.image_id;
        image.features = Vec::Zero(1);
        for (const auto &tuple : record.tuples) {
            if (static_cast<int>(tuple.size()) != T)
                throw IoError(opt.annotations + ":" + std::to_string(record.line) +
                              ": tuple arity " + std::to_string(tuple.size()) + " != " +
                              std::to_string(T));
            std::vector<int> ids(T);
            bool in_vocab = true;
            for (int t = 0; t < T; ++t) {
                ids[t] = vocabs[t]->lookup(tuple[t]);
                if (ids[t] < 0) in_vocab = false;  // trimmed by --max-vocab
            }
            if (in_vocab) image.gold_tuples.push_back(std::move(ids));
        }
        if (!image.gold_tuples.empty()) dataset.images.push_back(std::move(image));
    }

    fs::create_directories(opt.out_dir);
    for (int t = 0; t < T; ++t) {
        const Mat emb = ser_embeddings(count_equivalences(dataset, t));
        const auto path = (fs::path(opt.out_dir) / ("ser_" + names[t] + ".txt")).string();
        write_vectors(path, *vocabs[t], emb);
        std::cout << "wrote " << path << " (" << emb.rows() << "x" << emb.cols() << ")\n";
    }
}

struct TrainOptions {
    std::string features;
    std::string annotations;
    std::string out_model;
    std::string log_path;
    std::vector<std::string> emb_flags;
    std::string oov_policy = "fail";
    std::size_t max_vocab = SIZE_MAX;
    std::string schedule = "inverse-sqrt";
    TrainConfig config;
};

void run_train(const TrainOptions &opt) {
    const FeatureTable features = load_features(opt.features);
    const auto records = read_annotation_records(opt.annotations);
    const int T = tuple_arity(records);
    const auto names = default_type_names(T);
    const auto vocabs = build_vocabularies(records, names, opt.max_vocab);
    const auto choices = parse_emb_flags(opt.emb_flags);
    for (const auto &[type, choice] : choices)
        if (std::find(names.begin(), names.end(), type) == names.end())
            throw std::invalid_argument("--emb names unknown argument type '" + type + "'");
    const OovPolicy oov =
        opt.oov_policy == "fail" ? OovPolicy::Fail : OovPolicy::IndicatorFallback;

    EmbeddingSet emb;
    std::vector<ChainPosition> positions;
    for (int t = 0; t < T; ++t) {
        EmbChoice choice;  // defaults to indicator
        if (auto it = choices.find(names[t]); it != choices.end()) choice = it->second;
        Mat V;
        if (choice.source == EmbeddingSource::Indicator)
            V = Mat::Identity(vocabs[t]->size(), vocabs[t]->size());
        else
            V = load_external_vectors(choice.path, *vocabs[t],
                                      infer_vector_dim(choice.path), oov);
        positions.push_back({names[t], vocabs[t], static_cast<int>(V.cols())});
        emb.V.push_back(std::move(V));
        emb.source.push_back(choice.source);
    }
    const ChainSpec spec(std::move(positions), features.dim);

    const AnnotationLoad load = load_annotations(opt.annotations, spec, features);
    for (const auto &exclusion : load.excluded)
        std::cerr << "excluded " << exclusion.image_id << ": " << exclusion.reason << "\n";
    if (load.dataset.images.empty())
        throw IoError("no usable training images after joining features and annotations");

    TrainConfig config = opt.config;
    config.step_schedule = opt.schedule == "constant" ? StepSchedule::Constant
                                                      : StepSchedule::InverseSqrt;
    const TrainResult result = fobos_train(load.dataset, emb, config);

    const std::string log_path =
        opt.log_path.empty() ? opt.out_model + ".log" : opt.log_path;
    std::ofstream log(log_path);
    if (!log) throw IoError("cannot write training log: " + log_path);
    for (const auto &record : result.trace) log << format_record(record) << "\n";
    std::cout << format_record(result.trace.back()) << "\n";

    save_model(Model{spec, emb, result.params, config}, opt.out_model);
    std::cout << "wrote " << opt.out_model << " after " << result.trace.size()
              << " iterations\n";
}

struct PredictOptions {
    std::string model;
    std::string features;
    std::string out;
    int k = 5;
};

void run_predict(const PredictOptions &opt) {
    const Model model = load_model(opt.model);
    const FeatureTable features = load_features(opt.features);
    if (features.dim != model.spec.input_dim())
        throw DimensionError("feature dim " + std::to_string(features.dim) +
                             " != model input_dim " +
                             std::to_string(model.spec.input_dim()));

    std::vector<ImagePredictions> predictions;
    for (const auto &id : features.ids) {
        AnnotatedImage image{id, features.by_id.at(id), {}};
        const PredictionSet pred = predict_topk(model.params, model.emb, image, opt.k);
        ImagePredictions out{id, {}};
        for (const auto &seq : pred.top_k) {
            PredictedTuple tuple;
            for (int t = 0; t < model.spec.length(); ++t)
                tuple.tokens.push_back(model.spec.position(t).vocab->token(seq.labels[t]));
            tuple.score = seq.score;
            out.tuples.push_back(std::move(tuple));
        }
        predictions.push_back(std::move(out));
    }
    write_predictions(opt.out, predictions);
    std::cout << "wrote " << predictions.size() << " prediction records to " << opt.out
              << "\n";
}

struct EvalOptions {
    std::string predictions;
    std::string gold;
    std::string out;
    bool macro = false;
};

void run_eval(const EvalOptions &opt) {
    const auto predictions = read_predictions(opt.predictions);
    const auto records = read_annotation_records(opt.gold);
    const int T = tuple_arity(records);
    const auto names = default_type_names(T);

    // union vocabulary so unmatched predicted tokens still count as predicted
    std::vector<std::vector<std::string>> corpus_per_type(T);
    for (const auto &record : records)
        for (const auto &tuple : record.tuples) {
            if (static_cast<int>(tuple.size()) != T)
                throw IoError(opt.gold + ":" + std::to_string(record.line) +
                              ": tuple arity " + std::to_string(tuple.size()) + " != " +
                              std::to_string(T));
            for (int t = 0; t < T; ++t) corpus_per_type[t].push_back(tuple[t]);
        }
    for (const auto &pred : predictions)
        for (const auto &tuple : pred.tuples) {
            if (static_cast<int>(tuple.tokens.size()) != T)
                throw IoError(opt.predictions + ": predicted tuple arity " +
                              std::to_string(tuple.tokens.size()) + " != " +
                              std::to_string(T));
            for (int t = 0; t < T; ++t) corpus_per_type[t].push_back(tuple.tokens[t]);
        }

    std::vector<ChainPosition> positions;
    for (int t = 0; t < T; ++t) {
        auto vocab = std::make_shared<Vocabulary>(
            build_vocabulary(names[t], {corpus_per_type[t]}, SIZE_MAX));
        positions.push_back({names[t], vocab, vocab->size()});
    }
    const ChainSpec spec(std::move(positions), 1);

    Dataset gold{spec, {}};
    for (const auto &record : records) {
        AnnotatedImage image{record.image_id, Vec::Zero(1), {}};
        for (const auto &tuple : record.tuples) {
            std::vector<int> ids(T);
            for (int t = 0; t < T; ++t) ids[t] = spec.position(t).vocab->lookup(tuple[t]);
            image.gold_tuples.push_back(std::move(ids));
        }
        gold.images.push_back(std::move(image));
    }

    std::vector<PredictionSet> sets;
    for (const auto &pred : predictions) {
        PredictionSet set{pred.image_id, {}};
        for (const auto &tuple : pred.tuples) {
            ScoredSequence seq;
            for (int t = 0; t < T; ++t)
                seq.labels.push_back(spec.position(t).vocab->lookup(tuple.tokens[t]));
            seq.score = tuple.score;
            set.top_k.push_back(std::move(seq));
        }
        sets.push_back(std::move(set));
    }

    const EvalReport report = per_type_precision(
        sets, gold, opt.macro ? Averaging::Macro : Averaging::Micro);
    std::cout << format_report(report);
    if (!opt.out.empty()) write_report(opt.out, report);
}

struct InspectOptions {
    std::string model;
    double tolerance = 1e-8;
};

void run_inspect(const InspectOptions &opt) {
    const Model model = load_model(opt.model);
    for (int t = 0; t < model.spec.length(); ++t)
        std::cout << "position " << t << ": " << model.spec.position(t).argument_type
                  << " |L|=" << model.spec.num_labels(t)
                  << " n=" << model.spec.position(t).embedding_dim
                  << " embeddings=" << to_string(model.emb.source[t]) << "\n";
    print_rank_report(rank_report(model.params, opt.tolerance), std::cout);
}

struct ComboOptions {
    std::vector<std::string> models;
    std::string features;
    std::string annotations;
    std::string out;
    std::string predict_out;
    int k = 5;
};

void run_combo(const ComboOptions &opt) {
    if (opt.models.empty()) throw std::invalid_argument("combo: no model files given");
    std::vector<Model> loaded;
    for (const auto &path : opt.models) loaded.push_back(load_model(path));
    for (std::size_t i = 1; i < loaded.size(); ++i)
        for (int t = 0; t < loaded[0].spec.length(); ++t)
            if (loaded[i].spec.position(t).vocab->tokens() !=
                loaded[0].spec.position(t).vocab->tokens())
                throw std::invalid_argument("combo: model vocabularies differ between '" +
                                            opt.models[0] + "' and '" + opt.models[i] +
                                            "'");

    const FeatureTable features = load_features(opt.features);
    const AnnotationLoad load =
        load_annotations(opt.annotations, loaded[0].spec, features);
    if (load.dataset.images.empty())
        throw IoError("combo: no usable validation images");

    std::vector<NamedModel> named;
    for (std::size_t i = 0; i < loaded.size(); ++i)
        named.push_back({fs::path(opt.models[i]).filename().string(),
                         std::move(loaded[i].params), std::move(loaded[i].emb)});

    const auto assignment = combo_select(named, load.dataset, opt.k);
    for (const auto &[type, name] : assignment)
        std::cout << type << " -> " << name << "\n";
    if (!opt.out.empty()) {
        nlohmann::json j(assignment);
        std::ofstream out(opt.out);
        if (!out) throw IoError("cannot write assignment file: " + opt.out);
        out << j.dump(1) << "\n";
    }

    if (!opt.predict_out.empty()) {
        const ChainSpec &spec = load.dataset.spec;
        std::ofstream out(opt.predict_out);
        if (!out) throw IoError("cannot write combo predictions: " + opt.predict_out);
        for (const auto &id : features.ids) {
            AnnotatedImage image{id, features.by_id.at(id), {}};
            const auto sets = combo_predict(assignment, named, spec, image, opt.k);
            nlohmann::json args;
            for (int t = 0; t < spec.length(); ++t) {
                const std::string &type = spec.position(t).argument_type;
                nlohmann::json tokens = nlohmann::json::array();
                for (int label : sets.at(type))
                    tokens.push_back(spec.position(t).vocab->token(label));
                args[type] = std::move(tokens);
            }
            out << nlohmann::json{{"image_id", id}, {"arguments", args}}.dump() << "\n";
        }
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Low-rank bilinear chain CRFs with output-label embeddings"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--chain-length", synth.config.chain_length, "Positions T");
    synth_cmd->add_option("--labels", synth.config.label_counts, "Labels per position")
        ->required();
    synth_cmd->add_option("--emb-dim", synth.config.embedding_dims,
                          "Embedding dims per position")
        ->required();
    synth_cmd->add_option("--input-dim", synth.config.input_dim, "Feature dimension d");
    synth_cmd->add_option("--rank", synth.config.rank, "True rank of W and Z");
    synth_cmd->add_option("--samples", synth.config.samples, "Training sample count");
    synth_cmd->add_option("--test-samples", synth.config.test_samples,
                          "Held-out sample count");
    synth_cmd->add_option("--noise", synth.config.noise, "Feature noise scale");
    synth_cmd->add_option("--score-scale", synth.config.score_scale,
                          "Score peakedness multiplier");
    synth_cmd->add_option("--seed", synth.config.seed, "RNG seed");
    synth_cmd->callback([&] { run_synth(synth); });

    BuildSerOptions ser;
    auto *ser_cmd =
        app.add_subcommand("build-ser", "Build semantic-equivalence embeddings");
    ser_cmd->add_option("--annotations", ser.annotations, "Annotation JSONL")->required();
    ser_cmd->add_option("--out", ser.out_dir, "Output directory")->required();
    ser_cmd->add_option("--max-vocab", ser.max_vocab, "Vocabulary size cap");
    ser_cmd->callback([&] { run_build_ser(ser); });

    TrainOptions train;
    auto *train_cmd = app.add_subcommand("train", "Train a model with FOBOS");
    train_cmd->add_option("--features", train.features, "Feature JSONL")->required();
    train_cmd->add_option("--annotations", train.annotations, "Annotation JSONL")
        ->required();
    train_cmd->add_option("--out", train.out_model, "Output model file")->required();
    train_cmd->add_option("--log", train.log_path, "Training log path");
    train_cmd->add_option("--emb", train.emb_flags,
                          "Per-type embeddings, TYPE=indicator|ser:PATH|external:PATH");
    train_cmd->add_option("--oov", train.oov_policy, "OOV policy for vector files")
        ->check(CLI::IsMember({"fail", "indicator-fallback"}));
    train_cmd->add_option("--max-vocab", train.max_vocab, "Vocabulary size cap");
    train_cmd->add_option("--c1", train.config.c1, "Unary nuclear-norm weight");
    train_cmd->add_option("--c2", train.config.c2, "Binary nuclear-norm weight");
    train_cmd->add_option("--step", train.config.base_step, "Base learning rate");
    train_cmd->add_option("--max-iter", train.config.max_iter, "Iteration cap");
    train_cmd->add_option("--schedule", train.schedule, "Step schedule")
        ->check(CLI::IsMember({"constant", "inverse-sqrt"}));
    train_cmd->add_option("--tolerance", train.config.tolerance,
                          "Relative objective-change stop");
    train_cmd->add_option("--seed", train.config.seed, "RNG seed");
    train_cmd->callback([&] { run_train(train); });

    PredictOptions predict;
    auto *predict_cmd = app.add_subcommand("predict", "Decode top-k tuples");
    predict_cmd->add_option("--model", predict.model, "Model file")->required();
    predict_cmd->add_option("--features", predict.features, "Feature JSONL")->required();
    predict_cmd->add_option("--out", predict.out, "Predictions JSONL")->required();
    predict_cmd->add_option("--k", predict.k, "Tuples per image");
    predict_cmd->callback([&] { run_predict(predict); });

    EvalOptions eval;
    auto *eval_cmd = app.add_subcommand("eval", "Per-argument-type precision");
    eval_cmd->add_option("--predictions", eval.predictions, "Predictions JSONL")
        ->required();
    eval_cmd->add_option("--gold", eval.gold, "Gold annotation JSONL")->required();
    eval_cmd->add_option("--out", eval.out, "Report JSON path");
    eval_cmd->add_flag("--macro", eval.macro, "Macro-average instead of micro");
    eval_cmd->callback([&] { run_eval(eval); });

    InspectOptions inspect;
    auto *inspect_cmd = app.add_subcommand("inspect", "Rank report and nuclear norms");
    inspect_cmd->add_option("--model", inspect.model, "Model file")->required();
    inspect_cmd->add_option("--tolerance", inspect.tolerance,
                            "Effective-rank tolerance (relative)");
    inspect_cmd->callback([&] { run_inspect(inspect); });

    ComboOptions combo;
    auto *combo_cmd =
        app.add_subcommand("combo", "Per-type model selection and prediction");
    combo_cmd->add_option("--models", combo.models, "Model files")->required();
    combo_cmd->add_option("--features", combo.features, "Validation feature JSONL")
        ->required();
    combo_cmd->add_option("--annotations", combo.annotations,
                          "Validation annotation JSONL")
        ->required();
    combo_cmd->add_option("--out", combo.out, "Assignment JSON path");
    combo_cmd->add_option("--predict-out", combo.predict_out,
                          "Per-type argument sets JSONL");
    combo_cmd->add_option("--k", combo.k, "Tuples per image");
    combo_cmd->callback([&] { run_combo(combo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericalError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return 0;
}
