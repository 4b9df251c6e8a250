#include "cli.hpp"

#include "vngender/bundle.hpp"
#include "vngender/error.hpp"
#include "vngender/eval.hpp"
#include "vngender/service.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace vngender::cli {

namespace {

constexpr int kUsageError = 2;

struct LstmFlags {
    std::size_t hidden = LstmTrainConfig{}.hidden;
    std::size_t epochs = LstmTrainConfig{}.epochs;
    std::size_t batch_size = LstmTrainConfig{}.batch_size;
    double learning_rate = LstmTrainConfig{}.learning_rate;
    std::size_t max_seq_len = LstmTrainConfig{}.max_seq_len;
    std::string embeddings;
    std::size_t embedding_dim = 300;

    void attach(CLI::App* sub) {
        sub->add_option("--hidden", hidden, "LSTM hidden size")->capture_default_str();
        sub->add_option("--epochs", epochs, "LSTM epochs")->capture_default_str();
        sub->add_option("--batch-size", batch_size, "LSTM batch size")->capture_default_str();
        sub->add_option("--lr", learning_rate, "LSTM learning rate")->capture_default_str();
        sub->add_option("--max-seq-len", max_seq_len, "LSTM token cap")->capture_default_str();
        sub->add_option("--embeddings", embeddings, "pretrained vectors in .vec text format");
        sub->add_option("--embedding-dim", embedding_dim, "embedding width")->capture_default_str();
    }

    void apply(ModelSpec& spec, const std::shared_ptr<const EmbeddingTable>& table) const {
        spec.lstm.hidden = hidden;
        spec.lstm.epochs = epochs;
        spec.lstm.batch_size = batch_size;
        spec.lstm.learning_rate = learning_rate;
        spec.lstm.max_seq_len = max_seq_len;
        spec.embedding_dim = embedding_dim;
        spec.embeddings = table;
    }

    std::shared_ptr<const EmbeddingTable> load(std::uint64_t seed, std::ostream& err) const {
        if (embeddings.empty()) return nullptr;
        std::vector<std::string> warnings;
        std::shared_ptr<const EmbeddingTable> t = load_embeddings(embeddings, embedding_dim, seed, &warnings);
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        return t;
    }
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Dataset load_checked(const std::string& path, std::ostream& err) {
    LoadResult r = load_dataset(path);
    if (!r.rejects.empty()) {
        err << "warning: " << r.rejects.size() << " row(s) rejected in " << path << " (first: line "
            << r.rejects.front().row << ": " << r.rejects.front().reason << ")\n";
    }
    return std::move(r.dataset);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot write '" + path + "'");
    f << text;
    if (!f) throw Error("io_error", "write failed for '" + path + "'");
}

std::string resolve_bundle(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("GENDER_MODEL_PATH"); env && *env) return env;
    throw ConfigError("no model bundle: pass --bundle or set GENDER_MODEL_PATH");
}

std::string fmt_double(double x) {
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << x;
    return s.str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gender prediction from Vietnamese full names", "vngender"};
    app.require_subcommand(1, 1);

    // train
    std::string data, model_kind = "mnb", vectorizer = "count", mask = "mn+fin", out_path, report;
    std::uint64_t seed = 0;
    LstmFlags lstm;
    auto* train = app.add_subcommand("train", "fit a model on the train split and save a bundle");
    train->add_option("--data", data, "labeled CSV (full_name,gender)")->required();
    train->add_option("--model", model_kind, "mnb|bnb|lr|svm|tree|forest|lstm")->capture_default_str();
    train->add_option("--vectorizer", vectorizer, "count|tfidf")->capture_default_str();
    train->add_option("--mask", mask, "fan|mn|fin|fan+mn|fan+fin|mn+fin|full")->capture_default_str();
    train->add_option("--seed", seed, "seed for split and model")->capture_default_str();
    train->add_option("--out", out_path, "bundle path")->required();
    train->add_option("--report", report, "write test metrics as JSON");
    lstm.attach(train);

    // evaluate
    std::string bundle_path;
    std::size_t show_errors = 0;
    auto* evaluate = app.add_subcommand("evaluate", "score a bundle on a labeled dataset");
    evaluate->add_option("--bundle", bundle_path, "bundle path (default: $GENDER_MODEL_PATH)");
    evaluate->add_option("--data", data, "labeled CSV")->required();
    evaluate->add_option("--report", report, "write metrics as JSON");
    evaluate->add_option("--errors", show_errors, "list up to N misclassified names");

    // ablate
    std::vector<std::string> arms;
    std::size_t threads = 0;
    auto* ablate = app.add_subcommand("ablate", "all seven component masks against a model list");
    ablate->add_option("--data", data, "labeled CSV")->required();
    ablate->add_option("--models", arms, "arms like svm:count bnb:tfidf lstm (default: six classical, count)")
        ->delimiter(',');
    ablate->add_option("--seed", seed, "split and model seed")->capture_default_str();
    ablate->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
    ablate->add_option("--out", out_path, "write the TSV table here instead of stdout");
    ablate->add_option("--report", report, "write the report as JSON");
    lstm.attach(ablate);

    // predict
    std::vector<std::string> names;
    auto* predict = app.add_subcommand("predict", "predict one line per name");
    predict->add_option("--bundle", bundle_path, "bundle path (default: $GENDER_MODEL_PATH)");
    predict->add_option("names", names, "full names")->required();

    // serve
    std::string bind = "127.0.0.1:8080";
    auto* serve_cmd = app.add_subcommand("serve", "HTTP prediction API");
    serve_cmd->add_option("--bundle", bundle_path, "bundle path (default: $GENDER_MODEL_PATH)");
    serve_cmd->add_option("--bind", bind, "host:port")->capture_default_str();

    // stats
    std::size_t top_k = 10;
    auto* stats = app.add_subcommand("stats", "label balance and top tokens per component");
    stats->add_option("--data", data, "labeled CSV")->required();
    stats->add_option("--top-k", top_k, "rows per ranked table")->capture_default_str();
    stats->add_option("--out", out_path, "write here instead of stdout");

    // synth
    std::size_t n = 0;
    double fidelity = 0.0;
    auto* synth = app.add_subcommand("synth", "planted-rule CSV corpus");
    synth->add_option("n", n, "record count")->required();
    synth->add_option("fidelity", fidelity, "probability the middle-name rule holds")->required();
    synth->add_option("seed", seed, "generator seed")->required();
    synth->add_option("--out", out_path, "write here instead of stdout");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    try {
        if (train->parsed()) {
            Dataset d = load_checked(data, err);
            ExperimentArm arm;
            arm.model = ModelSpec::defaults(parse_model_kind(model_kind), seed);
            arm.vectorizer = parse_vectorizer_mode(vectorizer) == VectorizerMode::Tfidf ? VectorizerConfig::tfidf()
                                                                                        : VectorizerConfig::count();
            lstm.apply(arm.model, lstm.load(seed, err));
            const ComponentMask m = ComponentMask::parse(mask);
            SplitSpec spec;
            spec.seed = seed;
            DatasetSplit split = stratified_split(d, spec);

            ModelBundle b;
            b.pipeline = train_pipeline(split.train, m, arm);
            b.model_id = make_model_id(b.pipeline);
            ExperimentResult r = evaluate_pipeline(b.pipeline, split.test);
            r.skipped_train = b.pipeline.skipped_training_records;

            b.train_meta["dataset"] = d.source_tag;
            b.train_meta["records"] = std::to_string(d.size());
            b.train_meta["seed"] = std::to_string(seed);
            b.train_meta["arm"] = arm.name();
            b.train_meta["mask"] = m.name();
            b.train_meta["split"] = "0.7/0.1/0.2";
            b.train_meta["vectorizer_fit_on"] = "train";
            b.train_meta["trained_at"] = utc_timestamp();
            b.train_meta["test_macro_f1"] = fmt_double(r.metrics.macro_f1);
            save_model(b, out_path);

            write_metrics_tsv(arm.name() + " " + m.name() + " (test split)", r, out);
            out << "model_id\t" << b.model_id << "\nbundle\t" << out_path << '\n';
            if (!report.empty()) write_text_file(report, experiment_to_json(arm.name() + " " + m.name(), r));
            return 0;
        }
        if (evaluate->parsed()) {
            const ModelBundle b = load_model(resolve_bundle(bundle_path));
            Dataset d = load_checked(data, err);
            ExperimentResult r = evaluate_pipeline(b.pipeline, d);
            write_metrics_tsv(b.model_id + " on " + d.source_tag, r, out);
            if (show_errors > 0) write_misclassified_tsv(r, out, show_errors);
            if (!report.empty()) write_text_file(report, experiment_to_json(b.model_id, r));
            return 0;
        }
        if (ablate->parsed()) {
            Dataset d = load_checked(data, err);
            if (arms.empty()) {
                for (ModelKind k : kClassicalKinds) arms.push_back(to_string(k) + ":count");
            }
            auto table = lstm.load(seed, err);
            std::vector<ExperimentArm> parsed;
            for (const auto& a : arms) {
                parsed.push_back(ExperimentArm::parse(a, seed));
                lstm.apply(parsed.back().model, table);
            }
            SplitSpec spec;
            spec.seed = seed;
            AblationReport rep = run_ablation(d, parsed, spec, threads);
            if (out_path.empty()) {
                write_ablation_tsv(rep, out);
            } else {
                std::ostringstream s;
                write_ablation_tsv(rep, s);
                write_text_file(out_path, s.str());
            }
            if (!report.empty()) write_text_file(report, ablation_to_json(rep));
            return 0;
        }
        if (predict->parsed()) {
            const ModelBundle b = load_model(resolve_bundle(bundle_path));
            int rc = 0;
            for (const auto& name : names) {
                try {
                    NamePrediction p = predict_name(b, name);
                    out << name << '\t' << gender_name(p.label) << '\t' << p.label << '\t' << fmt_double(p.score)
                        << '\n';
                } catch (const Error& e) {
                    out << name << "\terror\t" << e.code() << '\n';
                    rc = 1;
                }
            }
            return rc;
        }
        if (serve_cmd->parsed()) {
            auto b = std::make_shared<const ModelBundle>(load_model(resolve_bundle(bundle_path)));
            HttpServer server(b);
            const int port = server.bind(bind);
            err << "serving " << b->model_id << " on port " << port << '\n';
            server.run();
            return 0;
        }
        if (stats->parsed()) {
            Dataset d = load_checked(data, err);
            DatasetStats s = dataset_stats(d, top_k);
            if (out_path.empty()) {
                write_stats_tsv(s, out);
            } else {
                std::ostringstream o;
                write_stats_tsv(s, o);
                write_text_file(out_path, o.str());
            }
            return 0;
        }
        if (synth->parsed()) {
            Dataset d = generate_synthetic(n, fidelity, seed);
            if (out_path.empty()) {
                write_dataset_csv(d, out);
            } else {
                save_dataset(d, out_path);
            }
            return 0;
        }
    } catch (const Error& e) {
        err << "error: [" << e.code() << "] " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsageError;
}

} // namespace vngender::cli
