// latentedit: generate synthetic data, fit PCA/attribute transforms, train the
// reorganizing autoencoder, edit latents and run the evaluation protocol.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "latentedit/latentedit.hpp"

namespace fs = std::filesystem;
using namespace latentedit;
using io::Json;

namespace {

// JSON config files: subcommand options live under an object named after the
// subcommand, e.g. {"train": {"epochs": 10, "variant": "C"}}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        Json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_configurable() && !opt->get_lnames().empty() && (default_also || opt->count() > 0)) {
                const auto results = opt->results();
                if (!results.empty()) j[opt->get_lnames().front()] = results.size() == 1 ? Json(results[0]) : Json(results);
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        Json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
        return flatten(j, "", {});
    }

private:
    static std::vector<CLI::ConfigItem> flatten(const Json& j, const std::string& name, std::vector<std::string> prefix) {
        std::vector<CLI::ConfigItem> out;
        if (j.is_object()) {
            if (!name.empty()) prefix.push_back(name);
            for (auto it = j.begin(); it != j.end(); ++it) {
                auto sub = flatten(it.value(), it.key(), prefix);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
        CLI::ConfigItem item;
        item.name = name;
        item.parents = prefix;
        auto scalar = [](const Json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
            return v.dump();
        };
        if (j.is_array()) {
            for (const auto& v : j) item.inputs.push_back(scalar(v));
        } else {
            item.inputs.push_back(scalar(j));
        }
        out.push_back(std::move(item));
        return out;
    }
};

/// Resolved values of every option of a subcommand, for audit trails.
Json echo_options(const CLI::App* app) {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options({})) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
        const auto results = opt->results();
        const std::string key = opt->get_lnames().front();
        if (results.empty()) {
            const std::string def = opt->get_default_str();
            j[key] = def.empty() ? Json(nullptr) : Json(def);
        } else {
            j[key] = results.size() == 1 ? Json(results[0]) : Json(results);
        }
    }
    return j;
}

void refuse_overwrite(const fs::path& p, bool force) {
    if (fs::exists(p) && !force)
        fail(ErrorCode::ConfigInvalid, p.string() + " already exists (pass --force to overwrite)");
}

// --- gen-data ----------------------------------------------------------------

struct GenDataOpts {
    fs::path out;
    Index m = 32, K = 5, q = 8, n = 20000, lead_dim = 0;
    bool correlated = false, force = false;
    std::uint64_t seed = 1;
    std::string mapping = "linear";
    double tail_scale = 0.25, gain = 2.0;
};

void cmd_gen_data(const GenDataOpts& o) {
    refuse_overwrite(o.out / "latents.npy", o.force);
    WorldOptions wo;
    wo.lead_dim = o.lead_dim;
    wo.tail_scale = o.tail_scale;
    wo.gain = o.gain;
    wo.mapping = mapping_kind_from_string(o.mapping);
    const SyntheticWorld world = make_world(o.m, o.K, o.q, o.correlated, o.seed, wo);
    const PairedDataset ds = build_dataset(world, o.n, o.seed + 1);
    fs::create_directories(o.out);
    npy::write_matrix(ds.latents, o.out / "latents.npy");
    npy::write_matrix(ds.attributes, o.out / "attrs.npy");
    io::save(world, o.out / "world");
    std::printf("wrote %ld x %ld latents and %ld x %ld attributes to %s\n", static_cast<long>(ds.latents.rows()),
                static_cast<long>(ds.latents.cols()), static_cast<long>(ds.attributes.rows()),
                static_cast<long>(ds.attributes.cols()), o.out.string().c_str());
}

// --- fit ---------------------------------------------------------------------

struct FitOpts {
    fs::path data, model;
    Index d = 16;
    bool force = false;
};

void cmd_fit(const FitOpts& o) {
    refuse_overwrite(o.model / "pca.json", o.force);
    const PairedDataset ds = load_dataset(o.data / "latents.npy", o.data / "attrs.npy");
    if (o.d > ds.latent_dim())
        fail(ErrorCode::ConfigInvalid, "d=" + std::to_string(o.d) + " exceeds latent dimension " + std::to_string(ds.latent_dim()));
    const PcaModel pca = fit_pca(ds.latents, o.d);
    const AttributeTransform transform = fit_transform(ds.attributes);
    io::save(pca, o.model);
    io::save(transform, o.model);
    std::printf("explained variance with d=%ld: %.6f\n", static_cast<long>(o.d), explained_variance_fraction(pca, o.d));
}

// --- train -------------------------------------------------------------------

struct TrainOpts {
    fs::path data, model;
    std::string variant = "C";
    TrainConfig cfg;
    bool force = false, quiet = false;
};

void cmd_train(const TrainOpts& o, const Json& echo) {
    refuse_overwrite(o.model / "model.json", o.force);
    TrainConfig cfg = o.cfg;
    cfg.corr_mode = corr_mode_from_string(o.variant);
    const PairedDataset ds = load_dataset(o.data / "latents.npy", o.data / "attrs.npy");
    const PcaModel pca = io::load_pca(o.model);
    const AttributeTransform transform = io::load_transform(o.model);
    require_dim(ds.latent_dim(), pca.dim(), "dataset latent width vs PCA");
    require_dim(ds.num_attributes(), transform.num_attributes(), "dataset attributes vs transform");

    const Matrix top = project_top(pca, ds.latents);
    const Matrix gauss = gaussianize_rows(transform, ds.attributes);
    const TrainResult result = train(top, gauss, cfg, [&](const EpochLosses& e) {
        if (!o.quiet && (e.epoch == 1 || e.epoch % 10 == 0 || e.epoch == cfg.epochs))
            std::printf("epoch %4d  recons %.6g  attr %.6g  corr %.6g  total %.6g\n", e.epoch, e.recons, e.attr, e.corr,
                        e.total);
    });
    io::save(result.model, o.model, &cfg);
    Json manifest = io::read_json(o.model / "model.json");
    manifest["variant"] = o.variant;
    manifest["command_options"] = echo;
    io::write_json(manifest, o.model / "model.json");

    std::ofstream csv(o.model / "loss_history.csv", std::ios::trunc);
    if (!csv) fail(ErrorCode::IoError, "cannot write loss_history.csv");
    csv << "epoch,recons,attr,corr,total\n";
    char line[256];
    for (const auto& e : result.history) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.recons, e.attr, e.corr, e.total);
        csv << line;
    }
}

EditPipeline load_pipeline(const fs::path& dir) {
    EditPipeline p{io::load_pca(dir), io::load_transform(dir), io::load_model(dir)};
    validate(p);
    return p;
}

// --- edit --------------------------------------------------------------------

struct EditOpts {
    fs::path model, in, out;
    Index k = 0;
    std::optional<double> target, target_raw;
    bool force = false;
};

void cmd_edit(const EditOpts& o) {
    refuse_overwrite(o.out, o.force);
    const EditPipeline p = load_pipeline(o.model);
    if (o.target && o.target_raw) fail(ErrorCode::ConfigInvalid, "--target and --target-raw are mutually exclusive");
    if ((o.target || o.target_raw) && (o.k < 0 || o.k >= p.num_attributes()))
        fail(ErrorCode::IndexOutOfRange, "attribute index " + std::to_string(o.k) + " outside [0, " +
                                             std::to_string(p.num_attributes()) + ")");
    const Matrix in = npy::read_matrix(o.in);
    require_dim(in.cols(), p.pca.dim(), "input latent width");
    Matrix out(in.rows(), in.cols());
    for (Index i = 0; i < in.rows(); ++i) {
        EditableCode code = encode(p, in.row(i).transpose());
        if (o.target) code = set_attribute(std::move(code), o.k, *o.target);
        if (o.target_raw) code = set_attribute_raw(p, std::move(code), o.k, *o.target_raw);
        out.row(i) = decode(p, code).transpose();
    }
    npy::write_matrix(out, o.out);
    std::printf("edited %ld latents -> %s\n", static_cast<long>(out.rows()), o.out.string().c_str());
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateOpts {
    fs::path model, data, world, out, csv;
    ProtocolConfig protocol;
    std::vector<Index> excluded;
    bool force = false;
};

void cmd_evaluate(const EvaluateOpts& o, const Json& echo) {
    refuse_overwrite(o.out, o.force);
    const EditPipeline p = load_pipeline(o.model);
    const fs::path world_dir = o.world.empty() ? o.data / "world" : o.world;
    const SyntheticWorld world = io::load_world(world_dir);
    require_dim(world.m, p.pca.dim(), "world latent width vs PCA");
    require_dim(world.num_attributes, p.num_attributes(), "world attributes vs model");

    const PairedDataset ds = load_dataset(o.data / "latents.npy", o.data / "attrs.npy");
    const auto directions = fit_directions(ds.latents, ds.attributes);
    io::save(directions, o.model / "baseline");

    ProtocolConfig cfg = o.protocol;
    cfg.excluded_rows.insert(o.excluded.begin(), o.excluded.end());

    AutoencoderEditor ae{&p};
    LinearEditor linear{&directions};
    std::vector<MethodResult> methods;
    methods.push_back(run_protocol("autoencoder", ae, "gaussianized", ae.targets, world, cfg));
    methods.push_back(run_protocol("linear_baseline", linear, "latent_amplitude", linear.amplitudes, world, cfg));

    Json config{{"command_options", echo},
                {"model", io::read_json(o.model / "model.json")},
                {"world", io::read_json(world_dir / "world.json")},
                {"autoencoder_quantile_schedule", default_quantile_schedule()}};
    const Json report = make_report(methods, cfg, config);
    if (!o.out.parent_path().empty()) fs::create_directories(o.out.parent_path());
    io::write_json(report, o.out);
    if (!o.csv.empty()) {
        std::ofstream csv(o.csv, std::ios::trunc);
        if (!csv) fail(ErrorCode::IoError, "cannot write " + o.csv.string());
        csv << variation_csv(methods.front().variation);
    }
    for (const auto& m : methods)
        std::printf("%-16s mean well-edited %.4f  identity %.4f  off-diagonal sum %.4f\n", m.name.c_str(), m.mean_rate(),
                    m.mean_identity(), off_diagonal_sum(m.variation, cfg.excluded_rows));
    for (const auto& w : report["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
}

int exit_code_for(ErrorCode c) {
    switch (kind_of(c)) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numeric: return 4;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent-space attribute editing via a reorganizing autoencoder"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; per-command options nested under the command name");
    app.require_subcommand(1);

    GenDataOpts gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Sample a synthetic world and a paired (latent, attribute) dataset");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--m", gen.m, "Latent dimension")->capture_default_str();
    gen_cmd->add_option("--K", gen.K, "Attribute count")->capture_default_str();
    gen_cmd->add_option("--q", gen.q, "Identity subspace dimension")->capture_default_str();
    gen_cmd->add_option("--n", gen.n, "Sample count")->capture_default_str();
    gen_cmd->add_option("--lead-dim", gen.lead_dim, "Unit-variance leading dimensions (0 = auto)")->capture_default_str();
    gen_cmd->add_option("--tail-scale", gen.tail_scale, "Std of the trailing dimensions")->capture_default_str();
    gen_cmd->add_option("--gain", gen.gain, "Classifier sigmoid gain")->capture_default_str();
    gen_cmd->add_option("--mapping", gen.mapping, "linear | tanh-mixed")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "World seed; samples use seed + 1")->capture_default_str();
    gen_cmd->add_flag("--correlated", gen.correlated, "Plant correlations between adjacent attributes");
    gen_cmd->add_flag("--force", gen.force, "Overwrite existing files");

    FitOpts fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the PCA split and the attribute gaussianizer");
    fit_cmd->add_option("--data", fit.data, "Dataset directory (latents.npy, attrs.npy)")->required();
    fit_cmd->add_option("--model", fit.model, "Model directory")->required();
    fit_cmd->add_option("--d", fit.d, "Leading PCA components kept")->capture_default_str();
    fit_cmd->add_flag("--force", fit.force, "Overwrite existing files");

    TrainOpts tr;
    auto* train_cmd = app.add_subcommand("train", "Train the autoencoder (variant A, B or C)");
    train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
    train_cmd->add_option("--model", tr.model, "Model directory holding the fitted PCA and transform")->required();
    train_cmd->add_option("--variant", tr.variant, "A: no correlation loss, B: database correlations, C: identity")
        ->check(CLI::IsMember({"A", "B", "C"}))
        ->capture_default_str();
    train_cmd->add_option("--alpha", tr.cfg.alpha, "Attribute loss weight")->capture_default_str();
    train_cmd->add_option("--beta", tr.cfg.beta, "Correlation loss weight")->capture_default_str();
    train_cmd->add_option("--lr", tr.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--epochs", tr.cfg.epochs, "Epochs")->capture_default_str();
    train_cmd->add_option("--batch", tr.cfg.batch_size, "Batch size")->capture_default_str();
    train_cmd->add_option("--seed", tr.cfg.seed, "Initialization and shuffling seed")->capture_default_str();
    train_cmd->add_option("--hidden", tr.cfg.hidden_width, "Hidden layer width")->capture_default_str();
    train_cmd->add_option("--layers", tr.cfg.num_layers, "Layers per network")->capture_default_str();
    train_cmd->add_option("--code-dim", tr.cfg.code_dim, "Code size (0 = input width)")->capture_default_str();
    train_cmd->add_flag("--quiet", tr.quiet, "Suppress per-epoch output");
    train_cmd->add_flag("--force", tr.force, "Overwrite an existing model");

    EditOpts ed;
    auto* edit_cmd = app.add_subcommand("edit", "Edit one attribute of every latent in an .npy file");
    edit_cmd->add_option("--model", ed.model, "Model directory")->required();
    edit_cmd->add_option("--in", ed.in, "Input latents (.npy, n x m)")->required();
    edit_cmd->add_option("--out", ed.out, "Output latents (.npy)")->required();
    edit_cmd->add_option("--k", ed.k, "Attribute index (0-based)")->capture_default_str();
    auto* target_opt = edit_cmd->add_option("--target", ed.target, "Target on the gaussianized scale");
    edit_cmd->add_option("--target-raw", ed.target_raw, "Target on the raw [0,1] scale")->excludes(target_opt);
    edit_cmd->add_flag("--force", ed.force, "Overwrite the output file");

    EvaluateOpts ev;
    auto* eval_cmd = app.add_subcommand("evaluate", "Run the editing protocol for the model and the linear baseline");
    eval_cmd->add_option("--model", ev.model, "Model directory")->required();
    eval_cmd->add_option("--data", ev.data, "Dataset directory (baseline training data)")->required();
    eval_cmd->add_option("--world", ev.world, "World directory (default: <data>/world)");
    eval_cmd->add_option("--out", ev.out, "Report path (.json)")->required();
    eval_cmd->add_option("--csv", ev.csv, "Optional CSV of the autoencoder variation matrix");
    eval_cmd->add_option("--n", ev.protocol.n, "Samples per attribute")->capture_default_str();
    eval_cmd->add_option("--threshold", ev.protocol.threshold, "Well-edited threshold (raw scale)")->capture_default_str();
    eval_cmd->add_option("--seed", ev.protocol.seed, "Sampling seed")->capture_default_str();
    eval_cmd->add_option("--exclude-row", ev.excluded, "Rows left out of the off-diagonal sums");
    eval_cmd->add_flag("--force", ev.force, "Overwrite the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen_cmd) cmd_gen_data(gen);
        else if (*fit_cmd) cmd_fit(fit);
        else if (*train_cmd) cmd_train(tr, echo_options(train_cmd));
        else if (*edit_cmd) cmd_edit(ed);
        else if (*eval_cmd) cmd_evaluate(ev, echo_options(eval_cmd));
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
