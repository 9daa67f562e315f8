#include "guardscan/cli.hpp"

#include "guardscan/config.hpp"
#include "guardscan/dataset.hpp"
#include "guardscan/detector.hpp"
#include "guardscan/image_io.hpp"
#include "guardscan/log.hpp"
#include "guardscan/model_io.hpp"
#include "guardscan/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace guardscan {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Problems with the invocation itself; reported with exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    bool echo_config = false;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_file, "JSON configuration file");
    cmd->add_option("--set", o.overrides, "Override a config value, e.g. --set scan.stride_x=8")->take_all();
    cmd->add_flag("--echo-config", o.echo_config, "Print the resolved configuration and exit");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

PipelineConfig resolve(const CommonOptions& o, std::vector<std::string> flag_overrides)
{
    std::vector<std::string> all = o.overrides;
    if (o.jobs) all.push_back("jobs=" + std::to_string(*o.jobs));
    all.insert(all.end(), flag_overrides.begin(), flag_overrides.end());
    const fs::path file = o.config_file;
    try {
        return resolve_config(o.config_file.empty() ? nullptr : &file, all);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

template <typename Model>
Model load_model_as(const std::string& path, const char* kind)
{
    WindowClassifier m = load_model(path);
    if (!std::holds_alternative<Model>(m))
        throw std::runtime_error("'" + path + "' does not hold a " + kind + " model");
    return std::get<Model>(std::move(m));
}

json detections_json(const std::vector<Detection>& dets)
{
    json a = json::array();
    for (const Detection& d : dets) a.push_back(json::array({d.box.x, d.box.y, d.box.w, d.box.h, d.score}));
    return a;
}

json floor_json(const FloorLine& f)
{
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"coverage", f.coverage}, {"support", f.support}};
}

json floors_json(const std::vector<FloorLine>& floors)
{
    json a = json::array();
    for (const FloorLine& f : floors) a.push_back(floor_json(f));
    return a;
}

std::string detection_lines(const std::string& image, const std::vector<Detection>& dets)
{
    std::string s;
    for (const Detection& d : dets)
        s += json{{"image", image}, {"x", d.box.x}, {"y", d.box.y}, {"w", d.box.w}, {"h", d.box.h}, {"score", d.score}}
                 .dump() +
             "\n";
    return s;
}

std::string floor_lines(const std::string& image, const std::vector<FloorLine>& floors)
{
    std::string s;
    for (const FloorLine& f : floors) {
        json j = floor_json(f);
        j["image"] = image;
        s += j.dump() + "\n";
    }
    return s;
}

void write_overlay(const Image& img, const std::vector<FloorLine>& floors, const std::vector<Detection>& dets,
                   const std::vector<BoundingBox>& gt, const fs::path& path)
{
    Image rgb = to_rgb(img);
    for (const FloorLine& f : floors) draw_row_line(rgb, f.slope, f.intercept, colors::white);
    for (const BoundingBox& b : gt) draw_box(rgb, b, colors::red);
    for (const Detection& d : dets) draw_box(rgb, d.box, colors::blue);
    save_png(rgb, path);
}

std::string slug(const std::string& label)
{
    std::string s;
    for (char c : label) s += c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<fs::path> list_images(const fs::path& input)
{
    if (!fs::exists(input)) throw std::runtime_error("input not found: '" + input.string() + "'");
    if (!fs::is_directory(input)) return {input};
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(input)) {
        const std::string ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".png" || ext == ".pgm" || ext == ".ppm")) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

SpacingModel spacing_from_args(const std::string& spacing_path, const std::string& data_dir,
                               const PipelineConfig& cfg)
{
    if (!spacing_path.empty()) return load_spacing_model(spacing_path);
    if (data_dir.empty()) throw UsageError("spacing needs --spacing or --data to fit one");
    return fit_spacing_model(load_dataset(data_dir), cfg.spacing);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Guardrail post detection: sliding-window classifiers, floor lines and spacing."};
    app.name("guardscan");
    app.require_subcommand(1);
    CommonOptions common;
    std::string out_path, data_dir, image_path, model_path, spacing_path, cascade_path, svm_path, input;
    std::string stages = "all", classifier = "both", csv_path, format = "table", histogram_path;
    std::optional<int> n_train, n_test;
    std::optional<std::uint64_t> seed;
    long long frames = 0, stride = 0;
    double fps = 0.0, skip = 0.0;

    CLI::App* synth = app.add_subcommand("synth", "Render a synthetic facade dataset");
    synth->add_option("--out", out_path, "Output dataset directory")->required();
    synth->add_option("--train", n_train, "Training images");
    synth->add_option("--test", n_test, "Test images");
    synth->add_option("--seed", seed, "Dataset seed");

    CLI::App* train_svm = app.add_subcommand("train-svm", "Train the linear SVM window classifier");
    CLI::App* train_cascade_cmd = app.add_subcommand("train-cascade", "Train the cascade window classifier");
    CLI::App* train_spacing = app.add_subcommand("train-spacing", "Fit the post spacing model");
    for (CLI::App* cmd : {train_svm, train_cascade_cmd, train_spacing}) {
        cmd->add_option("--data", data_dir, "Dataset directory")->required();
        cmd->add_option("--out", out_path, "Output model file")->required();
    }
    train_spacing->add_option("--histogram", histogram_path, "Also write spacing histogram and fitted curves as CSV");

    CLI::App* detect_cmd = app.add_subcommand("detect", "Sliding-window detection with NMS on one image");
    detect_cmd->add_option("--model", model_path, "Classifier model file")->required();
    detect_cmd->add_option("--image", image_path, "Input image")->required();
    detect_cmd->add_option("--out", out_path, "Write detections JSON here instead of stdout");

    CLI::App* floors_cmd = app.add_subcommand("floors", "Detect floor lines in one image");
    floors_cmd->add_option("--image", image_path, "Input image")->required();
    floors_cmd->add_option("--out", out_path, "Write floor lines JSON here instead of stdout");

    CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "Detection, floor filter and spacing selection");
    pipeline_cmd->add_option("--model", model_path, "Classifier model file")->required();
    pipeline_cmd->add_option("--spacing", spacing_path, "Spacing model file");
    pipeline_cmd->add_option("--data", data_dir, "Dataset used to fit a spacing model when --spacing is absent");
    pipeline_cmd->add_option("--input", input, "Image file or directory of images")->required();
    pipeline_cmd->add_option("--out", out_path, "Output directory")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "Precision and recall per stage combination on the test split");
    eval_cmd->add_option("--data", data_dir, "Dataset directory")->required();
    eval_cmd->add_option("--cascade", cascade_path, "Cascade model file");
    eval_cmd->add_option("--svm", svm_path, "SVM model file");
    eval_cmd->add_option("--spacing", spacing_path, "Spacing model file (fitted on the training split if absent)");
    eval_cmd->add_option("--stages", stages, "all | raw | floor | spacing");
    eval_cmd->add_option("--classifier", classifier, "both | cascade | svm");
    eval_cmd->add_option("--out", out_path, "Directory for report.csv, report.txt and per_image.jsonl");

    CLI::App* report_cmd = app.add_subcommand("report", "Render a report CSV");
    report_cmd->add_option("--csv", csv_path, "report.csv written by eval")->required();
    report_cmd->add_option("--format", format, "table | csv")->check(CLI::IsMember({"table", "csv"}));

    CLI::App* keyframes_cmd = app.add_subcommand("keyframes", "Keyframe indices of a clip");
    keyframes_cmd->add_option("--frames", frames, "Total frames")->required();
    keyframes_cmd->add_option("--fps", fps, "Frames per second")->required();
    keyframes_cmd->add_option("--skip", skip, "Seconds skipped at both ends")->required();
    keyframes_cmd->add_option("--stride", stride, "Frame stride")->required();

    for (CLI::App* cmd : app.get_subcommands({})) add_common(cmd, common);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        std::vector<std::string> flag_overrides;
        if (n_train) flag_overrides.push_back("dataset.n_train=" + std::to_string(*n_train));
        if (n_test) flag_overrides.push_back("dataset.n_test=" + std::to_string(*n_test));
        if (seed) flag_overrides.push_back("synth.seed=" + std::to_string(*seed));
        const PipelineConfig cfg = resolve(common, flag_overrides);
        if (common.echo_config) {
            out << config_to_json(cfg).dump(2) << "\n";
            return 0;
        }

        if (synth->parsed()) {
            const DatasetManifest m = make_dataset(cfg.synth, cfg.n_train, cfg.n_test, out_path);
            log::info("wrote {} training and {} test images to {}", m.train.size(), m.test.size(), out_path);
        } else if (train_svm->parsed()) {
            const WindowSamples samples = mine_dataset_windows(load_dataset(data_dir), cfg);
            GridSearchResult gs;
            const LinearSvmModel model = train_svm_from_samples(samples, cfg, &gs);
            for (const GridSearchRow& row : gs.table) log::info("C = {}: mean accuracy {:.4f}", row.c, row.mean_accuracy);
            save_model(model, out_path);
        } else if (train_cascade_cmd->parsed()) {
            const WindowSamples samples = mine_dataset_windows(load_dataset(data_dir), cfg);
            CascadeTrainTrace trace;
            const CascadeModel model = train_cascade(samples.positives, samples.negatives, cfg.cascade, &trace);
            for (std::size_t i = 0; i < trace.stages.size(); ++i)
                log::info("stage {}: {} stumps, detection rate {:.4f}, false positive rate {:.4f}", i,
                          trace.stages[i].stumps, trace.stages[i].detection_rate,
                          trace.stages[i].false_positive_rate);
            save_model(model, out_path);
        } else if (train_spacing->parsed()) {
            const Dataset ds = load_dataset(data_dir);
            const SpacingModel m = fit_spacing_model(ds, cfg.spacing);
            save_spacing_model(m, out_path);
            if (!histogram_path.empty())
                write_file_atomic(histogram_path, spacing_histogram_csv(training_spacings(ds), m.gmm,
                                                                        cfg.spacing.ubiquity.bins,
                                                                        cfg.spacing.ubiquity.s_max));
        } else if (detect_cmd->parsed()) {
            const WindowClassifier model = load_model(model_path);
            const std::string name = fs::path(image_path).filename().string();
            const std::string text = detection_lines(name, detect(load_image(image_path), model, cfg.scan, cfg.jobs));
            if (out_path.empty()) out << text;
            else write_file_atomic(out_path, text);
        } else if (floors_cmd->parsed()) {
            const std::string name = fs::path(image_path).filename().string();
            const std::string text = floor_lines(name, detect_floors(load_image(image_path), cfg.floors));
            if (out_path.empty()) out << text;
            else write_file_atomic(out_path, text);
        } else if (pipeline_cmd->parsed()) {
            const WindowClassifier model = load_model(model_path);
            const SpacingModel spacing = spacing_from_args(spacing_path, data_dir, cfg);
            const std::vector<fs::path> images = list_images(input);
            const fs::path dir = out_path;
            std::string dets, floors;
            for (const fs::path& p : images) {
                const Image img = load_image(p);
                const ImageStages st = run_stages(img, model, spacing.table, cfg);
                const std::string name = p.filename().string();
                log::info("{}: {} raw, {} near floors, {} kept", name, st.raw.size(), st.floor_filtered.size(),
                          st.spacing_selected.size());
                dets += detection_lines(name, st.spacing_selected);
                floors += floor_lines(name, st.floors);
                write_overlay(img, st.floors, st.spacing_selected, {}, dir / "overlays" / (p.stem().string() + ".png"));
            }
            write_file_atomic(dir / "detections.jsonl", dets);
            write_file_atomic(dir / "floors.jsonl", floors);
        } else if (eval_cmd->parsed()) {
            std::vector<StageCombo> combos;
            try {
                combos = stage_combos(stages, classifier);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const Dataset ds = load_dataset(data_dir);
            PipelineModels models;
            for (const StageCombo& c : combos) {
                if (c.kind == ClassifierKind::cascade && !models.cascade) {
                    if (cascade_path.empty()) throw UsageError("eval needs --cascade for the cascade rows");
                    models.cascade = load_model_as<CascadeModel>(cascade_path, "cascade");
                }
                if (c.kind == ClassifierKind::svm && !models.svm) {
                    if (svm_path.empty()) throw UsageError("eval needs --svm for the SVM rows");
                    models.svm = load_model_as<LinearSvmModel>(svm_path, "linear SVM");
                }
                if (c.spacing && !models.spacing)
                    models.spacing = spacing_path.empty() ? fit_spacing_model(ds, cfg.spacing)
                                                          : load_spacing_model(spacing_path);
            }
            std::vector<ImageRecord> records;
            const std::vector<EvalReport> reports = evaluate_pipeline(ds, combos, models, cfg, &records);
            const std::string csv = report_csv(reports);
            out << csv;
            if (!out_path.empty()) {
                const fs::path dir = out_path;
                write_file_atomic(dir / "report.csv", csv);
                write_file_atomic(dir / "report.txt", report_table(reports));
                std::string lines;
                for (const ImageRecord& r : records) {
                    json gt = json::array();
                    for (const BoundingBox& b : r.ground_truth) gt.push_back(json::array({b.x, b.y, b.w, b.h}));
                    lines += json{{"image", r.image},
                                  {"config", r.label},
                                  {"floors", floors_json(r.floors)},
                                  {"ground_truth", gt},
                                  {"detections", detections_json(r.detections)}}
                                 .dump() +
                             "\n";
                }
                write_file_atomic(dir / "per_image.jsonl", lines);
                for (const ImageRecord& r : records)
                    write_overlay(load_image(ds.root / "images" / r.image), r.floors, r.detections, r.ground_truth,
                                  dir / "overlays" / slug(r.label) / r.image);
            }
        } else if (report_cmd->parsed()) {
            std::vector<EvalReport> rows;
            std::istringstream in(read_file(csv_path));
            std::string line;
            std::getline(in, line);
            if (line != "config,precision,recall,tp,fp,fn")
                throw std::runtime_error("'" + csv_path + "' is not a report CSV");
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::vector<std::string> cells;
                std::istringstream ls(line);
                for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
                if (cells.size() != 6) throw std::runtime_error("malformed report row: " + line);
                EvalReport r;
                r.label = cells[0];
                r.precision = std::stod(cells[1]);
                r.recall = std::stod(cells[2]);
                r.tp = std::stoi(cells[3]);
                r.fp = std::stoi(cells[4]);
                r.fn = std::stoi(cells[5]);
                rows.push_back(std::move(r));
            }
            out << (format == "csv" ? report_csv(rows) : report_table(rows));
        } else if (keyframes_cmd->parsed()) {
            for (long long k : keyframe_indices(frames, fps, skip, stride)) out << k << "\n";
        }
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const std::bad_variant_access&) {
        err << "error: model file holds a different classifier kind than requested\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace guardscan
