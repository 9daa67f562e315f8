// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when any criterion fails.

#include "guardscan/cascade.hpp"
#include "guardscan/cli.hpp"
#include "guardscan/dataset.hpp"
#include "guardscan/floors.hpp"
#include "guardscan/geometry.hpp"
#include "guardscan/hog.hpp"
#include "guardscan/spacing.hpp"
#include "guardscan/svm.hpp"
#include "guardscan/synthgen.hpp"

#include "toy_data.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

using namespace guardscan;
namespace fs = std::filesystem;

namespace {

/// Collects failed expectations of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what)
    {
        ++total_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        failed_ += !ok;
    }
    bool ok() const { return failed_ == 0; }
    int total() const { return total_; }
    std::string summary() const
    {
        if (ok()) return fmt::format("{} checks", total_);
        std::string s = fmt::format("{} of {} checks failed; first: ", failed_, total_);
        for (std::size_t i = 0; i < failures_.size(); ++i) s += (i ? "; " : "") + failures_[i];
        return s;
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
};

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

// ---------------------------------------------------------------------------------------------

void geometry_suite(Checks& c)
{
    c.expect(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0, "identical boxes");
    c.expect(iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0, "disjoint boxes");
    c.expect(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == 50.0 / 150.0, "half-shifted boxes");
    c.expect(nms({}, 0.5).empty(), "empty nms");
    const auto dup = nms({{{0, 0, 10, 10}, 0.9}, {{0, 0, 10, 10}, 0.5}}, 0.5);
    c.expect(dup.size() == 1 && dup[0].score == 0.9, "duplicate suppression");
    const Detection a{{0, 0, 10, 10}, 0.9}, b{{4, 0, 10, 10}, 0.8}, cc{{12, 0, 10, 10}, 0.7};
    c.expect(nms({b, cc, a}, 0.3) == std::vector<Detection>{a, cc}, "three-box suppression");

    Rng rng(1);
    auto box = [&] {
        return BoundingBox{static_cast<int>(rng.between(0, 40)), static_cast<int>(rng.between(0, 40)),
                           static_cast<int>(rng.between(1, 25)), static_cast<int>(rng.between(1, 25))};
    };
    for (int t = 0; t < 1000; ++t) {
        const BoundingBox p = box(), q = box();
        c.expect(iou(p, q) == iou(q, p), "iou symmetry");
        c.expect(iou(p, q) >= 0.0 && iou(p, q) <= 1.0, "iou range");

        std::vector<Detection> dets;
        const int n = static_cast<int>(rng.below(12));
        for (int i = 0; i < n; ++i) dets.push_back({box(), std::round(rng.uniform() * 10) / 10});
        const double thr = rng.uniform(0.05, 1.0);
        const auto kept = nms(dets, thr);
        for (const Detection& k : kept)
            c.expect(std::find(dets.begin(), dets.end(), k) != dets.end(), "nms output is a subset");
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = i + 1; j < kept.size(); ++j)
                c.expect(iou(kept[i].box, kept[j].box) < thr, "nms leaves no overlapping pair");
    }
}

void hog_suite(Checks& c)
{
    for (double v : compute_hog(Image(24, 72, 1, 0.6), HogParams{}).values) c.expect(v == 0.0, "constant window");

    Rng rng(2);
    int done = 0;
    while (done < 100) {
        HogParams p;
        p.cell_size = 2 + static_cast<int>(rng.below(7));
        p.block_size = 1 + static_cast<int>(rng.below(3));
        p.block_stride = 1 + static_cast<int>(rng.below(2));
        p.bins = 2 + static_cast<int>(rng.below(12));
        const int cx = p.block_size + static_cast<int>(rng.below(6));
        const int cy = p.block_size + static_cast<int>(rng.below(6));
        const int w = cx * p.cell_size, h = cy * p.cell_size;
        if (w < 3 || h < 3) continue;
        const std::size_t expected = static_cast<std::size_t>((cx - p.block_size) / p.block_stride + 1) *
                                     static_cast<std::size_t>((cy - p.block_size) / p.block_stride + 1) *
                                     static_cast<std::size_t>(p.block_size * p.block_size * p.bins);
        c.expect(compute_hog(testing::random_texture(w, h, rng), p).size() == expected, "length formula");
        c.expect(hog_length(w, h, p) == expected, "hog_length");
        ++done;
    }

    HogParams p;
    p.epsilon = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Image w = testing::random_texture(24, 72, rng);
        Image half = w;
        for (double& v : half.data) v *= 0.5;
        const HogDescriptor x = compute_hog(w, p), y = compute_hog(half, p);
        for (std::size_t i = 0; i < x.size(); ++i)
            c.expect(std::abs(x.values[i] - y.values[i]) <= 1e-9, "scale invariance");
    }
}

void svm_suite(Checks& c)
{
    SvmTrainConfig two;
    two.c = 1000.0;
    two.tolerance = 1e-9;
    const LinearSvmModel m = train_linear_svm(testing::two_points(), two);
    const double angle = std::atan2(std::abs(m.weights[1]), m.weights[0]) * 180.0 / std::numbers::pi;
    c.expect(angle < 1.0, fmt::format("weight direction {:.3g} deg off the x-axis", angle));
    c.expect(std::abs(m.bias) < 1e-3, fmt::format("bias {:.3g}", m.bias));
    c.expect(std::abs(svm_score(m, std::vector<double>{0.0, 5.0})) < 1e-3, "boundary passes through x = 0");

    SvmTrainConfig sep;
    sep.c = 10.0;
    sep.tolerance = 1e-6;
    sep.max_epochs = 5000;
    const LabeledWindowSet s = testing::separable_set(200, 4);
    c.expect(testing::training_accuracy(train_linear_svm(s, sep), s) == 1.0, "separable set has training errors");

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SvmTrainConfig cfg;
        cfg.seed = seed;
        cfg.tolerance = 1e-8;
        cfg.max_epochs = 200;
        SvmTrainTrace trace;
        train_linear_svm(testing::noisy_set(120, 6, seed), cfg, &trace);
        c.expect(trace.dual_objective.size() >= 2, "objective trace recorded");
        for (std::size_t e = 1; e < trace.dual_objective.size(); ++e)
            c.expect(trace.dual_objective[e] <= trace.dual_objective[e - 1] + 1e-12, "objective monotone per epoch");
    }
}

void cascade_suite(Checks& c)
{
    Rng rng(3);
    const auto pos = testing::bar_positives(60, rng);
    const auto neg = testing::hard_negatives(400, rng);
    CascadeTrainConfig cfg;
    CascadeTrainTrace trace;
    const CascadeModel m = train_cascade(pos, neg, cfg, &trace);
    c.expect(m.stages.size() >= 2, "construction data needs several stages");
    for (const CascadeStageReport& r : trace.stages)
        c.expect(r.false_positive_rate <= cfg.max_fp_rate, fmt::format("stage FPR {:.3f}", r.false_positive_rate));

    auto passes = [](const CascadeStage& st, const Image& w) {
        return stage_score(st, compute_hog(w, st.hog)) >= st.stage_threshold;
    };
    std::vector<Image> probe = testing::hard_negatives(200, rng);
    for (const Image& p : pos) probe.push_back(p);
    for (const Image& w : probe) {
        const CascadeResult r = cascade_classify(m, w);
        bool alive = true;
        int first_reject = -1;
        for (std::size_t s = 0; s < m.stages.size() && alive; ++s) {
            alive = passes(m.stages[s], w);
            if (!alive) first_reject = static_cast<int>(s);
        }
        c.expect(r.accepted == alive, "decision matches stage-by-stage evaluation");
        c.expect(r.rejected_at_stage == first_reject, "rejection stage matches the first failing stage");
        c.expect(r.stages_evaluated == (alive ? static_cast<int>(m.stages.size()) : first_reject + 1),
                 "stages evaluated stop at the rejection");
    }

    // Survivor sets shrink stage by stage.
    std::vector<bool> prev(probe.size(), true);
    for (const CascadeStage& st : m.stages) {
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const bool now = prev[i] && passes(st, probe[i]);
            c.expect(!now || prev[i], "survivors are a subset of the previous stage's survivors");
            prev[i] = now;
        }
    }

    CascadeModel open = m;
    CascadeStage never = m.stages.back();
    never.stage_threshold = -1e18;
    open.stages.push_back(never);
    const auto it = std::find_if(neg.begin(), neg.end(), [&](const Image& w) { return !passes(m.stages[0], w); });
    c.expect(it != neg.end(), "some negative is rejected at the first stage");
    if (it != neg.end()) {
        const CascadeResult r = cascade_classify(open, *it);
        c.expect(r.stages_evaluated == 1 && r.rejected_at_stage == 0, "early exit after the first stage");
    }
}

void em_suite(Checks& c)
{
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const int true_k = static_cast<int>(rng.between(1, 4));
        std::vector<GmmComponent> mix;
        for (int k = 0; k < true_k; ++k) mix.push_back({1.0 / true_k, rng.uniform(0.3, 3.5), rng.uniform(0.001, 0.1)});
        const auto xs = testing::draw_mixture(rng, mix, static_cast<int>(rng.between(50, 600)));
        EmConfig cfg;
        cfg.seed = rng.next();
        EmTrace trace;
        fit_gmm_em(xs, static_cast<int>(rng.between(1, 5)), cfg, &trace);
        for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i)
            c.expect(trace.log_likelihood[i] >= trace.log_likelihood[i - 1] - 1e-9, "log-likelihood decreased");
    }

    Rng two(5);
    const auto xs = testing::draw_mixture(two, {{0.5, 1.0, 0.005}, {0.5, 2.0, 0.005}}, 1000);
    const GmmModel m = fit_gmm_em(xs, 2, EmConfig{});
    std::vector<double> means{m.components[0].mean, m.components[1].mean};
    std::sort(means.begin(), means.end());
    c.expect(std::abs(means[0] - 1.0) < 0.05 && std::abs(means[1] - 2.0) < 0.05,
             fmt::format("recovered means {:.3f}, {:.3f}", means[0], means[1]));

    Rng three(6);
    const auto ys = testing::draw_mixture(three, {{0.4, 1.0, 0.003}, {0.35, 2.0, 0.003}, {0.25, 3.0, 0.003}}, 900);
    const BicChoice choice = select_k_bic(ys, 1, 5, EmConfig{});
    c.expect(choice.k == 3, fmt::format("BIC chose k = {}", choice.k));
}

void dp_suite(Checks& c)
{
    Rng rng(7);
    for (int inst = 0; inst < 500; ++inst) {
        std::vector<GmmComponent> mix;
        const int k = static_cast<int>(rng.between(1, 3));
        for (int j = 0; j < k; ++j) mix.push_back({1.0 / k, rng.uniform(0.3, 2.5), rng.uniform(0.002, 0.1)});
        UbiquityConfig uc;
        uc.tau_peak_fraction = rng.uniform(0.05, 0.6);
        const UbiquityTable t = build_ubiquity_table(GmmModel{mix}, uc);
        const int n = static_cast<int>(rng.between(2, 12));
        std::vector<Detection> d;
        for (int i = 0; i < n; ++i) d.push_back(testing::post_at(static_cast<int>(rng.between(0, 800)), rng.uniform()));
        const double oracle = testing::best_chain_by_enumeration(d, t);
        const ChainResult r = select_best_combination_detailed(d, t);
        c.expect(r.objective == oracle, fmt::format("instance {}: {} vs enumeration {}", inst, r.objective, oracle));
    }
}

void floor_suite(Checks& c)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthConfig sc;
        sc.seed = seed;
        sc.noise_sigma = 0.0;
        FloorConfig fc;
        fc.k = static_cast<int>(sc.floor_ys.size()) + 2;
        const SynthScene scene = render_facade(sc);
        const auto floors = detect_floors(scene.image, fc);
        for (const FloorLine& truth : scene.true_floor_lines) {
            const bool hit = std::any_of(floors.begin(), floors.end(), [&](const FloorLine& f) {
                return std::abs(f.intercept - truth.intercept) <= 3.0;
            });
            c.expect(hit, fmt::format("seed {} floor {}", seed, truth.intercept));
        }
    }

    const std::vector<FloorLine> floors{{0.0, 150.0, 600, 4}, {0.0, 330.0, 600, 4}};
    Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
        const FloorLine& f = floors[rng.below(2)];
        const int offset = static_cast<int>(rng.between(-25, 25));
        const Detection d = testing::post_at(static_cast<int>(rng.between(20, 580)), 1.0,
                                             static_cast<int>(f.intercept) + offset - 72);
        const bool kept = filter_by_floor({d}, floors, 10.0).size() == 1;
        c.expect(kept == (std::abs(offset) <= 10), fmt::format("planted offset {}", offset));
    }
}

// ---------------------------------------------------------------------------------------------

struct EndToEnd {
    bool ran = false;
    std::string failure;
    std::map<std::string, std::pair<double, double>> rows;  // label -> (precision, recall)
    std::string eval_stdout;
    std::vector<std::string> labels;
};

/// The documented quickstart (synth, train-svm, train-cascade, eval) plus the remaining
/// subcommands, run in-process into `dir`.
EndToEnd quickstart(const fs::path& dir)
{
    EndToEnd e;
    const std::string data = (dir / "data").string();
    const std::string svm = (dir / "svm.json").string(), cascade = (dir / "cascade.json").string();
    const std::string spacing = (dir / "spacing.json").string();
    const std::string image = (dir / "data" / "images" / "scene_0035.png").string();
    const std::vector<std::vector<std::string>> steps{
        {"synth", "--out", data},
        {"train-svm", "--data", data, "--out", svm, "--jobs", "4"},
        {"train-cascade", "--data", data, "--out", cascade, "--jobs", "4"},
        {"train-spacing", "--data", data, "--out", spacing, "--histogram", (dir / "spacing_hist.csv").string()},
        {"eval", "--data", data, "--svm", svm, "--cascade", cascade, "--stages", "all", "--out",
         (dir / "report").string(), "--jobs", "4"},
        {"detect", "--model", svm, "--image", image, "--out", (dir / "detect.jsonl").string()},
        {"floors", "--image", image, "--out", (dir / "floors.jsonl").string()},
        {"pipeline", "--model", cascade, "--spacing", spacing, "--input", (dir / "data" / "images").string(),
         "--out", (dir / "pipeline").string(), "--jobs", "4"},
        {"report", "--csv", (dir / "report" / "report.csv").string()},
    };
    for (const auto& args : steps) {
        const CliRun r = cli(args);
        if (r.code != 0) {
            e.failure = fmt::format("'{}' exited {}: {}", args[0], r.code, r.err);
            return e;
        }
        if (args[0] == "eval") e.eval_stdout = r.out;
        if (args[0] == "report") write_file_atomic(dir / "report_stdout.txt", r.out);
    }
    std::istringstream in(e.eval_stdout);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string label, p, r;
        std::getline(fields, label, ',');
        std::getline(fields, p, ',');
        std::getline(fields, r, ',');
        e.labels.push_back(label);
        e.rows[label] = {std::stod(p), std::stod(r)};
    }
    e.ran = true;
    return e;
}

void trend(Checks& c, const EndToEnd& e)
{
    c.expect(e.ran, e.failure);
    if (!e.ran) return;
    for (const std::string cls : {"Cascade Classifier", "Linear SVM"}) {
        const auto raw = e.rows.at(cls);
        const auto floor = e.rows.at(cls + " and Floor Detection");
        const auto full = e.rows.at(cls + " and Floor Detection and Space Estimation");
        c.expect(full.first > floor.first && floor.first > raw.first,
                 fmt::format("{} precision {:.4f} -> {:.4f} -> {:.4f}", cls, raw.first, floor.first, full.first));
        c.expect(raw.second - full.second <= 0.20,
                 fmt::format("{} recall drop {:.4f}", cls, raw.second - full.second));
    }
    const auto cascade = e.rows.at("Cascade Classifier and Floor Detection and Space Estimation");
    c.expect(cascade.first >= 0.5 && cascade.second >= 0.6,
             fmt::format("cascade full pipeline precision {:.4f} recall {:.4f}", cascade.first, cascade.second));
}

std::string trend_detail(const EndToEnd& e)
{
    if (!e.ran) return "";
    std::string s;
    for (const std::string& l : e.labels)
        s += fmt::format("{}{} P={:.3f} R={:.3f}", s.empty() ? "" : "; ", l, e.rows.at(l).first, e.rows.at(l).second);
    return s;
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& f : fs::recursive_directory_iterator(root))
        if (f.is_regular_file()) out[fs::relative(f.path(), root).string()] = read_file(f.path());
    return out;
}

void determinism(Checks& c, const fs::path& first, const EndToEnd& e)
{
    c.expect(e.ran, e.failure);
    if (!e.ran) return;
    const fs::path second = first.parent_path() / "rerun";
    const EndToEnd again = quickstart(second);
    c.expect(again.ran, again.failure);
    const auto a = snapshot(first), b = snapshot(second);
    c.expect(a.size() == b.size(), fmt::format("{} vs {} files", a.size(), b.size()));
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        c.expect(it != b.end() && it->second == bytes, name + " differs");
    }
    for (const char* f : {"svm.json", "cascade.json", "spacing.json", "detect.jsonl", "report/report.csv",
                          "pipeline/detections.jsonl"})
        c.expect(a.count(f) == 1, fmt::format("{} was not written", f));
}

void report_shape(Checks& c, const EndToEnd& e)
{
    c.expect(e.ran, e.failure);
    if (!e.ran) return;
    const std::vector<std::string> expected{
        "Cascade Classifier",
        "Linear SVM",
        "Cascade Classifier and Floor Detection",
        "Linear SVM and Floor Detection",
        "Cascade Classifier and Floor Detection and Space Estimation",
        "Linear SVM and Floor Detection and Space Estimation",
    };
    c.expect(e.labels == expected, "row labels or order");
    std::istringstream in(e.eval_stdout);
    std::string line;
    std::getline(in, line);
    c.expect(line == "config,precision,recall,tp,fp,fn", "header: " + line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream fields(line);
        for (std::string x; std::getline(fields, x, ',');) f.push_back(x);
        c.expect(f.size() == 6, "six columns: " + line);
        if (f.size() != 6) continue;
        const double tp = std::stod(f[3]), fp = std::stod(f[4]), fn = std::stod(f[5]);
        const double precision = tp + fp > 0 ? tp / (tp + fp) : (fn == 0 ? 1.0 : 0.0);
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 1.0;
        c.expect(f[1] == fmt::format("{:.4f}", precision), "precision column is tp/(tp+fp): " + line);
        c.expect(f[2] == fmt::format("{:.4f}", recall), "recall column is tp/(tp+fn): " + line);
    }
}

}  // namespace

int main()
{
    const fs::path work = fs::temp_directory_path() / fmt::format("guardscan_acceptance_{}", ::getpid());
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path first = work / "run";

    EndToEnd e2e;
    std::string e2e_detail;
    struct Criterion {
        int id;
        std::string name;
        double limit_s;
        std::function<void(Checks&)> body;
        std::function<std::string()> detail;
    };
    const std::vector<Criterion> criteria{
        {1, "geometry oracle suite", 5, geometry_suite, nullptr},
        {2, "HOG suite", 10, hog_suite, nullptr},
        {3, "SVM suite", 30, svm_suite, nullptr},
        {4, "cascade suite", 60, cascade_suite, nullptr},
        {5, "EM/GMM suite", 60, em_suite, nullptr},
        {6, "DP optimality", 60, dp_suite, nullptr},
        {7, "floor suite", 60, floor_suite, nullptr},
        {8, "end-to-end trend", 600,
         [&](Checks& c) {
             e2e = quickstart(first);
             trend(c, e2e);
         },
         [&] { return trend_detail(e2e); }},
        {9, "determinism", 600, [&](Checks& c) { determinism(c, first, e2e); }, nullptr},
        {10, "report shape", 60, [&](Checks& c) { report_shape(c, e2e); }, nullptr},
    };

    int failed = 0;
    for (const Criterion& cr : criteria) {
        Checks checks;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(checks);
        } catch (const std::exception& ex) {
            checks.expect(false, std::string("exception: ") + ex.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < cr.limit_s;
        const bool pass = checks.ok() && in_time;
        failed += !pass;
        std::string detail = checks.summary();
        if (cr.detail && !cr.detail().empty()) detail += "; " + cr.detail();
        std::printf("criterion %d: %s  %s (%s; %.2f s, limit %.0f s%s)\n", cr.id, pass ? "PASS" : "FAIL",
                    cr.name.c_str(), detail.c_str(), secs, cr.limit_s, in_time ? "" : ", too slow");
        std::fflush(stdout);
    }
    fs::remove_all(work);
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
