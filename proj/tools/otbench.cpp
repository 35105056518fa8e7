// otbench: fundus preprocessing, augmentation and cross-validated
// benchmarking from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 runtime/training error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otbench/otbench.hpp"

namespace fs = std::filesystem;
using namespace otbench;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
};

struct PipelineFlags {
    std::string denoiser = "gaussian";
    std::string normalizer = "max";
    std::size_t background_window = 51;
    std::size_t gaussian_window = 51;
    double sigma = 0.0;
    double clip_limit = 2.0;
    std::size_t tiles = 8;
    std::size_t bins = 256;
    std::size_t nlmd_search = 10;
    std::size_t nlmd_patch = 3;
    double nlmd_h = 0.1;

    void attach(CLI::App* app)
    {
        app->add_option("--denoiser", denoiser, "gaussian|nlmd")->capture_default_str();
        app->add_option("--normalizer", normalizer, "max|gaussian")->capture_default_str();
        app->add_option("--background-window", background_window, "illumination mean-filter size (odd)")
            ->capture_default_str();
        app->add_option("--gaussian-window", gaussian_window, "Gaussian kernel size (odd)")->capture_default_str();
        app->add_option("--sigma", sigma, "Gaussian sigma; 0 = (k-1)/6")->capture_default_str();
        app->add_option("--clip-limit", clip_limit, "CLAHE clip limit (x uniform bin height)")->capture_default_str();
        app->add_option("--tiles", tiles, "CLAHE tile grid (tiles x tiles)")->capture_default_str();
        app->add_option("--bins", bins, "CLAHE histogram bins")->capture_default_str();
        app->add_option("--nlmd-search", nlmd_search, "NLMD search radius")->capture_default_str();
        app->add_option("--nlmd-patch", nlmd_patch, "NLMD patch radius")->capture_default_str();
        app->add_option("--nlmd-h", nlmd_h, "NLMD filter strength")->capture_default_str();
    }

    PreprocessConfig config() const
    {
        PreprocessConfig c;
        c.denoiser = parse_denoiser(denoiser);
        c.normalizer = parse_normalizer(normalizer);
        c.background_window = background_window;
        c.gaussian_window = gaussian_window;
        c.gaussian_sigma = sigma;
        c.clahe.clip_limit = clip_limit;
        c.clahe.tile_rows = c.clahe.tile_cols = tiles;
        c.clahe.bins = bins;
        c.nlmd.search_radius = nlmd_search;
        c.nlmd.patch_radius = nlmd_patch;
        c.nlmd.strength = nlmd_h;
        return c;
    }
};

void write_text(const std::string& out, const std::string& text)
{
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const GlobalOptions& g, const std::vector<std::string>& inputs, const PipelineFlags& pf)
{
    if (g.out.empty()) throw ValidationError("preprocess: --out DIR is required");
    const PreprocessConfig cfg = pf.config();
    const fs::path dir(g.out);
    fs::create_directories(dir);

    ordered_json meta;
    meta["stages"] = cfg.stage_names();
    meta["background_window"] = cfg.background_window;
    meta["gaussian_window"] = cfg.gaussian_window;
    meta["gaussian_sigma"] = cfg.effective_sigma();
    meta["clahe"] = {{"clip_limit", cfg.clahe.clip_limit}, {"tiles", cfg.clahe.tile_rows}, {"bins", cfg.clahe.bins}};
    meta["png_scaling"] = cfg.normalizer == Normalizer::max ? "unit" : "minmax";
    auto outputs = ordered_json::array();
    for (const auto& in : inputs) {
        ImagePlane p = preprocess(io::read_rgb(in), cfg);
        if (cfg.normalizer == Normalizer::gaussian_intensity) {
            // zero-mean planes are rescaled to [0,1] only for the PNG
            const auto [lo, hi] = std::minmax_element(p.pixels().begin(), p.pixels().end());
            const double a = *lo, span = *hi - *lo;
            for (double& v : p.pixels()) v = (v - a) / span;
        }
        const fs::path target = dir / (fs::path(in).stem().string() + "_pre.png");
        io::write_plane(target, p);
        outputs.push_back({{"input", in}, {"output", target.string()}});
    }
    meta["outputs"] = outputs;
    write_text((dir / "preprocess_meta.json").string(), meta.dump(2) + "\n");
    return 0;
}

int cmd_augment(const GlobalOptions& g, const std::string& manifest_path, bool zoom)
{
    const DatasetManifest m = load_manifest(manifest_path);
    DatasetManifest out = m;
    for (const auto& r : m.records) {
        const RgbImage img = io::read_rgb(m.resolve(r.image_path));
        std::optional<BinaryMask> mask;
        if (r.mask_path) mask = io::read_mask(m.resolve(*r.mask_path));
        for (const auto& d : augment_rgb(img, mask, zoom)) {
            auto derived_name = [&](const std::string& p) {
                const fs::path src(p);
                return (src.parent_path() / (src.stem().string() + file_suffix(d.tag) + ".png")).string();
            };
            ManifestRecord rec = r;
            rec.image_path = derived_name(r.image_path);
            io::write_rgb(m.resolve(rec.image_path), d.image);
            if (d.mask) {
                rec.mask_path = derived_name(*r.mask_path);
                io::write_mask(m.resolve(*rec.mask_path), *d.mask);
            }
            out.records.push_back(std::move(rec));
        }
    }
    const fs::path src(manifest_path);
    const fs::path target =
        g.out.empty() ? src.parent_path() / (src.stem().string() + "_augmented.csv") : fs::path(g.out);
    write_manifest(out, target);
    std::cerr << "wrote " << out.records.size() << " records to " << target.string() << "\n";
    return 0;
}

int cmd_split(const GlobalOptions& g, const std::string& manifest_path, std::size_t folds)
{
    const DatasetManifest m = load_manifest(manifest_path);
    const FoldPlan plan = stratified_kfold(m, folds, g.seed);
    std::string text;
    if (parse_report_format(g.format) == ReportFormat::csv) {
        std::ostringstream s;
        s << "image_path,label,fold\n";
        for (std::size_t i = 0; i < m.size(); ++i)
            s << m.records[i].image_path << ',' << to_string(m.records[i].label) << ',' << plan.fold_of[i] + 1 << '\n';
        text = s.str();
    } else {
        ordered_json j;
        j["folds"] = plan.k;
        j["seed"] = plan.seed;
        auto rows = ordered_json::array();
        for (std::size_t i = 0; i < m.size(); ++i)
            rows.push_back({{"image_path", m.records[i].image_path},
                            {"label", to_string(m.records[i].label)},
                            {"fold", plan.fold_of[i] + 1}});
        j["assignments"] = rows;
        text = j.dump(2) + "\n";
    }
    write_text(g.out, text);
    return 0;
}

int cmd_benchmark(const GlobalOptions& g, BenchmarkConfig cfg, const std::string& manifest_path, const PipelineFlags& pf)
{
    cfg.seed = g.seed;
    cfg.pipeline = pf.config();
    const DatasetManifest m =
        load_manifest(manifest_path, cfg.task == Task::segment ? ManifestMode::segment : ManifestMode::classify);
    const BenchmarkReport r = run_benchmark(cfg, m);
    const ReportFormat fmt = parse_report_format(g.format);
    if (g.out.empty() || g.out == "-")
        std::cout << render_report(r, fmt);
    else
        emit_report(r, fmt, g.out);
    return 0;
}

std::vector<std::vector<std::string>> read_pairs_csv(const std::string& path, const std::string& header)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw ValidationError(path + ":1: expected header '" + header + "'");
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string field; std::getline(ss, field, ',');) f.push_back(field);
        if (f.size() != 2) throw ValidationError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
        rows.push_back(std::move(f));
    }
    if (rows.empty()) throw ValidationError(path + ": no rows");
    return rows;
}

int cmd_evaluate_masks(const GlobalOptions& g, const std::string& pairs_path)
{
    const auto rows = read_pairs_csv(pairs_path, "pred_path,truth_path");
    const fs::path base = fs::path(pairs_path).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    std::vector<double> dice, iou, acc;
    for (const auto& r : rows) {
        const BinaryMask pred = io::read_mask(resolve(r[0]));
        const BinaryMask truth = io::read_mask(resolve(r[1]));
        dice.push_back(dice_score(pred, truth));
        iou.push_back(iou_score(pred, truth));
        acc.push_back(pixel_accuracy(pred, truth));
    }
    const auto md = aggregate_folds(dice), mi = aggregate_folds(iou), ma = aggregate_folds(acc);
    if (parse_report_format(g.format) == ReportFormat::csv) {
        std::ostringstream s;
        s << "pred_path,truth_path,pixel_accuracy,dice,iou\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            s << rows[i][0] << ',' << rows[i][1] << ',' << fixed3(acc[i]) << ',' << fixed3(dice[i]) << ','
              << fixed3(iou[i]) << '\n';
        s << "mean,," << fixed3(ma.mean) << ',' << fixed3(md.mean) << ',' << fixed3(mi.mean) << '\n';
        write_text(g.out, s.str());
    } else {
        ordered_json j;
        auto items = ordered_json::array();
        for (std::size_t i = 0; i < rows.size(); ++i)
            items.push_back({{"pred_path", rows[i][0]},
                             {"truth_path", rows[i][1]},
                             {"pixel_accuracy", acc[i]},
                             {"dice", dice[i]},
                             {"iou", iou[i]}});
        j["pairs"] = items;
        j["mean"] = {{"pixel_accuracy", ma.mean}, {"dice", md.mean}, {"iou", mi.mean}};
        write_text(g.out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_evaluate_labels(const GlobalOptions& g, const std::string& pairs_path, const std::string& positive)
{
    const auto rows = read_pairs_csv(pairs_path, "pred,truth");
    std::vector<std::string> pred, truth;
    std::set<std::string> classes;
    for (const auto& r : rows) {
        pred.push_back(r[0]);
        truth.push_back(r[1]);
        classes.insert(r[0]);
        classes.insert(r[1]);
    }
    if (!classes.count(positive)) classes.insert(positive);
    const std::vector<std::string> cls(classes.begin(), classes.end());
    const ConfusionCounts c = confusion_counts(pred, truth, positive);
    const ClassificationScores s = classification_scores(pred, truth, cls, positive);
    if (parse_report_format(g.format) == ReportFormat::csv) {
        std::ostringstream o;
        o << "metric,value\n"
          << "accuracy," << fixed3(s.accuracy) << "\nprecision," << fixed3(s.precision) << "\nrecall,"
          << fixed3(s.recall) << "\nf1," << fixed3(s.f1) << '\n';
        write_text(g.out, o.str());
    } else {
        ordered_json j;
        j["positive"] = positive;
        j["counts"] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
        j["accuracy"] = s.accuracy;
        j["precision"] = s.precision;
        j["recall"] = s.recall;
        j["f1"] = s.f1;
        j["degenerate"] = s.degenerate;
        write_text(g.out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& in_path)
{
    std::ifstream in(in_path);
    if (!in) throw ValidationError("cannot open report " + in_path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(in_path + ": " + e.what());
    }
    const BenchmarkReport r = BenchmarkReport::from_json(j);
    const ReportFormat fmt = parse_report_format(g.format);
    if (g.out.empty() || g.out == "-")
        std::cout << render_report(r, fmt);
    else
        emit_report(r, fmt, g.out);
    return 0;
}

int cmd_synth(const GlobalOptions& g, const std::string& kind, std::size_t count, std::size_t healthy,
              std::size_t size)
{
    if (g.out.empty()) throw ValidationError("synth: --out DIR is required");
    const fs::path dir(g.out);
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    synth::DiskOptions opt;
    opt.size = size;
    const auto samples = kind == "segment" ? synth::bright_disk_dataset(count, g.seed, opt)
                                           : synth::classification_dataset(healthy, count, g.seed, opt);
    DatasetManifest m;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.png", i);
        ManifestRecord r;
        r.image_path = std::string("images/") + name;
        r.label = samples[i].label;
        r.lesion_type = samples[i].lesion_type;
        io::write_rgb(dir / r.image_path, samples[i].image);
        if (samples[i].mask) {
            r.mask_path = std::string("masks/") + name;
            io::write_mask(dir / *r.mask_path, *samples[i].mask);
        }
        m.records.push_back(std::move(r));
    }
    write_manifest(m, dir / "manifest.csv");
    std::cerr << "wrote " << m.records.size() << " samples to " << (dir / "manifest.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"otbench: fundus preprocessing and cross-validated benchmarking"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
    app.add_option("--out", g.out, "output file or directory");
    app.add_option("--format", g.format, "json|csv")->capture_default_str();

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "run the preprocessing pipeline on images")->fallthrough();
    std::vector<std::string> pre_inputs;
    PipelineFlags pre_flags;
    pre->add_option("inputs", pre_inputs, "input images")->required();
    pre_flags.attach(pre);

    // augment
    auto* aug = app.add_subcommand("augment", "write rotated/flipped/normalised derivatives")->fallthrough();
    std::string aug_manifest;
    bool aug_zoom = false;
    aug->add_option("--manifest", aug_manifest, "manifest CSV")->required();
    aug->add_flag("--zoom", aug_zoom, "also emit a centre-zoom derivative");

    // split
    auto* split = app.add_subcommand("split", "stratified k-fold assignment")->fallthrough();
    std::string split_manifest;
    std::size_t split_folds = 5;
    split->add_option("--manifest", split_manifest, "manifest CSV")->required();
    split->add_option("--folds", split_folds, "number of folds")->capture_default_str();

    // benchmark classify|segment
    auto* bench = app.add_subcommand("benchmark", "cross-validated benchmark")->fallthrough();
    bench->require_subcommand(1);
    BenchmarkConfig bcfg;
    std::string bench_manifest, bench_loss = "dice";
    PipelineFlags bench_flags;
    bool no_augment = false, no_preprocess = false;
    for (const char* task : {"classify", "segment"}) {
        auto* sub = bench->add_subcommand(task, std::string("benchmark ") + task)->fallthrough();
        sub->add_option("--manifest", bench_manifest, "manifest CSV")->required();
        sub->add_option("--folds", bcfg.folds, "number of folds")->capture_default_str();
        sub->add_option("--batch-size", bcfg.batch_size, "mini-batch size")->capture_default_str();
        sub->add_option("--lr", bcfg.lr, "Adam learning rate")->capture_default_str();
        sub->add_option("--epochs", bcfg.epochs, "training epochs")->capture_default_str();
        sub->add_option("--model", bcfg.model,
                        std::string(task) == "classify" ? "baseline|oracle|majority" : "baseline|oracle")
            ->capture_default_str();
        sub->add_option("--threads", bcfg.threads, "fold workers; 0 = OTBENCH_THREADS or all cores");
        sub->add_flag("--no-augment", no_augment, "train without augmentation");
        sub->add_flag("--no-preprocess", no_preprocess, "use the raw green channel");
        sub->add_flag("--zoom", bcfg.zoom, "add centre-zoom augmentation");
        sub->add_flag("--timestamps", bcfg.record_timestamps, "record start/finish times in the report");
        if (std::string(task) == "segment") {
            sub->add_option("--loss", bench_loss, "dice|jaccard|bce")->capture_default_str();
            sub->add_option("--threshold", bcfg.threshold, "foreground probability threshold")->capture_default_str();
        }
        bench_flags.attach(sub);
    }

    // evaluate masks|labels
    auto* eval = app.add_subcommand("evaluate", "metrics on existing predictions")->fallthrough();
    eval->require_subcommand(1);
    std::string eval_pairs, eval_positive = "diseased";
    auto* eval_masks = eval->add_subcommand("masks", "CSV pred_path,truth_path of mask PNGs")->fallthrough();
    eval_masks->add_option("--pairs", eval_pairs, "pairs CSV")->required();
    auto* eval_labels = eval->add_subcommand("labels", "CSV pred,truth of class labels")->fallthrough();
    eval_labels->add_option("--pairs", eval_pairs, "pairs CSV")->required();
    eval_labels->add_option("--positive", eval_positive, "positive class")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "re-emit a JSON benchmark report")->fallthrough();
    std::string rep_in;
    rep->add_option("--in", rep_in, "report JSON")->required();

    // synth
    auto* syn = app.add_subcommand("synth", "write a seeded synthetic dataset")->fallthrough();
    std::string syn_kind = "segment";
    std::size_t syn_count = 200, syn_healthy = 0, syn_size = 64;
    syn->add_option("kind", syn_kind, "segment|classify")->check(CLI::IsMember({"segment", "classify"}));
    syn->add_option("--count", syn_count, "diseased images")->capture_default_str();
    syn->add_option("--healthy", syn_healthy, "healthy images (classify)")->capture_default_str();
    syn->add_option("--size", syn_size, "image side in pixels")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (*pre) return cmd_preprocess(g, pre_inputs, pre_flags);
        if (*aug) return cmd_augment(g, aug_manifest, aug_zoom);
        if (*split) return cmd_split(g, split_manifest, split_folds);
        if (*bench) {
            bcfg.task = bench->got_subcommand("segment") ? Task::segment : Task::classify;
            bcfg.loss = parse_seg_loss(bench_loss);
            bcfg.augment = !no_augment;
            bcfg.preprocess = !no_preprocess;
            return cmd_benchmark(g, bcfg, bench_manifest, bench_flags);
        }
        if (*eval_masks) return cmd_evaluate_masks(g, eval_pairs);
        if (*eval_labels) return cmd_evaluate_labels(g, eval_pairs, eval_positive);
        if (*rep) return cmd_report(g, rep_in);
        if (*syn) return cmd_synth(g, syn_kind, syn_count, syn_healthy, syn_size);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
