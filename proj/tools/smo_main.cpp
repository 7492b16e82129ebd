// Command-line front end: optimize | enhance | evaluate | shapes | synth.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "smo/arch_plan.hpp"
#include "smo/dataset_io.hpp"
#include "smo/image_enhance.hpp"
#include "smo/objectives.hpp"
#include "smo/optimizer.hpp"
#include "smo/run_config.hpp"
#include "smo/seg_metrics.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw smo::IoError("cannot write '" + path.string() + "'");
    out << content;
}

// --seed flag wins over SMO_SEED, which wins over the config value.
std::uint64_t resolve_seed(std::uint64_t config_seed, const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("SMO_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw smo::ConfigError("SMO_SEED is not a valid unsigned integer");
        return v;
    }
    return config_seed;
}

std::vector<fs::path> png_files_recursive(const fs::path& root) {
    std::vector<fs::path> files;
    if (!fs::exists(root)) throw smo::IoError("input directory '" + root.string() + "' not found");
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

int cmd_optimize(const std::string& config_path, const std::optional<std::uint64_t>& seed_flag,
                 const std::string& output_flag) {
    smo::RunConfig cfg = smo::load_run_config(config_path);
    cfg.seed = resolve_seed(cfg.seed, seed_flag);
    cfg.smo.seed = cfg.seed;
    if (!output_flag.empty()) cfg.output_dir = output_flag;
    if (cfg.output_dir.empty()) throw smo::ConfigError("config is missing 'output_dir'");

    const smo::Objective objective = smo::build_objective(cfg);
    const smo::RunResult result = smo::run(objective.evaluate, objective.space, cfg.smo);

    write_file(fs::path(cfg.output_dir) / "runlog.csv", smo::runlog_csv(result.log));
    write_file(fs::path(cfg.output_dir) / "result.txt",
               smo::result_text(objective.space, result));

    std::cout << "objective: " << objective.name << "\n"
              << "stop: " << smo::to_string(result.stop_reason) << " (" << result.stop_detail
              << ")\n"
              << "best_objective: " << smo::format_double(result.best_objective) << "\n"
              << "evaluations: " << result.log.total_evaluations << "\n";
    if (result.stop_reason == smo::StopReason::objective_failure) {
        std::cerr << "error: " << result.error << "\n";
        return 1;
    }
    return 0;
}

int cmd_enhance(const std::string& input_dir, const std::string& output_dir,
                const std::string& params_path, bool tune, int tune_sample, int tune_evals,
                const std::optional<std::uint64_t>& seed_flag) {
    const std::vector<fs::path> files = png_files_recursive(input_dir);
    if (files.empty()) {
        std::cerr << "warning: no PNG files under '" << input_dir << "'\n";
        return 0;
    }
    smo::EnhanceSettings settings;
    if (!params_path.empty()) settings = smo::load_enhance_settings(params_path);

    if (tune) {
        std::vector<smo::GrayImage> samples;
        for (std::size_t i = 0; i < files.size() && int(i) < tune_sample; ++i)
            samples.push_back(smo::read_png_gray(files[i].string()));
        const smo::Objective objective = smo::make_enhance_objective(std::move(samples));
        smo::SmoConfig smo_cfg;
        smo_cfg.population_size = 12;
        smo_cfg.max_groups = 3;
        smo_cfg.max_iterations = 1000;
        smo_cfg.max_evaluations = std::uint64_t(tune_evals);
        smo_cfg.seed = resolve_seed(0, seed_flag);
        const smo::RunResult result = smo::run(objective.evaluate, objective.space, smo_cfg);
        if (result.stop_reason == smo::StopReason::objective_failure) {
            std::cerr << "error: " << result.error << "\n";
            return 1;
        }
        const auto [pmd, clahe] = smo::enhance_params_from(result.best_position);
        settings.pmd = pmd;
        settings.clahe = clahe;
        write_file(fs::path(output_dir) / "runlog.csv", smo::runlog_csv(result.log));
        write_file(fs::path(output_dir) / "result.txt",
                   smo::result_text(objective.space, result));
        write_file(fs::path(output_dir) / "tuned_params.json",
                   smo::enhance_settings_to_json(settings).dump(2) + "\n");
        std::cout << "tuned enhancement score: " << smo::format_double(result.best_objective)
                  << " over " << result.log.total_evaluations << " evaluations\n";
    }

    int written = 0, skipped = 0;
    for (const auto& file : files) {
        const fs::path rel = fs::relative(file, input_dir);
        const fs::path dst = fs::path(output_dir) / rel;
        try {
            const smo::GrayImage img = smo::read_png_gray(file.string());
            const smo::GrayImage out =
                smo::enhance(img, settings.pmd, settings.clahe, settings.order);
            if (dst.has_parent_path()) {
                std::error_code ec;
                fs::create_directories(dst.parent_path(), ec);
            }
            smo::write_png_gray(dst.string(), out);
            ++written;
        } catch (const smo::DecodeError& e) {
            std::cerr << "skipping " << file << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    std::cout << "enhanced " << written << " file(s), skipped " << skipped << "\n";
    return 0;
}

std::vector<std::string> png_stems(const fs::path& dir) {
    if (!fs::exists(dir)) throw smo::IoError("directory '" + dir.string() + "' not found");
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    return stems;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& gt_dir,
                 const std::string& csv_path) {
    const std::vector<std::string> pred_ids = png_stems(pred_dir);
    const std::vector<std::string> gt_ids = png_stems(gt_dir);
    for (const auto& id : pred_ids)
        if (!std::binary_search(gt_ids.begin(), gt_ids.end(), id))
            throw smo::MissingPair("id '" + id + "' has a prediction but no ground truth");
    for (const auto& id : gt_ids)
        if (!std::binary_search(pred_ids.begin(), pred_ids.end(), id))
            throw smo::MissingPair("id '" + id + "' has ground truth but no prediction");
    if (pred_ids.empty()) throw smo::MissingPair("no mask pairs found");

    std::string csv = "image,class,tp,tn,fp,fn,accuracy,dice,iou\n";
    const auto row = [&csv](const std::string& image, const std::string& cls,
                            const smo::ConfusionCounts& c, double acc, double dice, double iou) {
        csv += image + "," + cls + "," + std::to_string(c.tp) + "," + std::to_string(c.tn) +
               "," + std::to_string(c.fp) + "," + std::to_string(c.fn) + "," +
               smo::format_double(acc) + "," + smo::format_double(dice) + "," +
               smo::format_double(iou) + "\n";
    };

    std::uint64_t total_pixels = 0, total_correct = 0;
    double dice_sum = 0.0, iou_sum = 0.0;
    smo::ConfusionCounts all_counts;
    double all_acc = 0.0, all_dice = 0.0, all_iou = 0.0;

    for (const auto& id : pred_ids) {
        smo::MaskImage pred = smo::read_png_mask((fs::path(pred_dir) / (id + ".png")).string());
        smo::MaskImage gt = smo::read_png_mask((fs::path(gt_dir) / (id + ".png")).string());
        const int classes = std::max(pred.num_classes, gt.num_classes);
        pred.num_classes = classes;
        gt.num_classes = classes;
        const smo::MacroReport report = smo::macro_report(pred, gt);
        smo::ConfusionCounts image_counts;
        for (const auto& cr : report.per_class) {
            row(id, std::to_string(cr.cls), cr.counts, cr.accuracy, cr.dice, cr.iou);
            image_counts.tp += cr.counts.tp;
            image_counts.tn += cr.counts.tn;
            image_counts.fp += cr.counts.fp;
            image_counts.fn += cr.counts.fn;
        }
        row(id, "mean", image_counts, report.mean_accuracy, report.mean_dice, report.mean_iou);
        all_counts.tp += image_counts.tp;
        all_counts.tn += image_counts.tn;
        all_counts.fp += image_counts.fp;
        all_counts.fn += image_counts.fn;
        all_acc += report.mean_accuracy;
        all_dice += report.mean_dice;
        all_iou += report.mean_iou;
        total_pixels += pred.pixels();
        total_correct += std::uint64_t(report.overall_accuracy * double(pred.pixels()) + 0.5);
        dice_sum += report.mean_dice;
        iou_sum += report.mean_iou;
    }
    const double n = double(pred_ids.size());
    row("all", "mean", all_counts, all_acc / n, all_dice / n, all_iou / n);
    write_file(csv_path, csv);

    std::cout << "images: " << pred_ids.size() << "\n"
              << "overall_accuracy: "
              << smo::format_double(double(total_correct) / double(total_pixels)) << "\n"
              << "mean_dice: " << smo::format_double(dice_sum / n) << "\n"
              << "mean_iou: " << smo::format_double(iou_sum / n) << "\n";
    return 0;
}

int cmd_shapes(int size) {
    const smo::AlignmentReport report = smo::verify_alignment({size, size, 3});
    std::cout << smo::format_plan_table(report);
    return report.pass ? 0 : 1;
}

int cmd_synth(int count, std::uint64_t seed, const std::string& out_dir, double noise,
              int size) {
    smo::SynthOptions opt;
    opt.count = count;
    opt.seed = seed;
    opt.noise = noise;
    opt.size = size;
    smo::save_dataset(out_dir, smo::synth_dataset(opt));
    std::cout << "wrote " << count << " sample(s) to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-variable spider monkey optimization toolkit"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    std::optional<std::uint64_t> seed_flag;
    auto* optimize = app.add_subcommand("optimize", "run an optimization from a JSON config");
    optimize->add_option("config", config_path, "run config (JSON)")->required();
    optimize->add_option("--seed", seed_flag, "override the config seed");
    optimize->add_option("--output-dir", output_dir, "override the config output directory");

    std::string enh_in, enh_out, enh_params;
    bool enh_tune = false;
    int tune_sample = 8, tune_evals = 200;
    std::optional<std::uint64_t> enh_seed;
    auto* enhance = app.add_subcommand("enhance", "denoise + equalize a directory of PNGs");
    enhance->add_option("input", enh_in, "input directory")->required();
    enhance->add_option("output", enh_out, "output directory")->required();
    enhance->add_option("--params", enh_params, "enhancement params (JSON)");
    enhance->add_flag("--tune", enh_tune, "tune params on a sample before applying");
    enhance->add_option("--tune-sample", tune_sample, "images used for tuning")
        ->check(CLI::PositiveNumber);
    enhance->add_option("--tune-evals", tune_evals, "tuning evaluation budget")
        ->check(CLI::PositiveNumber);
    enhance->add_option("--seed", enh_seed, "tuning seed");

    std::string pred_dir, gt_dir, csv_path = "metrics.csv";
    auto* evaluate = app.add_subcommand("evaluate", "score predicted masks against ground truth");
    evaluate->add_option("pred", pred_dir, "predicted masks directory")->required();
    evaluate->add_option("gt", gt_dir, "ground-truth masks directory")->required();
    evaluate->add_option("--csv", csv_path, "metrics CSV output path");

    int shapes_size = 256;
    auto* shapes = app.add_subcommand("shapes", "print the encoder/decoder shape plan");
    shapes->add_option("size", shapes_size, "square input size (power of two >= 32)")
        ->required();

    int synth_n = 0, synth_size = 256;
    std::uint64_t synth_seed = 0;
    double synth_noise = 0.02;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic cell dataset");
    synth->add_option("--n", synth_n, "number of samples")->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--noise", synth_noise, "additive noise amplitude")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--size", synth_size, "image side length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(config_path, seed_flag, output_dir);
        if (enhance->parsed())
            return cmd_enhance(enh_in, enh_out, enh_params, enh_tune, tune_sample, tune_evals,
                               enh_seed);
        if (evaluate->parsed()) return cmd_evaluate(pred_dir, gt_dir, csv_path);
        if (shapes->parsed()) return cmd_shapes(shapes_size);
        if (synth->parsed())
            return cmd_synth(synth_n, synth_seed, synth_out, synth_noise, synth_size);
    } catch (const smo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const smo::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const smo::MissingPair& e) {
        std::cerr << "missing pair: " << e.what() << "\n";
        return 2;
    } catch (const smo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
