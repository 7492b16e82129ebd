#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smo/dataset_io.hpp"
#include "smo/run_config.hpp"
#include "smo/seg_metrics.hpp"

namespace fs = std::filesystem;
using namespace smo;

namespace {

const std::string kCli = SMO_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("smo_cli_" + std::to_string(std::uintptr_t(this)) + "_" +
                std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::string& args, const fs::path& output_file = {}) {
    std::string cmd = kCli + " " + args;
    if (!output_file.empty())
        cmd += " > " + output_file.string() + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

void write_text(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string sphere_config(const fs::path& out_dir, int seed) {
    json j = {{"objective", "sphere"},
              {"seed", seed},
              {"output_dir", out_dir.string()},
              {"space",
               json::array({{{"name", "x0"}, {"kind", "continuous"}, {"lo", -5}, {"hi", 5}},
                            {{"name", "x1"}, {"kind", "continuous"}, {"lo", -5}, {"hi", 5}}})},
              {"smo",
               {{"population_size", 12},
                {"max_iterations", 60},
                {"max_evaluations", 1500},
                {"stagnation_epsilon", 0.0},
                {"diversity_epsilon", 0.0}}}};
    return j.dump(2);
}

}  // namespace

TEST_CASE("shapes prints the 256 plan and validates input", "[cli]") {
    TempDir tmp;
    const fs::path out = tmp.path / "shapes.txt";
    REQUIRE(run_cli("shapes 256", out) == 0);
    const std::string text = slurp(out);
    for (const char* cell : {"256x256x64", "128x128x128", "64x64x256", "32x32x512",
                             "16x16x1024", "256x256x512", "128x128x256", "64x64x128",
                             "32x32x64"})
        REQUIRE(text.find(cell) != std::string::npos);

    REQUIRE(run_cli("shapes 64", out) == 0);
    REQUIRE(slurp(out).find("4x4x1024") != std::string::npos);

    REQUIRE(run_cli("shapes 100", out) == 2);
    REQUIRE(run_cli("shapes 16", out) == 2);
}

TEST_CASE("synth writes a deterministic dataset and validates n", "[cli]") {
    TempDir tmp;
    const fs::path a = tmp.path / "a", b = tmp.path / "b";
    REQUIRE(run_cli("synth --n 3 --seed 5 --out " + a.string()) == 0);
    REQUIRE(fs::exists(a / "images" / "cell_0000.png"));
    REQUIRE(fs::exists(a / "masks" / "cell_0002.png"));
    REQUIRE(fs::exists(a / "manifest.txt"));

    REQUIRE(run_cli("synth --n 3 --seed 5 --out " + b.string()) == 0);
    for (const char* rel : {"images/cell_0000.png", "images/cell_0002.png",
                            "masks/cell_0001.png", "manifest.txt"})
        REQUIRE(same_bytes(a / rel, b / rel));

    REQUIRE(run_cli("synth --n 0 --out " + (tmp.path / "c").string()) == 2);
}

TEST_CASE("optimize runs a sphere config and writes artifacts", "[cli]") {
    TempDir tmp;
    const fs::path run_dir = tmp.path / "run";
    const fs::path cfg = tmp.path / "cfg.json";
    write_text(cfg, sphere_config(run_dir, 3));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);

    const std::string csv = slurp(run_dir / "runlog.csv");
    REQUIRE(csv.rfind("iteration,evaluations,best_objective,group_count,stop_reason\n", 0) == 0);
    // best column is non-increasing
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    double prev = 1e300;
    std::string reason;
    while (std::getline(lines, line)) {
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ',');
        std::getline(row, field, ',');
        std::getline(row, field, ',');
        const double best = std::strtod(field.c_str(), nullptr);
        REQUIRE(best <= prev);
        prev = best;
        std::getline(row, field, ',');
        std::getline(row, field, ',');
        if (!field.empty()) reason = field;
    }
    REQUIRE((reason == "budget" || reason == "stagnation" || reason == "diversity"));

    const std::string result = slurp(run_dir / "result.txt");
    REQUIRE(result.find("param.x0 = ") != std::string::npos);
    REQUIRE(result.find("stop_reason = " + reason) != std::string::npos);
}

TEST_CASE("optimize is byte-deterministic and seed-sensitive", "[cli]") {
    TempDir tmp;
    const fs::path r1 = tmp.path / "r1", r2 = tmp.path / "r2", r3 = tmp.path / "r3";
    const fs::path cfg = tmp.path / "cfg.json";
    write_text(cfg, sphere_config(r1, 3));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);
    REQUIRE(run_cli("optimize " + cfg.string() + " --output-dir " + r2.string()) == 0);
    REQUIRE(same_bytes(r1 / "runlog.csv", r2 / "runlog.csv"));
    REQUIRE(same_bytes(r1 / "result.txt", r2 / "result.txt"));

    REQUIRE(run_cli("optimize " + cfg.string() + " --output-dir " + r3.string() +
                    " --seed 4") == 0);
    REQUIRE(!same_bytes(r1 / "runlog.csv", r3 / "runlog.csv"));
}

TEST_CASE("SMO_SEED environment variable overrides the config seed", "[cli]") {
    TempDir tmp;
    const fs::path r1 = tmp.path / "r1", r2 = tmp.path / "r2", r3 = tmp.path / "r3";
    const fs::path cfg = tmp.path / "cfg.json";
    write_text(cfg, sphere_config(r1, 3));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);

    setenv("SMO_SEED", "99", 1);
    REQUIRE(run_cli("optimize " + cfg.string() + " --output-dir " + r2.string()) == 0);
    // flag beats the environment
    REQUIRE(run_cli("optimize " + cfg.string() + " --output-dir " + r3.string() +
                    " --seed 3") == 0);
    unsetenv("SMO_SEED");

    REQUIRE(!same_bytes(r1 / "runlog.csv", r2 / "runlog.csv"));
    REQUIRE(same_bytes(r1 / "runlog.csv", r3 / "runlog.csv"));
}

TEST_CASE("optimize rejects malformed configs with exit 2", "[cli]") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "bad.json";
    // duplicated batch-size category
    json j = {{"objective", "mixed_test"},
              {"output_dir", (tmp.path / "out").string()},
              {"space",
               json::array({{{"name", "lr"}, {"kind", "continuous"}, {"lo", 1e-5},
                             {"hi", 1e-2}, {"log_scale", true}},
                            {{"name", "batch"}, {"kind", "categorical"},
                             {"choices", json::array({32, 32, 64, 4, 8, 16})}},
                            {{"name", "epochs"}, {"kind", "discrete"}, {"lo", 10},
                             {"hi", 100}}})}};
    write_text(cfg, j.dump());
    const fs::path log = tmp.path / "err.txt";
    REQUIRE(run_cli("optimize " + cfg.string(), log) == 2);
    REQUIRE(slurp(log).find("duplicate") != std::string::npos);

    write_text(cfg, "{ not json");
    REQUIRE(run_cli("optimize " + cfg.string()) == 2);

    REQUIRE(run_cli("optimize " + (tmp.path / "absent.json").string()) == 2);
}

TEST_CASE("evaluate scores identical directories as perfect", "[cli]") {
    TempDir tmp;
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli("synth --n 3 --seed 11 --out " + data.string()) == 0);
    const fs::path csv = tmp.path / "metrics.csv";
    const fs::path out = tmp.path / "out.txt";
    const std::string masks = (data / "masks").string();
    REQUIRE(run_cli("evaluate " + masks + " " + masks + " --csv " + csv.string(), out) == 0);
    const std::string text = slurp(out);
    REQUIRE(text.find("overall_accuracy: 1") != std::string::npos);
    REQUIRE(text.find("mean_dice: 1") != std::string::npos);

    const std::string table = slurp(csv);
    REQUIRE(table.rfind("image,class,tp,tn,fp,fn,accuracy,dice,iou\n", 0) == 0);
    REQUIRE(table.find("cell_0000,0,") != std::string::npos);
    REQUIRE(table.find("cell_0002,mean,") != std::string::npos);
    REQUIRE(table.find("all,mean,") != std::string::npos);
}

TEST_CASE("evaluate CSV matches direct library metrics", "[cli]") {
    TempDir tmp;
    const fs::path pred_dir = tmp.path / "pred", gt_dir = tmp.path / "gt";
    fs::create_directories(pred_dir);
    fs::create_directories(gt_dir);
    Rng rng(77);
    MaskImage pred = MaskImage::filled(16, 16, 0, 3);
    MaskImage gt = MaskImage::filled(16, 16, 0, 3);
    for (auto& v : pred.data) v = std::uint8_t(rng.uniform_index(3));
    for (auto& v : gt.data) v = std::uint8_t(rng.uniform_index(3));
    write_png_mask((pred_dir / "m.png").string(), pred);
    write_png_mask((gt_dir / "m.png").string(), gt);

    const fs::path csv = tmp.path / "metrics.csv";
    REQUIRE(run_cli("evaluate " + pred_dir.string() + " " + gt_dir.string() + " --csv " +
                    csv.string()) == 0);
    const MacroReport report = macro_report(pred, gt);
    const std::string table = slurp(csv);
    for (const auto& cr : report.per_class) {
        const std::string expected =
            "m," + std::to_string(cr.cls) + "," + std::to_string(cr.counts.tp) + "," +
            std::to_string(cr.counts.tn) + "," + std::to_string(cr.counts.fp) + "," +
            std::to_string(cr.counts.fn) + "," + format_double(cr.accuracy) + "," +
            format_double(cr.dice) + "," + format_double(cr.iou) + "\n";
        REQUIRE(table.find(expected) != std::string::npos);
    }
}

TEST_CASE("evaluate reports missing pairs with exit 2", "[cli]") {
    TempDir tmp;
    const fs::path pred_dir = tmp.path / "pred", gt_dir = tmp.path / "gt";
    fs::create_directories(pred_dir);
    fs::create_directories(gt_dir);
    const MaskImage m = MaskImage::filled(4, 4, 1, 2);
    write_png_mask((pred_dir / "a.png").string(), m);
    write_png_mask((gt_dir / "a.png").string(), m);
    write_png_mask((gt_dir / "b.png").string(), m);
    const fs::path log = tmp.path / "err.txt";
    REQUIRE(run_cli("evaluate " + pred_dir.string() + " " + gt_dir.string() + " --csv " +
                        (tmp.path / "m.csv").string(),
                    log) == 2);
    REQUIRE(slurp(log).find("'b'") != std::string::npos);
}

TEST_CASE("enhance maps constant images to constant images", "[cli]") {
    TempDir tmp;
    const fs::path in = tmp.path / "in", out = tmp.path / "out";
    fs::create_directories(in / "nested");
    write_png_gray((in / "flat.png").string(), GrayImage::filled(32, 32, 0.6));
    write_png_gray((in / "nested" / "flat2.png").string(), GrayImage::filled(32, 32, 0.25));
    REQUIRE(run_cli("enhance " + in.string() + " " + out.string()) == 0);
    REQUIRE(fs::exists(out / "flat.png"));
    REQUIRE(fs::exists(out / "nested" / "flat2.png"));  // tree is mirrored
    const GrayImage img = read_png_gray((out / "flat.png").string());
    for (const double v : img.data) REQUIRE(v == img.data[0]);
}

TEST_CASE("enhance on an empty directory warns and exits 0", "[cli]") {
    TempDir tmp;
    const fs::path in = tmp.path / "in";
    fs::create_directories(in);
    const fs::path log = tmp.path / "log.txt";
    REQUIRE(run_cli("enhance " + in.string() + " " + (tmp.path / "out").string(), log) == 0);
    REQUIRE(slurp(log).find("warning") != std::string::npos);
}

TEST_CASE("enhance --tune applies the logged best position", "[cli]") {
    TempDir tmp;
    const fs::path in = tmp.path / "in", out = tmp.path / "out";
    fs::create_directories(in);
    Rng rng(5);
    for (int i = 0; i < 2; ++i) {
        GrayImage img = GrayImage::filled(24, 24, 0.0);
        for (auto& v : img.data) v = 0.4 + 0.2 * rng.uniform();
        write_png_gray((in / ("s" + std::to_string(i) + ".png")).string(), img);
    }
    REQUIRE(run_cli("enhance " + in.string() + " " + out.string() +
                    " --tune --tune-evals 30 --tune-sample 2 --seed 9") == 0);
    REQUIRE(fs::exists(out / "tuned_params.json"));
    REQUIRE(fs::exists(out / "runlog.csv"));
    REQUIRE(fs::exists(out / "s0.png"));

    // tuned params file mirrors the best position in the result file
    const EnhanceSettings tuned = load_enhance_settings((out / "tuned_params.json").string());
    const std::string result = slurp(out / "result.txt");
    REQUIRE(result.find("param.kappa = " + format_double(tuned.pmd.kappa)) !=
            std::string::npos);
    REQUIRE(result.find("param.iterations = " + std::to_string(tuned.pmd.iterations)) !=
            std::string::npos);
    REQUIRE(result.find("param.tiles_x = " + std::to_string(tuned.clahe.tiles_x)) !=
            std::string::npos);
}

TEST_CASE("optimize recovers the mixed-variable optimum end to end", "[cli]") {
    TempDir tmp;
    const fs::path run_dir = tmp.path / "run";
    const fs::path cfg = tmp.path / "cfg.json";
    json j = {{"objective", "mixed_test"},
              {"seed", 1},
              {"output_dir", run_dir.string()},
              {"smo",
               {{"population_size", 40},
                {"local_leader_limit", 8},
                {"global_leader_limit", 16},
                {"max_iterations", 100000},
                {"max_evaluations", 5000},
                {"stagnation_epsilon", 0.0},
                {"diversity_epsilon", 0.0},
                {"stagnation_window", 1000000}}}};
    write_text(cfg, j.dump(2));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);
    const std::string result = slurp(run_dir / "result.txt");
    REQUIRE(result.find("param.batch_size = 32") != std::string::npos);
    REQUIRE(result.find("param.epochs = 50") != std::string::npos);
}

TEST_CASE("optimize drives the toy segmentation objective from a dataset", "[cli]") {
    TempDir tmp;
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli("synth --n 3 --seed 21 --out " + data.string()) == 0);
    const fs::path run_dir = tmp.path / "run";
    const fs::path cfg = tmp.path / "cfg.json";
    json j = {{"objective", "toy_seg"},
              {"seed", 2},
              {"output_dir", run_dir.string()},
              {"dataset_dir", data.string()},
              {"smo",
               {{"population_size", 8},
                {"max_iterations", 4},
                {"max_evaluations", 40}}}};
    write_text(cfg, j.dump(2));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);
    const std::string result = slurp(run_dir / "result.txt");
    REQUIRE(result.find("param.threshold = ") != std::string::npos);
    REQUIRE(result.find("param.kernel = ") != std::string::npos);
}

TEST_CASE("optimize tunes enhancement params from an image directory", "[cli]") {
    TempDir tmp;
    const fs::path images = tmp.path / "imgs";
    fs::create_directories(images);
    Rng rng(3);
    for (int i = 0; i < 2; ++i) {
        GrayImage img = GrayImage::filled(16, 16, 0.0);
        for (auto& v : img.data) v = 0.4 + 0.2 * rng.uniform();
        write_png_gray((images / ("i" + std::to_string(i) + ".png")).string(), img);
    }
    const fs::path run_dir = tmp.path / "run";
    const fs::path cfg = tmp.path / "cfg.json";
    json j = {{"objective", "enhance_score"},
              {"seed", 4},
              {"output_dir", run_dir.string()},
              {"dataset_dir", images.string()},
              {"smo",
               {{"population_size", 6},
                {"max_iterations", 3},
                {"max_evaluations", 18}}}};
    write_text(cfg, j.dump(2));
    REQUIRE(run_cli("optimize " + cfg.string()) == 0);
    REQUIRE(slurp(run_dir / "result.txt").find("param.kappa = ") != std::string::npos);
}

TEST_CASE("enhance skips undecodable files and keeps going", "[cli]") {
    TempDir tmp;
    const fs::path in = tmp.path / "in", out = tmp.path / "out";
    fs::create_directories(in);
    write_png_gray((in / "good.png").string(), GrayImage::filled(16, 16, 0.5));
    write_text(in / "bad.png", "not a png at all");
    const fs::path log = tmp.path / "log.txt";
    REQUIRE(run_cli("enhance " + in.string() + " " + out.string(), log) == 0);
    REQUIRE(fs::exists(out / "good.png"));
    REQUIRE(!fs::exists(out / "bad.png"));
    REQUIRE(slurp(log).find("skipping") != std::string::npos);
}

TEST_CASE("usage errors exit with 2", "[cli]") {
    REQUIRE(run_cli("") == 2);
    REQUIRE(run_cli("unknown-subcommand") == 2);
    REQUIRE(run_cli("shapes") == 2);  // missing size
}
