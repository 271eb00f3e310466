// End-to-end checks of the jsieve binary: every subcommand, exit codes,
// output formats, and manifest reproducibility. Takes the binary path as
// argv[1] and works inside a scratch directory.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sieve/dataset_io.hpp"
#include "sieve/io_util.hpp"
#include "sieve/numeric.hpp"
#include "sieve/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "  ok: " << what << "\n";
    } else {
        ++g_failures;
        std::cout << "  FAILED: " << what << "\n";
    }
}

struct Runner {
    std::string binary;
    fs::path dir;
    int counter = 0;

    // Returns the exit code; stdout is captured into `out`.
    int run(const std::string& args, std::string* out = nullptr) {
        const fs::path out_file = dir / ("stdout." + std::to_string(counter++));
        const std::string cmd =
            binary + " " + args + " >" + out_file.string() + " 2>" + (dir / "stderr.log").string();
        const int status = std::system(cmd.c_str());
        if (out) {
            *out = sieve::read_file(out_file);
        }
        if (WIFEXITED(status)) return WEXITSTATUS(status);
        return -1;
    }
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> csv_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string strip_timestamp(const std::string& manifest) {
    std::string out;
    for (const auto& line : lines_of(manifest)) {
        if (line.find("\"timestamp\"") != std::string::npos) continue;
        out += line + "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_integration <path-to-jsieve>\n";
        return 2;
    }

    Runner r;
    r.binary = argv[1];
    r.dir = fs::temp_directory_path() / ("jsieve-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(r.dir);
    const std::string d = r.dir.string() + "/";

    // --- synth: determinism and manifest presence
    check(r.run("synth --seed 42 -o " + d + "data.json") == 0, "synth exits 0");
    check(fs::exists(d + "data.json"), "synth wrote the dataset");
    check(fs::exists(d + "data.json.manifest.json"), "synth wrote a manifest");
    check(r.run("synth --seed 42 -o " + d + "data2.json") == 0, "second synth exits 0");
    check(sieve::read_file(d + "data.json") == sieve::read_file(d + "data2.json"),
          "same seed reproduces the dataset byte for byte");
    check(strip_timestamp(sieve::read_file(d + "data.json.manifest.json")) !=
              strip_timestamp(sieve::read_file(d + "data2.json.manifest.json")),
          "manifests track distinct output names");

    // --- validate
    check(r.run("validate " + d + "data.json") == 0, "validate accepts a clean dataset");
    sieve::atomic_write_file(d + "broken.json", "{\"scale\": {");
    check(r.run("validate " + d + "broken.json") == 1, "validate exits 1 on a broken file");

    // --- score
    check(r.run("score " + d + "data.json --condition baseline -o " + d + "scores.csv") == 0,
          "score exits 0");
    const auto score_lines = lines_of(sieve::read_file(d + "scores.csv"));
    check(score_lines.size() == 51, "score table has 50 rows plus header");
    check(score_lines[0] == "instance,ambiguity,disagreement,annotators",
          "score CSV header matches the interface");
    check(r.run("score " + d + "data.json --condition nope -o " + d + "x.csv") == 1,
          "unknown condition exits 1");
    check(r.run("score " + d + "data.json --condition context -o " + d + "ctx.csv") == 0,
          "context score exits 0");
    check(r.run("score " + d + "data.json --condition deliberation -o " + d + "del.csv") == 0,
          "deliberation score exits 0");
    check(r.run("score " + d + "data.json --condition baseline -o " + d + "scores.json") == 0,
          "JSON score output exits 0");
    check(sieve::read_file(d + "scores.json").find("\"rows\"") != std::string::npos,
          "JSON score output contains rows");

    // --- CSV + sidecar ingestion path (files produced via the library)
    {
        sieve::CrowdConfig cfg;
        cfg.n_instances = 8;
        cfg.n_annotators = 4;
        cfg.seed = 5;
        const sieve::Dataset ds = sieve::generate_dataset(cfg, sieve::EffectModel{});
        sieve::atomic_write_file(d + "data.csv", sieve::dataset_to_csv(ds));
        sieve::atomic_write_file(d + "data.meta.json", sieve::dataset_to_sidecar_json(ds));
    }
    check(r.run("validate " + d + "data.csv --sidecar " + d + "data.meta.json") == 0,
          "CSV + sidecar validates");
    check(r.run("validate " + d + "data.csv") == 2, "CSV without sidecar is a usage error");

    // --- sieve
    check(r.run("sieve " + d + "data.json --fraction 0.1 -o " + d + "assign.csv") == 0,
          "sieve exits 0");
    {
        const auto assign_lines = lines_of(sieve::read_file(d + "assign.csv"));
        check(assign_lines.size() == 51, "assignments cover every instance");
        int context_count = 0;
        for (std::size_t i = 1; i < assign_lines.size(); ++i) {
            if (csv_cells(assign_lines[i])[1] == "context") ++context_count;
        }
        check(context_count >= 5, "fraction 0.1 assigns context to at least ceil(0.1*50)");
    }

    // --- simulate: fraction 0 equals the baseline score means bit for bit
    check(r.run("simulate " + d + "data.json --fraction 0 --seed 7 -o " + d + "sim0.csv") == 0,
          "simulate --fraction 0 exits 0");
    {
        std::vector<double> ambiguity;
        std::vector<double> disagreement;
        for (std::size_t i = 1; i < score_lines.size(); ++i) {
            const auto cells = csv_cells(score_lines[i]);
            ambiguity.push_back(std::stod(cells[1]));
            disagreement.push_back(std::stod(cells[2]));
        }
        const auto sim_lines = lines_of(sieve::read_file(d + "sim0.csv"));
        const auto cells = csv_cells(sim_lines[1]);
        check(cells[0] == sieve::format_double(sieve::compensated_mean(ambiguity)),
              "simulated mean ambiguity equals the score-table mean, bit for bit");
        check(cells[3] == sieve::format_double(sieve::compensated_mean(disagreement)),
              "simulated mean disagreement equals the score-table mean, bit for bit");
        check(cells[7] == "0", "fraction 0 affects no instances");
    }

    check(r.run("simulate " + d + "data.json --uniform context --seed 7 -o " + d + "unif.csv") ==
              0,
          "uniform simulate exits 0");
    {
        const auto cells = csv_cells(lines_of(sieve::read_file(d + "unif.csv"))[1]);
        check(cells[6] == "50" && cells[7] == "50", "uniform round affects every instance");
    }
    check(r.run("simulate " + d + "data.json --fraction 0.1 --uniform context --seed 7") == 2,
          "--fraction with --uniform is a usage error");
    check(r.run("simulate " + d + "data.json --seed 7") == 2,
          "simulate without a mode is a usage error");
    check(r.run("simulate " + d + "data.json --fraction 0.1") == 2, "missing --seed is a usage error");

    // --- sweep: shape and reproducibility
    const std::string sweep_args =
        "sweep " + d + "data.json --fractions 0,0.05,0.1,0.15,0.2,0.25 --seed 7 -o ";
    check(r.run(sweep_args + d + "sweep.csv") == 0, "sweep exits 0");
    {
        const auto sweep_lines = lines_of(sieve::read_file(d + "sweep.csv"));
        check(sweep_lines.size() == 7, "sweep has one row per fraction");
        check(sweep_lines[0] ==
                  "fraction,mean_ambiguity,ambiguity_ci_lo,ambiguity_ci_hi,mean_disagreement,"
                  "disagreement_ci_lo,disagreement_ci_hi,affected_count",
              "sweep CSV header matches the interface");
    }
    check(r.run(sweep_args + d + "sweep2.csv") == 0, "second sweep exits 0");
    check(sieve::read_file(d + "sweep.csv") == sieve::read_file(d + "sweep2.csv"),
          "equal manifests (minus timestamp) reproduce outputs byte for byte");
    {
        Runner threaded = r;
        threaded.binary = "JUDGMENT_SIEVE_THREADS=4 " + r.binary;
        check(threaded.run(sweep_args + d + "sweep4.csv") == 0, "sweep runs with 4 workers");
        check(sieve::read_file(d + "sweep.csv") == sieve::read_file(d + "sweep4.csv"),
              "worker count does not change the output bytes");
        r.counter = threaded.counter;
    }
    check(strip_timestamp(sieve::read_file(d + "sweep.csv.manifest.json"))
                  .find("\"seed\": 7") != std::string::npos,
          "sweep manifest records the seed");

    // --- iterate
    check(r.run("iterate --fraction 0.25 --rounds 3 --seed 5 --reps 200 -o " + d + "traj.csv") ==
              0,
          "iterate exits 0");
    check(lines_of(sieve::read_file(d + "traj.csv")).size() == 4, "trajectory has 3 rounds");

    // --- report
    check(r.run("report " + d + "sweep.csv --style sweep -o " + d + "sweep_panels.csv") == 0,
          "sweep report exits 0");
    check(lines_of(sieve::read_file(d + "sweep_panels.csv")).size() == 13,
          "sweep panels: 2 metrics x 6 fractions plus header");
    check(r.run("report " + d + "scores.csv " + d + "ctx.csv " + d + "del.csv "
                "--style slices --seed 3 --reps 500 -o " + d + "slices.csv") == 0,
          "slices report exits 0");
    check(lines_of(sieve::read_file(d + "slices.csv")).size() == 13,
          "slice panels: 2 slices x 2 metrics x 3 conditions plus header");
    check(r.run("report " + d + "scores.csv --style slices --seed 3") == 2,
          "slices style needs three tables");

    // --- usage errors
    check(r.run("bogus-subcommand") == 2, "unknown subcommand exits 2");
    check(r.run("sweep " + d + "data.json --fractions 0.1 --seed 7 --bogus-flag x") == 2,
          "unknown flag exits 2");
    check(r.run("--help") == 0, "--help exits 0");
    check(r.run("sweep --help") == 0, "subcommand --help exits 0");
    {
        std::string help_text;
        r.run("simulate --help", &help_text);
        check(help_text.find("--fraction") != std::string::npos &&
                  help_text.find("--seed") != std::string::npos,
              "subcommand help documents its flags");
    }

    std::error_code ec;
    fs::remove_all(r.dir, ec);

    if (g_failures > 0) {
        std::cout << g_failures << " check(s) failed\n";
        return 1;
    }
    std::cout << "all CLI checks passed\n";
    return 0;
}
