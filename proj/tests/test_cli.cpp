#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "geex/geex.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = GEEX_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

// first data row of the generated dataset, rewritten as an 8x8 grid CSV;
// returns the sample's label
int extract_first_sample(const std::string& data_csv, const std::string& input_csv) {
    std::ifstream in(data_csv);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') break;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 65);
    std::ofstream out(input_csv);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c)
            out << cells[1 + r * 8 + c] << (c == 7 ? "\n" : ",");
    }
    return std::stoi(cells[0]);
}

double aopc_from_csv(const std::string& path, const std::string& method,
                     const std::string& replacement) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    const std::string prefix = method + "," + replacement + ",";
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) != 0) continue;
        std::stringstream ss(line.substr(prefix.size()));
        std::string mean;
        std::getline(ss, mean, ',');
        return std::stod(mean);
    }
    REQUIRE(false);
    return 0.0;
}

}  // namespace

TEST_CASE("explain runs are byte-identical across runs and worker counts") {
    TempDir dir("geex_cli_det");
    REQUIRE(run("gen-data --n 128 --noise 0.1 --seed 13 --out " + (dir / "data.csv")) == 0);
    REQUIRE(run("gen-model --train " + (dir / "data.csv") +
                " --arch 16 --epochs 120 --lr 2.0 --seed 13 --out " +
                (dir / "model.json")) == 0);
    extract_first_sample(dir / "data.csv", dir / "input.csv");

    const std::string common = " --model " + (dir / "model.json") + " --input " +
                               (dir / "input.csv") +
                               " --method geex --n-star 2000 --seed 5 --class 0";
    REQUIRE(run("explain" + common + " --workers 1 --out " + (dir / "w1")) == 0);
    REQUIRE(run("explain" + common + " --workers 8 --out " + (dir / "w8")) == 0);
    REQUIRE(run("explain" + common + " --workers 8 --out " + (dir / "w8b")) == 0);

    for (const char* f : {"attribution.csv", "attribution.pgm", "meta.txt"}) {
        CHECK(slurp(dir.path / "w1" / f) == slurp(dir.path / "w8" / f));
        CHECK(slurp(dir.path / "w8" / f) == slurp(dir.path / "w8b" / f));
    }
}

TEST_CASE("evaluate is byte-identical across runs and worker counts") {
    TempDir dir("geex_cli_evdet");
    REQUIRE(run("gen-data --n 128 --noise 0.1 --seed 13 --out " + (dir / "data.csv")) == 0);
    REQUIRE(run("gen-model --train " + (dir / "data.csv") +
                " --arch 16 --epochs 120 --lr 2.0 --seed 13 --out " +
                (dir / "model.json")) == 0);
    extract_first_sample(dir / "data.csv", dir / "input.csv");

    const std::string common = " --model " + (dir / "model.json") + " --input " +
                               (dir / "input.csv") +
                               " --method geex --replacement baseline --replacement "
                               "gaussian --l 16 --seeds 2 --n-star 1000 --class 0";
    REQUIRE(run("evaluate" + common + " --workers 1 --out " + (dir / "e1")) == 0);
    REQUIRE(run("evaluate" + common + " --workers 8 --out " + (dir / "e8")) == 0);
    REQUIRE(run("evaluate" + common + " --workers 8 --out " + (dir / "e8b")) == 0);

    for (const char* f :
         {"curve_baseline.csv", "curve_gaussian.csv", "aopc.csv"}) {
        CHECK(slurp(dir.path / "e1" / f) == slurp(dir.path / "e8" / f));
        CHECK(slurp(dir.path / "e8" / f) == slurp(dir.path / "e8b" / f));
    }
}

TEST_CASE("end-to-end pipeline: geex clearly beats random ordering") {
    TempDir dir("geex_cli_e2e");
    REQUIRE(run("gen-data --n 256 --noise 0.1 --seed 13 --out " + (dir / "data.csv")) == 0);
    CHECK(fs::exists(dir.path / "data.csv.meta"));
    REQUIRE(run("gen-model --train " + (dir / "data.csv") +
                " --arch 16 --epochs 150 --lr 2.0 --seed 13 --out " +
                (dir / "model.json")) == 0);
    const int label = extract_first_sample(dir / "data.csv", dir / "input.csv");

    REQUIRE(run("evaluate --model " + (dir / "model.json") + " --input " +
                (dir / "input.csv") +
                " --method geex --method random --replacement baseline --l 32 "
                "--seeds 3 --n-star 2000 --class " +
                std::to_string(label) + " --out " + (dir / "eval")) == 0);

    const std::string aopc = dir / "eval/aopc.csv";
    CHECK(aopc_from_csv(aopc, "geex", "baseline") -
              aopc_from_csv(aopc, "random", "baseline") >=
          0.2);
}

TEST_CASE("explicand equal to baseline yields the all-zero outputs") {
    TempDir dir("geex_cli_zero");
    REQUIRE(run("gen-model --analytic sigmoid_of_x_only_2d --out " +
                (dir / "sig2.json")) == 0);
    {
        std::ofstream out(dir / "x.csv");
        out << "2,0.5\n";
    }
    REQUIRE(run("explain --model " + (dir / "sig2.json") + " --input " +
                (dir / "x.csv") + " --method geex --n-star 100 --baseline file:" +
                (dir / "x.csv") + " --out " + (dir / "out")) == 0);
    for (double v : geex::read_value_column_csv(dir / "out/attribution.csv"))
        CHECK(v == 0.0);
    const std::string pgm = slurp(dir.path / "out" / "attribution.pgm");
    CHECK(pgm.find("128") != std::string::npos);
    std::istringstream ss(pgm);
    std::string tok;
    for (int i = 0; i < 4; ++i) ss >> tok;  // magic, w, h, maxval
    while (ss >> tok) CHECK(tok == "128");
}

TEST_CASE("pre-generated mask bundles feed explain deterministically") {
    TempDir dir("geex_cli_masks");
    REQUIRE(run("gen-masks --shape 2 --n-star 200 --sigma 0.8 --seed 3 --out " +
                (dir / "masks.csv")) == 0);
    REQUIRE(run("gen-model --analytic sigmoid_of_x_only_2d --out " +
                (dir / "m.json")) == 0);
    {
        std::ofstream out(dir / "x.csv");
        out << "1,0.25\n";
    }
    // shape mismatch between the model's 2-vector and a 3-vector input -> exit 3
    {
        std::ofstream out(dir / "bad.csv");
        out << "1,0,0\n";
    }
    const std::string base = "explain --model " + (dir / "m.json") +
                             " --method geex --masks " + (dir / "masks.csv");
    REQUIRE(run(base + " --input " + (dir / "x.csv") + " --out " + (dir / "a")) == 0);
    REQUIRE(run(base + " --input " + (dir / "x.csv") + " --out " + (dir / "b")) == 0);
    CHECK(slurp(dir.path / "a" / "attribution.csv") ==
          slurp(dir.path / "b" / "attribution.csv"));
    CHECK(run(base + " --input " + (dir / "bad.csv") + " --out " + (dir / "c")) == 3);
}

TEST_CASE("exit codes: capability, usage, parse failures") {
    TempDir dir("geex_cli_exit");
    REQUIRE(run("gen-model --analytic sigmoid1d --black-box --out " +
                (dir / "bb.json")) == 0);
    {
        std::ofstream out(dir / "x.csv");
        out << "2\n";
    }
    // ig needs gradients; the black-box model refuses -> capability exit
    CHECK(run("explain --model " + (dir / "bb.json") + " --input " + (dir / "x.csv") +
              " --method ig --out " + (dir / "out")) == 4);
    // unknown method -> usage exit
    CHECK(run("explain --model " + (dir / "bb.json") + " --input " + (dir / "x.csv") +
              " --method nope --out " + (dir / "out")) == 2);
    // missing required flag -> usage exit
    CHECK(run("explain --model " + (dir / "bb.json")) == 2);
    // no subcommand -> usage exit
    CHECK(run("") == 2);
    // odd budget with mirroring -> usage exit
    CHECK(run("explain --model " + (dir / "bb.json") + " --input " + (dir / "x.csv") +
              " --method ge --n-star 101 --mirror on --out " + (dir / "out")) == 2);
}
