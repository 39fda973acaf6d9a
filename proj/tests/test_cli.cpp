#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "polyens/kernels.hpp"

using namespace polyens;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("polyens_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Result run(const std::string& args, const std::string& env = "") {
    const char* cli = std::getenv("POLYENS_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "POLYENS_CLI must point at the polyens binary");
    const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd = env + " '" + std::string(cli) + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

Csv parse_csv(const std::string& text) {
    Csv c;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("# ", 0) == 0) {
            c.comments.push_back(line);
        } else if (c.header.empty()) {
            c.header = split(line);
        } else if (!line.empty()) {
            c.rows.push_back(split(line));
        }
    }
    return c;
}

bool mentions(const Result& r, const std::string& s) { return r.err.find(s) != std::string::npos; }

}  // namespace

TEST_CASE("kernel grid CSV matches the library bit for bit") {
    const auto r = run("kernel --n 4 --M 2 --nu 0,1 --l 11 --grid-x 0.1,0.5 --grid-y 0.1,0.5");
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    CHECK(c.header == std::vector<std::string>{"x", "y", "value", "abs_imag_residual", "route", "converged"});
    REQUIRE(c.rows.size() == 4);
    TruncationModelParams p;
    p.n = 4;
    p.M = 2;
    p.nu = {0, 1};
    p.l = 11;
    for (const auto& row : c.rows) {
        const double x = std::stod(row[0]), y = std::stod(row[1]);
        CHECK(std::stod(row[2]) == kernel_finite(p, x, y, KernelRoute::contour).value);
        CHECK(row[4] == "contour");
        CHECK(row[5] == "true");
    }
    bool version = false, config = false;
    for (const auto& line : c.comments) {
        version = version || line.rfind("# polyens ", 0) == 0;
        config = config || line.find("\"l\":\"11\"") != std::string::npos;
    }
    CHECK(version);
    CHECK(config);
}

TEST_CASE("usage errors exit with 2") {
    auto r = run("kernel --n 4 --nu 0,1 --grid-x 0.1 --grid-y 0.1");
    CHECK(r.code == 2);
    CHECK(mentions(r, "--l"));

    r = run("kernel --n 2 --nu 1 --l 4 --grid-x 0.1 --grid-y 0.1");  // l = 2n + nu_1 - 1
    CHECK(r.code == 2);
    CHECK(mentions(r, "always has 1 as a singular value"));

    CHECK(run("kernel --n 2 --nu 1 --l 6 --grid-x 0.1 --grid-y 0.1 --alpha 1").code == 2);
    CHECK(run("kernel --n 2 --M 3 --nu 1 --l 6 --grid-x 0.1 --grid-y 0.1").code == 2);
    CHECK(run("kernel --n 2 --nu 1 --l 6 --grid-x 0.1,abc --grid-y 0.1").code == 2);
    CHECK(run("kernel --n 2 --nu 1 --l 6 --grid-x 0.1 --grid-y 0.1 --route nowhere").code == 2);
    CHECK(run("kernel --n 2 --nu 1 --l 6 --grid-x 0.1 --grid-y 0.1 --bogus 3").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("verify --suite nonexistent").code == 2);
    CHECK(run("sample --n 2 --nu 0 --samples 10").code == 2);  // no seed
}

TEST_CASE("config file: flags win, unknown keys are errors") {
    const fs::path cfg = scratch() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# kernel run\nn = 3\nnu = 0,1\nl = 11\ngrid-x = 0.2\ngrid-y = 0.3\n";
    }
    const auto r = run("kernel --config '" + cfg.string() + "' --n 4");
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    REQUIRE(c.rows.size() == 1);
    TruncationModelParams p;
    p.n = 4;
    p.M = 2;
    p.nu = {0, 1};
    p.l = 11;
    CHECK(std::stod(c.rows[0][2]) == kernel_finite(p, 0.2, 0.3, KernelRoute::contour).value);

    const fs::path bad = scratch() / "bad.cfg";
    {
        std::ofstream f(bad);
        f << "n = 3\ncolour = blue\n";
    }
    const auto e = run("kernel --config '" + bad.string() + "'");
    CHECK(e.code == 2);
    CHECK(mentions(e, "colour"));
}

TEST_CASE("outputs are written atomically and reproducibly") {
    const fs::path dir = scratch() / "atomic";
    fs::create_directories(dir);
    const std::string args = "hard-edge --nu 0,1 --grid-x 0.5,1 --grid-y 2 --out '";
    REQUIRE(run(args + (dir / "a.csv").string() + "'").code == 0);
    REQUIRE(run(args + (dir / "b.csv").string() + "'").code == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        ++files;
        CHECK(e.path().string().find(".tmp") == std::string::npos);
    }
    CHECK(files == 2);
    const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
    const Csv ca = parse_csv(a), cb = parse_csv(b);
    CHECK(ca.rows == cb.rows);
    REQUIRE(ca.rows.size() == 2);
    HardEdgeParams p;
    p.nu = {0.0, 1.0};
    CHECK(std::stod(ca.rows[1][2]) == kernel_hard_edge(p, 1.0, 2.0, KernelRoute::contour).value);
}

TEST_CASE("borodin grid") {
    const auto r = run("borodin --alpha 0.5 --theta 2 --grid-x 0.7 --grid-y 1.3");
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    REQUIRE(c.rows.size() == 1);
    BorodinParams p;
    p.alpha = 0.5;
    p.theta = 2.0;
    CHECK(std::stod(c.rows[0][2]) == kernel_borodin(p, 0.7, 1.3));
    CHECK(run("borodin --alpha -2 --theta 2 --grid-x 0.7 --grid-y 1.3").code == 2);
}

TEST_CASE("sample batches do not depend on the worker count") {
    const std::string args = "sample --model truncation --n 2 --nu 0 --l 5 --samples 200 --seed 99";
    const auto one = run(args, "POLYENS_THREADS=1");
    const auto three = run(args, "POLYENS_THREADS=3");
    const auto flag = run(args + " --threads 2");
    REQUIRE(one.code == 0);
    CHECK(one.out == three.out);
    CHECK(parse_csv(one.out).rows == parse_csv(flag.out).rows);  // the header records --threads
    const Csv c = parse_csv(one.out);
    CHECK(c.header == std::vector<std::string>{"draw", "x1", "x2"});
    CHECK(c.rows.size() == 200);
    bool seed = false, rejections = false;
    for (const auto& line : c.comments) {
        seed = seed || line == "# seed: 99";
        rejections = rejections || line == "# rejections: 0";
    }
    CHECK(seed);
    CHECK(rejections);
    for (const auto& row : c.rows) {
        CHECK(std::stod(row[1]) >= std::stod(row[2]));
        CHECK(std::stod(row[1]) < 1.0);
    }
}

TEST_CASE("density-compare writes a goodness report") {
    const auto r = run("density-compare --model ginibre --n 3 --nu 0,1 --samples 20000 --seed 7");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["pass"] == true);
    CHECK(j["sample_count"] == 60000);
    CHECK(j["ks_distance"].get<double>() <= 0.02);
    CHECK(j["chi2_dof"] == 49);
    CHECK(std::abs(j["density_mass"].get<double>() - 1.0) < 1e-6);
    CHECK(j["provenance"]["seed"] == 7);
    CHECK(j["provenance"]["rejections"] == 0);
}

TEST_CASE("verify report") {
    const fs::path out = scratch() / "telescoping.json";
    const auto r = run("verify --suite telescoping --out '" + out.string() + "'");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["suite"] == "telescoping");
    CHECK(j["pass"] == true);
    REQUIRE(j["cases"].size() == 1);
    CHECK(j["cases"][0]["metric"].get<double>() <= 1e-10);
    CHECK(j["cases"][0]["threshold"] == 1e-10);
    CHECK(j["cases"][0].contains("name"));
}

TEST_CASE("numerical failures exit with 1 and a diagnostic") {
    const auto r = run("kernel --n 2 --nu 0 --l 5 --grid-x -0.5 --grid-y 0.1");
    CHECK(r.code == 1);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "DomainError");
    CHECK(j["config"]["command"] == "kernel");
}
