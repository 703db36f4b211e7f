// Integration tests driving the installed CLI binary end to end.

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* cli_path() { return ENVINDEX_CLI_PATH; }

int run(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

int run_env(const std::string& env, const std::string& args) {
    const std::string cmd = env + " " + std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("envindex_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("quantize writes a measure CSV") {
    const auto dir = fresh_dir("quantize");
    const auto out = dir / "m.csv";
    REQUIRE(run("quantize --alpha 0.295 --beta 34.4 -n 4 --out " + out.string()) == 0);
    REQUIRE(fs::exists(out));
    CHECK(count_lines(out) == 5); // header + 4 atoms
    const auto rows = read_csv_rows(out);
    CHECK(rows[0][0] == doctest::Approx(0.020770738467239743).epsilon(1e-9));
    CHECK(rows[3][0] == doctest::Approx(25.032470590096303).epsilon(1e-9));

    CHECK(run("quantize --alpha 1.25 --beta 0.01 -n 8 --scheme tilted --out " + out.string()) ==
          0);
    CHECK(run("quantize --alpha -1 --beta 1 -n 4 --out " + out.string()) == 2);
}

TEST_CASE("solve writes coefficients and a summary") {
    const auto dir = fresh_dir("solve");
    REQUIRE(run("solve --atoms-N 32 --atoms-M 32 --aversion-c 0.5 --out-dir " + dir.string()) ==
            0);
    REQUIRE(fs::exists(dir / "summary.json"));
    CHECK(count_lines(dir / "A.csv") == 33);
    CHECK(count_lines(dir / "D.csv") == 33);
    CHECK(count_lines(dir / "C.csv") == 32 * 32 + 1);

    json summary;
    std::ifstream(dir / "summary.json") >> summary;
    CHECK(summary["tool"]["name"] == "envindex");
    CHECK(summary["results"]["B"].get<double>() > 0.0);
    CHECK(summary["results"]["V1"].get<double>() >
          summary["results"]["B"].get<double>());
    CHECK(summary["config"]["mu_scheme_resolved"] == "tilted");
}

TEST_CASE("solve reports zero B exactly when growth is off") {
    const auto dir = fresh_dir("solve_r0");
    REQUIRE(run("solve --atoms-N 16 --atoms-M 16 --growth-R 0 --aversion-c 0.5 --out-dir " +
                dir.string()) == 0);
    json summary;
    std::ifstream(dir / "summary.json") >> summary;
    CHECK(summary["results"]["B"].get<double>() == 0.0);
}

TEST_CASE("config file with flag overrides") {
    const auto dir = fresh_dir("config");
    const auto cfg = dir / "run.json";
    {
        std::ofstream out(cfg);
        out << R"({"p": {"shape": 0.295, "scale": 34.4},
                   "mu": {"shape": 1.25, "scale": 0.01},
                   "growth_R": 0.02, "aversion_c": 0.25,
                   "atoms_N": 16, "atoms_M": 16})";
    }
    REQUIRE(run("solve --config " + cfg.string() + " --aversion-c 0.5 --out-dir " +
                dir.string()) == 0);
    json summary;
    std::ifstream(dir / "summary.json") >> summary;
    CHECK(summary["config"]["aversion_c"][0].get<double>() == 0.5);
    CHECK(summary["config"]["atoms_N"].get<int>() == 16);
}

TEST_CASE("invalid configurations exit with code 2") {
    CHECK(run("solve --aversion-c 1.5") == 2);
    CHECK(run("solve --atoms-N 0") == 2);
    CHECK(run("solve --alpha-delta 0.9 --mu-scheme tilted") == 2);
    const auto dir = fresh_dir("badjson");
    const auto cfg = dir / "bad.json";
    std::ofstream(cfg) << "{not json";
    CHECK(run("solve --config " + cfg.string()) == 2);
    CHECK(run("definitely-not-a-command") == 2);
}

TEST_CASE("frontier sweep CSV") {
    const auto dir = fresh_dir("frontier");
    REQUIRE(run("frontier --atoms-N 32 --atoms-M 32 --c-count 5 --out-dir " + dir.string()) ==
            0);
    const auto rows = read_csv_rows(dir / "frontier.csv");
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 4); // c, Ren, Env, V
        const double c = row[0], ren = row[1], env = row[2], v = row[3];
        CHECK(std::abs(v - (env - ren / c)) <= 1e-10 * std::max(1.0, std::abs(v)));
    }
    // single-point grid matches a direct solve
    const auto dir2 = fresh_dir("frontier1");
    REQUIRE(run("frontier --atoms-N 32 --atoms-M 32 --aversion-c 0.5 --out-dir " +
                dir2.string()) == 0);
    const auto one = read_csv_rows(dir2 / "frontier.csv");
    REQUIRE(one.size() == 1);

    const auto dir3 = fresh_dir("solve_ref");
    REQUIRE(run("solve --atoms-N 32 --atoms-M 32 --aversion-c 0.5 --out-dir " + dir3.string()) ==
            0);
    json summary;
    std::ifstream(dir3 / "summary.json") >> summary;
    CHECK(one[0][3] ==
          doctest::Approx(summary["results"]["V1"].get<double>()).epsilon(1e-12));
}

TEST_CASE("frontier batch over growth rates shifts upward") {
    const auto dir = fresh_dir("frontier_batch");
    REQUIRE(run("frontier --atoms-N 24 --atoms-M 24 --c-count 4 --growth-R 0.01 0.02 "
                "--out-dir " +
                dir.string()) == 0);
    const auto lo = read_csv_rows(dir / "frontier_R0.01.csv");
    const auto hi = read_csv_rows(dir / "frontier_R0.02.csv");
    REQUIRE(lo.size() == 4);
    REQUIRE(hi.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(hi[k][2] > lo[k][2]);
}

TEST_CASE("converge study emits the error table") {
    const auto dir = fresh_dir("converge");
    REQUIRE(run("converge --atoms-N 8 --atoms-M 8 --resolutions 16 32 --reference 64 "
                "--c-count 3 --out-dir " +
                dir.string()) == 0);
    const auto rows = read_csv_rows(dir / "converge.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == 16.0);
    CHECK(rows[1][0] == 32.0);
    CHECK(rows[0][1] >= 0.0);
    CHECK(rows[1][1] <= rows[0][1]); // finer grid, smaller error
    CHECK(run("converge --resolutions 64 --reference 64") == 2);
}

TEST_CASE("simulate is deterministic for a fixed seed") {
    const auto dir1 = fresh_dir("sim1");
    const auto dir2 = fresh_dir("sim2");
    const std::string args =
        "simulate --atoms-N 16 --atoms-M 16 --sites 24 --replicates 400 --times 0.1 0.5 1 "
        "--horizon 1 --aversion-c 0.5 ";
    REQUIRE(run(args + "--seed 99 --out-dir " + dir1.string()) == 0);
    REQUIRE(run(args + "--seed 99 --out-dir " + dir2.string()) == 0);
    const std::string a = slurp(dir1 / "mc.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir2 / "mc.csv"));
    CHECK(count_lines(dir1 / "mc.csv") == 4);

    // different seed, different draw
    const auto dir3 = fresh_dir("sim3");
    REQUIRE(run(args + "--seed 100 --out-dir " + dir3.string()) == 0);
    CHECK(a != slurp(dir3 / "mc.csv"));

    CHECK(run("simulate --sites 8 --x0 0.5") == 2); // non-binary start
}

TEST_CASE("simulate writes the deterministic mean trajectory") {
    const auto dir = fresh_dir("sim_traj");
    REQUIRE(run("simulate --sites 8 --replicates 20 --times 0.5 1 --horizon 1 --per-atom "
                "--atoms-M 8 --out-dir " +
                dir.string()) == 0);
    const std::string traj = slurp(dir / "trajectory.csv");
    CHECK(traj.rfind("t,X,x0", 0) == 0);
    CHECK(count_lines(dir / "trajectory.csv") == 3);
}

TEST_CASE("outputs do not depend on the worker count") {
    const auto dir1 = fresh_dir("omp1");
    const auto dir2 = fresh_dir("omp2");
    const std::string args = "solve --atoms-N 48 --atoms-M 48 --aversion-c 0.37 --out-dir ";
    REQUIRE(run_env("OMP_NUM_THREADS=1", args + dir1.string()) == 0);
    REQUIRE(run_env("OMP_NUM_THREADS=2", args + dir2.string()) == 0);
    CHECK(slurp(dir1 / "A.csv") == slurp(dir2 / "A.csv"));
    CHECK(slurp(dir1 / "D.csv") == slurp(dir2 / "D.csv"));
}

TEST_CASE("per-atom initial state file") {
    const auto dir = fresh_dir("x0file");
    const auto x0 = dir / "x0.txt";
    {
        std::ofstream out(x0);
        for (int i = 0; i < 16; ++i) out << (i % 2) << "\n";
    }
    REQUIRE(run("solve --atoms-N 16 --atoms-M 16 --x0-file " + x0.string() + " --out-dir " +
                dir.string()) == 0);
    json summary;
    std::ifstream(dir / "summary.json") >> summary;
    CHECK(summary["config"]["x0"]["file"].get<std::string>() == x0.string());
    // half-full start gives a smaller index than the full start
    const auto dir2 = fresh_dir("x0full");
    REQUIRE(run("solve --atoms-N 16 --atoms-M 16 --out-dir " + dir2.string()) == 0);
    json full;
    std::ifstream(dir2 / "summary.json") >> full;
    CHECK(summary["results"]["V1"].get<double>() < full["results"]["V1"].get<double>());

    std::ofstream(x0) << "0.5\n";
    CHECK(run("solve --atoms-N 16 --atoms-M 16 --x0-file " + x0.string()) == 2);
}

TEST_CASE("verify passes on a healthy run and fails the negative control") {
    const auto dir = fresh_dir("verify");
    CHECK(run("verify --atoms-N 32 --atoms-M 32 --aversion-c 0.5 --out-dir " + dir.string()) ==
          0);
    CHECK(run("verify --atoms-N 32 --atoms-M 32 --aversion-c 0.5 --inject-corrupt-a "
              "--out-dir " +
              dir.string()) == 4);
    // R = 0: redundancy degenerates to <D> = 0 and still verifies
    CHECK(run("verify --atoms-N 24 --atoms-M 24 --growth-R 0 --aversion-c 0.5 --out-dir " +
              dir.string()) == 0);
}
