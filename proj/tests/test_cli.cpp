#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nep/cli.hpp"
#include "nep/problem_io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nep_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& p, const std::string& content) {
    std::ofstream f(p);
    f << content;
}

std::string read_file(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const char* kTable1Problem = R"({
  "head": {"kind": "unit-disk"},
  "necks": [
    {"angle_or_s": 0.0, "epsilon": 0.01, "length": 1.0},
    {"angle_or_s": 1.5707963267948966, "epsilon": 0.01, "length": 2.0}
  ]
})";

}  // namespace

TEST_CASE("validate: pass and the two rejection cases") {
    TempDir tmp;
    write_file(tmp.file("good.json"), kTable1Problem);
    CHECK(nep::cli::run({"validate", "--problem", tmp.file("good.json")}) == 0);

    write_file(tmp.file("overlap.json"), R"({
      "head": {"kind": "unit-disk"},
      "necks": [
        {"angle_or_s": 0.0, "epsilon": 0.01, "length": 1.0},
        {"angle_or_s": 0.0, "epsilon": 0.01, "length": 2.0}
      ]
    })");
    CHECK(nep::cli::run({"validate", "--problem", tmp.file("overlap.json")}) == 2);

    write_file(tmp.file("thick.json"), R"({
      "head": {"kind": "unit-disk"},
      "necks": [{"angle_or_s": 0.0, "epsilon": 0.5, "length": 1.0}]
    })");
    CHECK(nep::cli::run({"validate", "--problem", tmp.file("thick.json")}) == 2);
}

TEST_CASE("eval: asymptotic value, guard, round-trip") {
    TempDir tmp;
    write_file(tmp.file("p.json"), kTable1Problem);
    const std::string out = tmp.file("eval.csv");
    CHECK(nep::cli::run({"eval", "--problem", tmp.file("p.json"), "--method", "asymptotic",
                         "--at", "0,0", "--out", out}) == 0);
    const auto rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "method");
    CHECK(rows[1][0] == "asymptotic");
    const double v = std::stod(rows[1][3]);
    CHECK(v == doctest::Approx(108.82240).epsilon(1e-6));
    // bit-exact round trip through the 17-digit format
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    CHECK(std::stod(buf) == v);

    // point inside the guard zone
    CHECK(nep::cli::run({"eval", "--problem", tmp.file("p.json"), "--method", "asymptotic",
                         "--at", "0.995,0", "--out", tmp.file("g.csv")}) == 2);
}

TEST_CASE("eval: all methods at the center are mutually consistent") {
    TempDir tmp;
    // budget-friendly eps for the MC leg
    write_file(tmp.file("p.json"), R"({
      "head": {"kind": "unit-disk"},
      "necks": [
        {"angle_or_s": 0.0, "epsilon": 0.1, "length": 2.0},
        {"angle_or_s": 1.5707963267948966, "epsilon": 0.1, "length": 2.0}
      ]
    })");
    const std::string out = tmp.file("all.json");
    CHECK(nep::cli::run({"eval", "--problem", tmp.file("p.json"), "--method", "all", "--at",
                         "0,0", "--walkers", "2000", "--dt", "0.002", "--seed", "3", "--format",
                         "json", "--out", out}) == 0);
    const nlohmann::json j = nlohmann::json::parse(read_file(out));
    REQUIRE(j["rows"].size() == 3);
    double ua = 0, ub = 0, um = 0;
    for (const auto& row : j["rows"]) {
        if (row["method"] == "asymptotic") ua = row["value"];
        if (row["method"] == "bie") ub = row["value"];
        if (row["method"] == "mc") um = row["value"];
    }
    CHECK(std::abs(ua - ub) / ub < 1e-2);
    CHECK(std::abs(um - ua) / ua < 0.08);
    // the structured asymptotic record rides along
    const nlohmann::json& rec = j["asymptotic_solution"];
    REQUIRE(rec.contains("C"));
    CHECK(rec["C"].size() == 2);
    CHECK(rec["C"][0].get<double>() < 0.0);
    CHECK(rec.contains("C_eps"));
    CHECK(rec.contains("T"));
    CHECK(rec.contains("F"));
    CHECK(rec.contains("Cconst"));
    CHECK(rec["u_at"].size() == 1);
    CHECK(rec["u_at"][0]["u"].get<double>() == doctest::Approx(ua));
    // and the BIE summary record
    const nlohmann::json& brec = j["bie_solution"];
    CHECK(brec["u_r_at"].size() == 1);
    CHECK(brec["u_r_at"][0]["u"].get<double>() == doctest::Approx(ub));
    CHECK(brec.contains("C_eps"));
    CHECK(brec["residual"].get<double>() < 1e-3);
}

TEST_CASE("table: built-in rows match the reference columns") {
    TempDir tmp;
    const std::string out = tmp.file("t.csv");
    CHECK(nep::cli::run({"table", "--which", "fit", "--out", out}) == 0);
    auto rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0][0] == "eps");
    // eps = 0.04 row
    CHECK(std::stod(rows[7][0]) == doctest::Approx(0.04));
    CHECK(std::stod(rows[7][1]) == doctest::Approx(43.35949).epsilon(1e-6));

    CHECK(nep::cli::run({"table", "--which", "L", "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 9);
    CHECK(std::stod(rows[2][2]) == doctest::Approx(97.89568).epsilon(1e-6));  // (1, 1.5)

    CHECK(nep::cli::run({"table", "--which", "eps", "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 11);
    CHECK(std::stod(rows[6][2]) == doctest::Approx(84.51055).epsilon(1e-6));  // (0.013, 0.013)

    // paper display mode prints 5 decimals
    CHECK(nep::cli::run({"table", "--which", "fit", "--precision", "paper", "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    CHECK(rows[1][1] == "19.33940");
}

TEST_CASE("table is deterministic") {
    TempDir tmp;
    CHECK(nep::cli::run({"table", "--which", "eps", "--out", tmp.file("a.csv")}) == 0);
    CHECK(nep::cli::run({"table", "--which", "eps", "--out", tmp.file("b.csv")}) == 0);
    CHECK(read_file(tmp.file("a.csv")) == read_file(tmp.file("b.csv")));
}

TEST_CASE("fit: exact basis, BIE series, paper fixture, csv input") {
    TempDir tmp;
    const std::string out = tmp.file("fit.csv");
    CHECK(nep::cli::run({"fit", "--table3", "asym", "--out", out}) == 0);
    auto rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][0]) == doctest::Approx(M_PI / 2.0).epsilon(1e-10));
    CHECK(std::stod(rows[1][1]) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(std::stod(rows[1][2]) ==
          doctest::Approx(3.0 - 0.75 * std::log(2.0)).epsilon(1e-9));

    CHECK(nep::cli::run({"fit", "--table3", "paper-ur", "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    const double a = std::stod(rows[1][0]);
    CHECK(a == doctest::Approx(1.5699572689).epsilon(1e-8));  // frozen LSQ oracle
    CHECK(std::abs(a - M_PI / 2.0) / (M_PI / 2.0) < 0.002);

    CHECK(nep::cli::run({"fit", "--table3", "bie", "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    CHECK(std::abs(std::stod(rows[1][0]) - M_PI / 2.0) / (M_PI / 2.0) < 0.02);
    CHECK(std::stod(rows[1][1]) == doctest::Approx(-0.5).epsilon(0.10));

    // CSV series input with a header line
    write_file(tmp.file("series.csv"), "eps,value\n0.1,17.0\n0.05,33.0\n0.025,65.0\n0.0125,129.0\n");
    CHECK(nep::cli::run({"fit", "--series", tmp.file("series.csv"), "--out", out}) == 0);
    rows = parse_csv(read_file(out));
    // series is 1.6/eps + 1: a ~ 1.6, c ~ 1 up to the ln basis correlation
    CHECK(std::stod(rows[1][0]) == doctest::Approx(1.6).epsilon(0.05));
}

TEST_CASE("density-dump writes the flux density and the debug kernel dump") {
    TempDir tmp;
    write_file(tmp.file("p.json"), kTable1Problem);
    const std::string out = tmp.file("dens.csv");
    const std::string rout = tmp.file("rpart.csv");
    CHECK(nep::cli::run({"density-dump", "--problem", tmp.file("p.json"), "--resolution", "16",
                         "--out", out, "--regular-part-csv", rout,
                         "--regular-part-nodes", "8"}) == 0);
    const auto rows = parse_csv(read_file(out));
    REQUIRE(rows.size() == 1 + 2 * 16);
    CHECK(rows[0][0] == "window_index");
    for (size_t r = 1; r < rows.size(); ++r) CHECK(std::stod(rows[r][2]) < 0.0);
    const auto rrows = parse_csv(read_file(rout));
    REQUIRE(rrows.size() == 1 + 8 * 8);
    for (size_t r = 1; r < rrows.size(); ++r)
        CHECK(std::stod(rrows[r][2]) == 0.0);  // disk: R identically zero
}

TEST_CASE("mc subcommand emits the stats record and histogram") {
    TempDir tmp;
    write_file(tmp.file("p.json"), R"({
      "head": {"kind": "unit-disk"},
      "necks": [
        {"angle_or_s": 0.0, "epsilon": 0.1, "length": 1.0},
        {"angle_or_s": 3.141592653589793, "epsilon": 0.1, "length": 1.0}
      ]
    })");
    const std::string out = tmp.file("mc.json");
    const std::string hist = tmp.file("h.csv");
    CHECK(nep::cli::run({"mc", "--problem", tmp.file("p.json"), "--at", "0,0", "--walkers",
                         "200", "--dt", "0.002", "--seed", "9", "--hist", hist, "--out",
                         out}) == 0);
    const nlohmann::json j = nlohmann::json::parse(read_file(out));
    CHECK(j["n"] == 200);
    CHECK(j["seed"] == 9);
    CHECK(j["mean"].get<double>() > 0.0);
    CHECK(j["absorbed_fraction"].get<double>() >= 0.999);
    const auto hrows = parse_csv(read_file(hist));
    CHECK(hrows.size() == 1 + 200);
}

TEST_CASE("curve head problems load and validate") {
    TempDir tmp;
    // three-lobe star, 512 samples
    nlohmann::json j;
    j["head"]["kind"] = "curve";
    nlohmann::json pts = nlohmann::json::array();
    for (int k = 0; k < 512; ++k) {
        const double t = 2.0 * M_PI * k / 512;
        const double r = 1.0 + 0.15 * std::cos(3.0 * t);
        pts.push_back({r * std::cos(t), r * std::sin(t)});
    }
    j["head"]["points"] = pts;
    j["necks"] = {{{"angle_or_s", 0.0}, {"epsilon", 0.02}, {"length", 1.0}},
                  {{"angle_or_s", 3.4}, {"epsilon", 0.02}, {"length", 1.0}}};
    write_file(tmp.file("star.json"), j.dump());
    CHECK(nep::cli::run({"validate", "--problem", tmp.file("star.json")}) == 0);

    // bad JSON exits with the validation code
    write_file(tmp.file("bad.json"), "{not json");
    CHECK(nep::cli::run({"validate", "--problem", tmp.file("bad.json")}) != 0);
}

TEST_CASE("problem JSON round-trips through save and load") {
    TempDir tmp;
    write_file(tmp.file("p.json"), kTable1Problem);
    const nep::ProblemSpec spec = nep::io::load_problem(tmp.file("p.json"));
    const nep::ProblemSpec back = nep::io::problem_from_json(nep::io::to_json(spec));
    REQUIRE(back.necks.size() == spec.necks.size());
    for (size_t i = 0; i < spec.necks.size(); ++i) {
        CHECK(back.necks[i].s == spec.necks[i].s);
        CHECK(back.necks[i].epsilon == spec.necks[i].epsilon);
        CHECK(back.necks[i].length == spec.necks[i].length);
    }
    CHECK(back.head.is_unit_disk());
}
