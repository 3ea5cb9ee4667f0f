#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "ttp/cli.hpp"
#include "ttp/export.hpp"
#include "ttp/report.hpp"

using namespace ttp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "ttpdual");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("ttp_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Minimal well-formedness check: balanced tags, no stray '<'.
bool well_formed_xml(const std::string& s) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while ((i = s.find('<', i)) != std::string::npos) {
        const std::size_t close = s.find('>', i);
        if (close == std::string::npos) return false;
        const std::string tag = s.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag.find('<') != std::string::npos) return false;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        if (stack.empty() && root_seen) return false;
        root_seen = true;
        if (tag.back() == '/') continue;
        stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
    return root_seen && stack.empty();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"bogus"}).code == 1);
    CHECK(cli({"solve"}).code == 1);  // --instance is required
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"generate", "--template", "s1", "--seed", "1", "--set", "oops"}).code == 1);
}

TEST_CASE("generate is deterministic and loads back") {
    const Run a = cli({"generate", "--template", "s2", "--seed", "9"});
    const Run b = cli({"generate", "--template", "s2", "--seed", "9"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const Instance inst = load_instance_string(a.out);
    CHECK(inst.num_blocks() == 23);
    CHECK(save_instance(inst) == a.out);
    CHECK(cli({"generate", "--template", "s9", "--seed", "1"}).code == 2);
    CHECK(cli({"generate", "--template", "s1", "--seed", "1", "--set", "requests=x"}).code == 2);
}

TEST_CASE("solve, compare and export") {
    TempDir dir;
    save_instance_file(testing::tiny_instance(2), dir / "inst.json");

    SUBCASE("input and i/o failures") {
        CHECK(cli({"solve", "--instance", dir / "missing.json"}).code == 4);
        std::ofstream(dir / "broken.json") << "{\"blocks\": [";
        CHECK(cli({"solve", "--instance", dir / "broken.json"}).code == 2);
        CHECK(cli({"solve", "--instance", dir / "inst.json", "--param", "k_max=-1"}).code == 2);
        CHECK(cli({"solve", "--instance", dir / "inst.json", "--param", "what=1"}).code == 2);
        CHECK(cli({"solve", "--instance", dir / "inst.json", "--param", "k_max"}).code == 1);
        CHECK(cli({"solve", "--instance", dir / "inst.json", "--method", "x"}).code == 2);
    }

    SUBCASE("solve output is byte-identical across runs and round-trips") {
        const Run a = cli({"solve", "--instance", dir / "inst.json", "--param", "k_max=40",
                           "--out", dir / "a"});
        const Run b = cli({"solve", "--instance", dir / "inst.json", "--param", "k_max=40",
                           "--out", dir / "b"});
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        CHECK(slurp(dir / "a/report.json") == slurp(dir / "b/report.json"));
        CHECK(slurp(dir / "a/trace.csv") == slurp(dir / "b/trace.csv"));

        const Json j = Json::parse(slurp(dir / "a/report.json"));
        const StoredReport back = report_from_json(j);
        CHECK(report_to_json(back.report, back.instance).dump(2) + "\n" == slurp(dir / "a/report.json"));
        CHECK(back.report.config.k_max == 40);

        const Run stdout_run = cli({"solve", "--instance", dir / "inst.json", "--param", "k_max=40"});
        CHECK(stdout_run.out == slurp(dir / "a/report.json"));

        REQUIRE(cli({"export", "--report", dir / "a/report.json", "--out", dir / "ex", "--svg"}).code == 0);
        for (const char* f : {"prices.csv", "timetable.csv", "violations.csv", "convergence.csv"})
            CHECK(fs::exists(dir / (std::string("ex/") + f)));
        for (const char* f : {"timedist.svg", "price_heatmap.svg", "convergence.svg"}) {
            const std::string svg = slurp(dir / (std::string("ex/") + f));
            CAPTURE(f);
            CHECK(svg.find("<svg") != std::string::npos);
            CHECK(well_formed_xml(svg));
        }
        CHECK(slurp(dir / "ex/timetable.csv").rfind("request,seq,block,entry_s,exit_s,stopped", 0) == 0);

        CHECK(cli({"export", "--report", dir / "inst.json", "--out", dir / "bad"}).code == 2);
    }

    SUBCASE("compare writes both methods") {
        REQUIRE(cli({"compare", "--instance", dir / "inst.json", "--param", "k_max=40", "--out",
                     dir / "c"}).code == 0);
        const Json j = Json::parse(slurp(dir / "c/comparison.json"));
        CHECK(j.at("kind") == "comparison");
        CHECK(j.at("reports").contains("aggregate"));
        CHECK(j.at("reports").contains("disaggregate"));
        CHECK(fs::exists(dir / "c/trace_aggregate.csv"));
        REQUIRE(cli({"export", "--report", dir / "c/comparison.json", "--out", dir / "cx", "--svg"}).code == 0);
        CHECK(fs::exists(dir / "cx/timetable_aggregate.csv"));
        CHECK(fs::exists(dir / "cx/timedist_disaggregate.svg"));
        CHECK(well_formed_xml(slurp(dir / "cx/convergence.svg")));
    }
}

TEST_CASE("svg writers produce well-formed documents") {
    CHECK(well_formed_xml(convergence_svg({{"a", {3.0, 2.0, 1.5}}, {"b", {}}})));
    CHECK(well_formed_xml(price_heatmap_svg(PriceMatrix(2, 3))));
    CHECK_FALSE(well_formed_xml("<svg><g></svg>"));
}
