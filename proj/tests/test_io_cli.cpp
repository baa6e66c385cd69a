#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mppctl/cli.hpp"
#include "mppctl/errors.hpp"
#include "mppctl/instances.hpp"
#include "mppctl/io.hpp"

using namespace mppctl;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mppctl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "mppctl_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("model JSON round trip") {
    const auto m = instance_d2(4);
    const auto doc = model_to_json(m);
    CHECK(doc["schema"] == "mpp-control/model/v1");
    const auto back = model_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.states == m.states);
    CHECK(back.time_grid == m.time_grid);
    CHECK(back.rate_modifier == m.rate_modifier);
    CHECK(back.running_cost == m.running_cost);
    CHECK(back.mark_dist == m.mark_dist);
    CHECK(back.C_l == m.C_l);

    auto bad = doc;
    bad["schema"] = "other";
    CHECK_THROWS_AS(model_from_json(bad), ParseError);
    bad = doc;
    bad["rate_modifier"][0].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), ParseError);
    bad = doc;
    bad["mark_dist"][0] = {0.6, 0.6};
    CHECK_THROWS_AS(model_from_json(bad), MalformedDistribution);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ParseError);
}

TEST_CASE("trajectory JSON round trip") {
    const auto m = instance_d2(2);
    const auto t = simulate_reference(m, 0.0, 1, 12, 3);
    const auto doc = trajectory_to_json(m, t);
    CHECK(doc["x0"] == "s1");
    const auto back = trajectory_from_json(m, nlohmann::json::parse(doc.dump()));
    REQUIRE(back.jumps.size() == t.jumps.size());
    for (std::size_t k = 0; k < t.jumps.size(); ++k) {
        CHECK(back.jumps[k].time == t.jumps[k].time);
        CHECK(back.jumps[k].mark == t.jumps[k].mark);
    }
}

TEST_CASE("cli exit codes") {
    const auto dir = scratch();
    const auto model = (dir / "d2.json").string();
    REQUIRE(cli({"instance", "d2", "--out", model}).code == 0);

    SUBCASE("solve writes CSV") {
        const auto csv = (dir / "v.csv").string();
        CHECK(cli({"solve", "--model", model, "--substeps", "1000", "--out", csv}).code == 0);
        const auto text = slurp(csv);
        CHECK(text.rfind("t,state,v\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2001 * 2);
    }
    SUBCASE("verify ito") {
        const auto r = cli({"verify", "ito", "--model", model, "--paths", "1000", "--seed", "7"});
        CHECK(r.code == 0);
        CHECK(nlohmann::json::parse(r.out)["pass"] == true);
    }
    SUBCASE("missing model file") {
        const auto r = cli({"solve", "--model", "missing.json"});
        CHECK(r.code == 2);
        CHECK(r.err.find("missing.json") != std::string::npos);
    }
    SUBCASE("unknown flag is named") {
        const auto r = cli({"solve", "--model", model, "--bogus", "1"});
        CHECK(r.code == 2);
        CHECK(r.err.find("--bogus") != std::string::npos);
    }
    SUBCASE("picard cap reports a check failure") {
        CHECK(cli({"verify", "contraction", "--model", model, "--substeps", "50", "--max-iter", "2"}).code == 1);
    }
    SUBCASE("oracle summary") {
        const auto r = cli({"oracle", "--model", model, "--coarse-cells", "2"});
        CHECK(r.code == 0);
        CHECK(nlohmann::json::parse(r.out)["n_policies"] == 16);
    }
}

TEST_CASE("cli reports are reproducible and thread independent") {
    const auto dir = scratch();
    const auto model = (dir / "d2r.json").string();
    REQUIRE(cli({"instance", "d2", "--out", model}).code == 0);
    const auto a = cli({"verify", "girsanov", "--model", model, "--paths", "4000", "--seed", "3", "--threads", "1"});
    const auto b = cli({"verify", "girsanov", "--model", model, "--paths", "4000", "--seed", "3", "--threads", "4"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    const auto e1 = cli({"evaluate", "--model", model, "--paths", "2000", "--seed", "3"});
    setenv("MPPCTL_SEED", "99", 1);
    const auto e2 = cli({"evaluate", "--model", model, "--paths", "2000", "--seed", "3"});
    const auto e3 = cli({"evaluate", "--model", model, "--paths", "2000", "--seed", "99"});
    unsetenv("MPPCTL_SEED");
    CHECK(e1.out != e2.out);
    CHECK(e2.out == e3.out);
}
