#include <catch2/catch_amalgamated.hpp>

#include "lecam/io.hpp"
#include "lecam/scenario.hpp"
#include "lecam/scenarios.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lecam;
using namespace lecam::testing;
using Catch::Approx;

namespace {

ScenarioConfig smoke_config()
{
    ScenarioConfig c;
    c.scenario = "constant";
    c.n_grid = {1, 2, 4};
    c.discretization = {-6.0, 6.0, 0.5};
    c.stages = 2;
    c.action_step = 0.5;
    return c;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("experiments round-trip through JSON", "[io]")
{
    Rng rng(61);
    for (int rep = 0; rep < 10; ++rep) {
        const auto e = random_experiment(rng, 3, 5, 0.2);
        const auto back = read_experiment(to_json(e));
        CHECK(back.params() == e.params());
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t y = 0; y < 5; ++y)
                CHECK(back.row(t)[y] == Approx(e.row(t)[y]).margin(1e-15));
    }

    const auto numeric = read_experiment(Json::parse(R"({"params": [-1, 0, 0.5], "probs": [[1], [1], [1]]})"));
    CHECK(numeric.params() == std::vector<ParamLabel>{"-1", "0", "0.5"});

    // Rows are renormalized on read, which can move the last bit; beyond
    // 1e-9 of unit mass they are rejected.
    const auto close = read_experiment(Json::parse(R"({"params": ["a"], "probs": [[0.5, 0.5000000001]]})"));
    CHECK(close.row(0)[0] + close.row(0)[1] == Approx(1.0).margin(1e-15));
    CHECK_THROWS(read_experiment(Json::parse(R"({"params": ["a"], "probs": [[0.5, 0.51]]})")));
    CHECK_THROWS(read_experiment(Json::parse(R"({"params": ["a"], "probs": [[-0.5, 1.5]]})")));
    CHECK_THROWS(read_experiment(Json::parse(R"({"params": ["a", "b"], "probs": [[1.0]]})")));
    CHECK_THROWS(read_experiment(Json::parse(R"({"probs": [[1.0]]})")));
}

TEST_CASE("loss parsing", "[io]")
{
    const std::vector<ParamLabel> params{"a", "b"};
    const auto loss = read_loss(Json::parse(R"({"actions": ["x", "y"], "L": [[0, 1], [1, 0]], "M": 1})"), params);
    CHECK(loss.params() == params);
    CHECK(loss.truncated(1, 0) == 1.0);

    const auto named =
        read_loss(Json::parse(R"({"params": ["b", "a"], "actions": ["x"], "L": [[2], [3]], "M": 5})"), params);
    CHECK(named.truncated(named.row_of("a"), 0) == 3.0);

    CHECK_THROWS(read_loss(Json::parse(R"({"actions": ["x"], "L": [[1]], "M": 1})"), params));
    CHECK_THROWS(read_loss(Json::parse(R"({"actions": ["x"], "L": [[1], [-1]], "M": 1})"), params));
    CHECK_THROWS(read_loss(Json::parse(R"({"actions": ["x"], "L": [[1], [1]], "M": 0})"), params));

    const auto again = read_loss(to_json(loss), params);
    CHECK(again.loss() == loss.loss());
    CHECK(again.actions() == loss.actions());
}

TEST_CASE("command-line list parsing", "[io]")
{
    CHECK(split_labels("-1,0,1") == std::vector<ParamLabel>{"-1", "0", "1"});
    CHECK(split_labels("1.0, 0.50") == std::vector<ParamLabel>{"1", "0.5"});
    CHECK(split_labels("a,b") == std::vector<ParamLabel>{"a", "b"});
    CHECK(split_ints("8,16,32") == std::vector<int>{8, 16, 32});
    CHECK_THROWS(split_ints("8,x"));
    CHECK(to_csv({"n", "v"}, {{"1", "0.5"}}) == "n,v\n1,0.5\n");
}

TEST_CASE("config hashing and lattices", "[io][scenario]")
{
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");

    const auto l = lattice(-1.0, 1.0, 0.5);
    CHECK(l == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("scenario configs", "[scenario]")
{
    const ScenarioConfig defaults;
    CHECK(defaults.resolved_schedule().size() == 5);
    CHECK(defaults.action_grid().size() == 33);

    const auto parsed = ScenarioConfig::from_json(Json::parse(R"({"n_grid": [4, 8], "stages": 2, "rprime": 0.3})"));
    CHECK(parsed.n_grid == std::vector<int>{4, 8});
    REQUIRE(parsed.rprime);
    CHECK(*parsed.rprime == 0.3);
    const auto round = ScenarioConfig::from_json(parsed.to_json());
    CHECK(round.to_json() == parsed.to_json());

    CHECK_THROWS(ScenarioConfig::from_json(Json::parse(R"({"n_gird": [4]})")));
    CHECK_THROWS(ScenarioConfig::from_json(Json::parse(R"({"scenario": "poisson"})")).validate());
    // t = 2 leaves (0, 1) at n = 4.
    CHECK_THROWS(ScenarioConfig::from_json(Json::parse(R"({"t_grid": [2], "n_grid": [4]})")).validate());
    CHECK_THROWS(ScenarioConfig::from_json(Json::parse(R"({"discretization": {"lo": -6, "hi": 6, "step": 0}})"))
                     .validate());
}

TEST_CASE("constant scenario smoke run", "[scenario]")
{
    const auto out = run_scenario(smoke_config());
    CHECK(out.passed);
    const auto& r = out.report;
    CHECK(r["passed"].get<bool>());
    CHECK(r["provenance"]["version"] == kVersion);
    for (const auto& row : r["convergence"]["rows"]) {
        CHECK(row["lp_deficiency"].get<double>() == Approx(0.0).margin(1e-9));
        CHECK(row["transport"].get<double>() == Approx(0.0).margin(1e-9));
    }
    const double value = r["limit"]["minimax_value"].get<double>();
    for (const auto& row : r["transfer"]["rows"]) {
        CHECK(row["epsilon"].get<double>() == Approx(0.0).margin(1e-9));
        CHECK(row["exact"].get<double>() == Approx(value).margin(1e-9));
    }
    REQUIRE(r["transfer"]["crossing"].is_number());
    CHECK(r["transfer"]["crossing"].get<int>() == 1);
    CHECK(r["lp"]["max_gap"].get<double>() <= 1e-7);
    CHECK(r["lp"]["non_optimal"].get<int>() == 0);
}

TEST_CASE("R' above the limit value flags no crossing", "[scenario]")
{
    auto c = smoke_config();
    c.rprime = 10.0;
    const auto out = run_scenario(c);
    CHECK(out.report["transfer"]["crossing"].is_null());
    for (const auto& row : out.report["transfer"]["rows"])
        CHECK_FALSE(row["exceeds_rprime"].get<bool>());
}

TEST_CASE("reports are byte-stable", "[scenario]")
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = dir / "lecam_stable_a.json";
    const auto b = dir / "lecam_stable_b.json";
    write_json_file(a, run_scenario(smoke_config()).report);
    write_json_file(b, run_scenario(smoke_config()).report);
    const auto text = slurp(a);
    CHECK(!text.empty());
    CHECK(text.back() == '\n');
    CHECK(text == slurp(b));
    CHECK(read_json_file(a) == Json::parse(text));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
    CHECK_THROWS_AS(read_json_file(a), IoError);
}
