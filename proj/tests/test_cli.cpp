#include "chronocalc/catalog.hpp"
#include "chronocalc/cli.hpp"
#include "chronocalc/errors.hpp"
#include "chronocalc/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chronocalc;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

io::Json json_of(const Outcome& r) { return io::Json::parse(r.out); }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "chronocalc_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST(Io, ParsePoint) {
    EXPECT_EQ(io::parse_point("0, 1,-0.5").coords(), (VectorXd{{0.0, 1.0, -0.5}}));
    EXPECT_THROW(io::parse_point("1,,2"), ParseError);
    EXPECT_THROW(io::parse_point("1,a"), ParseError);
    EXPECT_THROW(io::parse_point(""), ParseError);
}

TEST(Io, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789}) {
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
}

TEST(Io, FieldDocumentsRoundTrip) {
    for (const auto& f : {catalog::heisenberg_v1(), catalog::unicycle_steer(), testkit::piecewise_field()}) {
        const VectorField back = io::field_from_json(io::field_to_json(f));
        ASSERT_EQ(back.pieces().size(), f.pieces().size());
        for (std::size_t i = 0; i < f.pieces().size(); ++i) EXPECT_EQ(back.pieces()[i].map, f.pieces()[i].map);
        EXPECT_EQ(back.is_autonomous(), f.is_autonomous());
    }
    const auto sys = io::system_from_json(io::system_to_json(catalog::system("brockett")));
    EXPECT_EQ(sys.size(), 2u);
    EXPECT_THROW(io::field_from_json(io::Json::parse(R"({"dim": 2})")), ParseError);
    EXPECT_THROW(io::field_from_json(io::Json::parse(R"({"dim": 2, "components": [[{"coef": 1, "exps": [1]}], []]})")),
                 ParseError);
}

TEST(Io, Observables) {
    EXPECT_EQ(io::load_observable("identity", 3).dim_out(), 3);
    const Observable x2 = io::load_observable("x2", 3);
    EXPECT_EQ(x2(ChartPoint({4.0, 5.0, 6.0}))[0], 5.0);
    EXPECT_THROW(io::load_observable("x4", 3), IndexError);
    EXPECT_THROW(io::load_observable("x0", 3), IndexError);
    const fs::path p = scratch("obs.json");
    write(p, R"({"dim": 2, "components": [[{"coef": 2, "exps": [1, 1]}]], "max_derivative_order": 3})");
    const Observable o = io::load_observable(p.string(), 2);
    EXPECT_EQ(o.max_derivative_order, 3);
    EXPECT_EQ(o(ChartPoint({2.0, 3.0}))[0], 12.0);
}

TEST(Io, SchedulesRoundTripThroughCsvAndJson) {
    const ControlSchedule s({{0, 1, 0.1}, {1, -1, 1.0 / 3.0}});
    const std::string csv = io::schedule_to_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "segment,field_index,sign,duration");
    EXPECT_NE(csv.find("2,2,-1,0.33333333333333331"), std::string::npos);
    EXPECT_EQ(io::schedule_from_csv(csv), s);
    EXPECT_EQ(io::schedule_from_json(io::schedule_to_json(s)), s);
    EXPECT_THROW(io::schedule_from_csv("bad header\n"), ParseError);
    EXPECT_THROW(io::schedule_from_csv("segment,field_index,sign,duration\n1,1,1\n"), ParseError);
    EXPECT_THROW(io::schedule_from_csv("segment,field_index,sign,duration\n1,1,3,0.1\n"), ValidationError);
}

TEST(Io, OrderEstimateCsv) {
    OrderEstimate e = fit_order({0.5, 0.25}, {0.25, 0.0625});
    const std::string csv = io::order_estimate_to_csv(e, {0.5, std::nullopt});
    EXPECT_EQ(csv, "t,norm,bound\n0.5,0.25,0.5\n0.25,0.0625,\n");
    EXPECT_DOUBLE_EQ(io::order_estimate_to_json(e)["slope"].get<double>(), 2.0);
}

TEST(Cli, FlowExample) {
    const Outcome r = run({"flow", "--system", "heisenberg", "--field", "1", "--t", "1", "--q", "0,1,0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto end = json_of(r)["endpoint"].get<std::vector<double>>();
    EXPECT_NEAR(end[0], 1.0, 1e-12);
    EXPECT_NEAR(end[1], 1.0, 1e-12);
    EXPECT_NEAR(end[2], -0.5, 1e-12);
}

TEST(Cli, RankExample) {
    const Outcome r = run({"rank", "--system", "heisenberg", "--q", "0,0,0", "--max-degree", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json_of(r)["numerical_rank"].get<int>(), 3);
}

TEST(Cli, ValidationFailuresExitTwo) {
    const Outcome bad_index = run({"flow", "--system", "heisenberg", "--field", "9", "--t", "1", "--q", "0,1,0"});
    EXPECT_EQ(bad_index.code, 2);
    EXPECT_NE(bad_index.err.find("V9"), std::string::npos);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"flow", "--system", "heisenberg", "--t", "1", "--q", "0,1,0", "--bogus"}).code, 2);
    EXPECT_EQ(run({"flow", "--system", "nosuch", "--t", "1", "--q", "0,1"}).code, 2);
    EXPECT_EQ(run({"flow", "--system", "heisenberg", "--t", "1", "--q", "0,1"}).code, 2);
    EXPECT_EQ(run({"volterra", "--system", "rotation2d", "--q", "1,0", "--k", "5"}).code, 2);
    EXPECT_EQ(run({"order-probe", "--system", "rotation2d", "--q", "1,0", "--levels", "17"}).code, 2);
    EXPECT_EQ(run({"bracket", "--system", "heisenberg", "--q", "0,0,0", "--expr", "[V1,"}).code, 2);
    EXPECT_EQ(run({"plan", "--system", "heisenberg", "--q0", "0,0,0", "--target", "0,0,1", "--max-degree", "1"}).code,
              2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, BlowUpExitsThree) {
    const fs::path p = scratch("blowup.json");
    write(p, R"({"dim": 1, "components": [[{"coef": 1, "exps": [2]}]]})");
    const Outcome r = run({"flow", "--system", p.string(), "--t", "2", "--q", "1"});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, CsvOutputHasFixedHeader) {
    const Outcome r = run({"order-probe", "--system", "rotation2d", "--q", "0.6,0.8", "--k", "2", "--observable", "x1",
                       "--format", "csv", "--levels", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,norm,bound");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(Cli, EverySubcommandRuns) {
    const std::vector<std::vector<std::string>> cmds{
        {"volterra", "--system", "rotation2d", "--q", "1,0", "--k", "3", "--levels", "4"},
        {"order-probe", "--system", "heisenberg", "--residual", "flow-bracket", "--q", "0.1,0.2,0", "--expr",
         "[[V1,V2],V1]"},
        {"order-probe", "--system", "heisenberg", "--residual", "inverse-expansion", "--q", "0.1,0.2,0"},
        {"bracket", "--system", "brockett", "--q", "1,2,3", "--expr", "[V1,V2]"},
        {"flow-bracket", "--system", "heisenberg", "--q", "0,0,0", "--levels", "4"},
        {"param-deriv", "--system", "heisenberg", "--q", "0.1,0.2,0.3", "--t", "0.5"},
    };
    for (const auto& c : cmds) {
        for (const char* fmt : {"json", "csv"}) {
            auto args = c;
            args.insert(args.end(), {"--format", fmt});
            const Outcome r = run(args);
            EXPECT_EQ(r.code, 0) << c.front() << ": " << r.err;
            EXPECT_FALSE(r.out.empty());
        }
    }
    const Outcome b = run({"bracket", "--system", "brockett", "--q", "1,2,3"});
    EXPECT_EQ(json_of(b)["value"].get<std::vector<double>>(), (std::vector<double>{0, 0, 2}));
}

TEST(Cli, PlanThenSimulateRoundTrip) {
    const fs::path plan_json = scratch("plan.json");
    const fs::path plan_csv = scratch("plan.csv");
    const std::vector<std::string> plan{"plan", "--system", "heisenberg", "--q0", "0,0,0", "--target", "0.02,-0.01,0.03"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = plan;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    ASSERT_EQ(run(with({"--output", plan_json.string()})).code, 0);
    ASSERT_EQ(run(with({"--output", plan_csv.string(), "--format", "csv"})).code, 0);
    const io::Json reported = io::read_json_file(plan_json.string());
    const auto endpoint = reported["endpoint"].get<std::vector<double>>();
    for (const auto& file : {plan_json, plan_csv}) {
        const Outcome sim = run({"simulate", "--system", "heisenberg", "--q0", "0,0,0", "--schedule", file.string()});
        ASSERT_EQ(sim.code, 0) << sim.err;
        const auto replay = json_of(sim)["endpoint"].get<std::vector<double>>();
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(replay[i], endpoint[i], 1e-9);
    }
}

TEST(Cli, DeterministicOutput) {
    const std::vector<std::string> probe{"order-probe", "--system", "heisenberg", "--q", "1,-0.5,0.2", "--k", "2",
                                         "--observable", "x3"};
    EXPECT_EQ(run(probe).out, run(probe).out);
    const std::vector<std::string> plan{"plan", "--system", "brockett", "--q0", "0,0,0", "--target", "0.05,0,0.02"};
    EXPECT_EQ(run(plan).out, run(plan).out);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    const fs::path dir = scratch("envdir");
    fs::remove_all(dir);
    ::setenv(cli::kOutputDirEnv, dir.string().c_str(), 1);
    const Outcome r = run({"rank", "--system", "heisenberg", "--q", "0,0,0", "--output", "rank.json"});
    ::unsetenv(cli::kOutputDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(io::read_json_file((dir / "rank.json").string())["numerical_rank"].get<int>(), 3);
}
