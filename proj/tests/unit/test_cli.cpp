#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "attracta/cli.hpp"
#include "attracta/errors.hpp"

using namespace attracta;
using namespace attracta::cli;
using nlohmann::json;

namespace {

const std::string kConfigs = ATTRACTA_CONFIG_DIR;

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

template <class Cmd>
Invocation run(Cmd cmd, const Options& o) {
    std::ostringstream out, err;
    Invocation r;
    r.code = cmd(o, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

Options with_config(const std::string& name) {
    Options o;
    o.config = kConfigs + "/" + name;
    return o;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("attracta_test_" + name);
}

std::string last_line(const std::string& csv) {
    const auto end = csv.rfind("\r\n", csv.size() - 3);
    return csv.substr(end + 2, csv.size() - end - 4);
}

}  // namespace

TEST(CliSimulate, SqrtPairReachesOneOne) {
    const Invocation r = run(cmd_simulate, with_config("example1_sqrt_pair.json"));
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_EQ(r.out.substr(0, 9), "t,x1,x2\r\n");
    std::stringstream row(last_line(r.out));
    std::string t, x, y;
    std::getline(row, t, ',');
    std::getline(row, x, ',');
    std::getline(row, y, ',');
    EXPECT_EQ(std::stod(t), 60.0);
    EXPECT_LT(std::abs(std::stod(x) - 1.0), 1e-3);
    EXPECT_LT(std::abs(std::stod(y) - 1.0), 1e-3);
}

TEST(CliSimulate, ExitCodes) {
    EXPECT_EQ(run(cmd_simulate, with_config("malformed.json")).code, kInvalidConfig);
    Options o = with_config("example1_sqrt_pair.json");
    o.t_end = -1.0;
    const Invocation empty = run(cmd_simulate, o);
    EXPECT_EQ(empty.code, kInvalidConfig);
    EXPECT_NE(empty.err.find("empty integration interval"), std::string::npos);
    EXPECT_EQ(run(cmd_simulate, with_config("unstable_growth.json")).code, kIntegrationFailure);
    EXPECT_EQ(run(cmd_simulate, with_config("does_not_exist.json")).code, kInvalidConfig);
}

TEST(CliSimulate, WritesFileAndResamples) {
    Options o = with_config("example3_bam.json");
    o.t_end = 10.0;
    o.resample = 0.5;
    o.out = temp_file("bam.csv").string();
    ASSERT_EQ(run(cmd_simulate, o).code, kOk);
    std::ifstream in(*o.out, std::ios::binary);
    const std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_NE(csv.find("\r\n0.5,"), std::string::npos);
    EXPECT_NE(csv.find("\r\n10,"), std::string::npos);
}

TEST(CliCertify, NicholsonExample) {
    const Invocation r = run(cmd_certify, with_config("example4_nicholson.json"));
    ASSERT_EQ(r.code, kOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["method"], "nicholson");
    EXPECT_NEAR(j["corollary5"]["lhs"].get<double>(), 0.1, 1e-15);
    EXPECT_NEAR(j["corollary5"]["rhs"].get<double>(), 0.148295, 1e-5);
    EXPECT_EQ(j["comparison_abs_nichol2"]["verdict"], "fail");
    EXPECT_EQ(j["gamma"], json({8.0, 6.25}));
}

TEST(CliCertify, RemarkLinearSystem) {
    const Invocation r = run(cmd_certify, with_config("remark_linear.json"));
    ASSERT_EQ(r.code, kOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["alpha"].get<double>(), 0.95, 1e-12);
    EXPECT_NEAR(j["xi"][0].get<double>(), 20.0, 1e-12);
    EXPECT_NEAR(j["xi"][1].get<double>(), 4.5, 1e-12);
}

TEST(CliCertify, ExitCodes) {
    const Invocation mg = run(cmd_certify, with_config("mackey_glass_patch.json"));
    EXPECT_EQ(mg.code, kInconclusive);
    EXPECT_NE(mg.err.find("open problem"), std::string::npos);
    EXPECT_EQ(run(cmd_certify, with_config("linear_0.6.json")).code, kNotCertified);
    EXPECT_EQ(run(cmd_certify, with_config("malformed.json")).code, kInvalidConfig);

    Options wrong = with_config("example1_sqrt_pair.json");
    wrong.method = "nicholson";
    EXPECT_EQ(run(cmd_certify, wrong).code, kInconclusive);
}

TEST(CliCertify, BorderlineIsInconclusive) {
    const auto path = temp_file("borderline.json");
    std::ofstream(path) << R"J({
        "dimension": 2,
        "nonlinearity": {"expr": ["x1", "0.5*x2"]},
        "lipschitz": {"L": [[1, 0], [0, 0.5]], "equilibrium": [0, 0]},
        "delay": {"kind": "point", "tau": 1},
        "history": {"kind": "constant", "values": [0, 0]}
    })J";
    Options o;
    o.config = path.string();
    const Invocation r = run(cmd_certify, o);
    EXPECT_EQ(r.code, kInconclusive) << r.out << r.err;
}

TEST(CliCertify, DeterministicAndSeeded) {
    const Invocation a = run(cmd_certify, with_config("example3_bam.json"));
    const Invocation b = run(cmd_certify, with_config("example3_bam.json"));
    EXPECT_EQ(a.out, b.out);
    Options o = with_config("example3_bam.json");
    o.seed = 7;
    const json j = json::parse(run(cmd_certify, o).out);
    EXPECT_EQ(j["sampling"]["seed"], 7);
}

TEST(CliSweep, GridParsing) {
    EXPECT_EQ(parse_grid("0.5,1,2"), (std::vector<double>{0.5, 1.0, 2.0}));
    EXPECT_EQ(parse_grid("1:3:3"), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ(parse_grid("4:9:1"), (std::vector<double>{4.0}));
    EXPECT_THROW(parse_grid("1,,2"), InvalidConfig);
    EXPECT_THROW(parse_grid("1:2"), InvalidConfig);
    EXPECT_THROW(parse_grid("1:2:0"), InvalidConfig);
}

TEST(CliSweep, NicholsonDelayIndependence) {
    Options o = with_config("example4_nicholson.json");
    o.grid = "0.5,1,2,5,10,25";
    o.jobs = 3;
    const Invocation r = run(cmd_sweep, o);
    ASSERT_EQ(r.code, kOk) << r.err;
    std::stringstream rows(r.out);
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "index,family,parameter,horizon,converged,final_error,time_to_tolerance,status\r");
    int n = 0;
    while (std::getline(rows, line)) {
        EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(n));
        EXPECT_NE(line.find(",true,"), std::string::npos) << line;
        ++n;
    }
    EXPECT_EQ(n, 6);
}

TEST(CliSweep, SingleRowMatchesSimulate) {
    Options o = with_config("example1_sqrt_pair.json");
    const Invocation sweep = run(cmd_sweep, o);
    ASSERT_EQ(sweep.code, kOk);
    EXPECT_NE(sweep.out.find("\r\n0,constant,1,200,true,"), std::string::npos) << sweep.out;

    o.t_end = 200.0;
    const Invocation sim = run(cmd_simulate, o);
    std::stringstream row(last_line(sim.out));
    std::string t, x;
    std::getline(row, t, ',');
    std::getline(row, x, ',');
    EXPECT_LT(std::abs(std::stod(x) - 1.0), 1e-3);
}

TEST(CliSweep, UncertifiedSystemRecordsRows) {
    Options o = with_config("linear_0.6.json");
    o.family = "uniform";
    o.grid = "0.5:2:4";
    const Invocation r = run(cmd_sweep, o);
    EXPECT_EQ(r.code, kOk);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(CliSweep, ByteIdenticalAcrossJobCounts) {
    Options o = with_config("example2_power_pair.json");
    o.grid = "0.5,1,1.5,2";
    o.jobs = 1;
    const Invocation a = run(cmd_sweep, o);
    o.jobs = 4;
    const Invocation b = run(cmd_sweep, o);
    EXPECT_EQ(a.out, b.out);
    o.timing = true;
    EXPECT_NE(run(cmd_sweep, o).out.find(",wall_time\r\n"), std::string::npos);
}

TEST(CliReproduce, ExampleFour) {
    Options o;
    o.example = "example4";
    o.jobs = 3;
    o.out = temp_file("example4.json").string();
    const Invocation r = run(cmd_reproduce, o);
    EXPECT_EQ(r.code, kOk) << r.out;
    EXPECT_NE(r.out.find("PASS  corollary5 holds"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS  abs_nichol2 fails"), std::string::npos);
    std::ifstream in(*o.out);
    const json report = json::parse(in);
    EXPECT_EQ(report["runs"].size(), 3u);
    for (const auto& run : report["runs"]) EXPECT_TRUE(run["converged"].get<bool>());
    EXPECT_FALSE(report.contains("wall_time"));
    EXPECT_EQ(report["certificate"]["verdict"], "certified");
}

TEST(CliReproduce, RemarkTable) {
    Options o;
    o.example = "remark_L";
    o.jobs = 3;
    const Invocation r = run(cmd_reproduce, o);
    EXPECT_NE(r.out.find("PASS  certificate"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS  column-sum test fails"), std::string::npos) << r.out;
    // Exit status mirrors the table.
    EXPECT_EQ(r.code == kOk, r.out.find("FAIL") == std::string::npos) << r.out;
}

TEST(CliReproduce, UnknownExample) {
    Options o;
    o.example = "example9";
    EXPECT_EQ(run(cmd_reproduce, o).code, kInvalidConfig);
}
