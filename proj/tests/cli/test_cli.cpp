#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "survhsic/io.hpp"
#include "survhsic/scenarios.hpp"

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result run(const std::string& args) {
    fixtures::TempFile err("cli_err");
    const std::string cmd = std::string(SURVHSIC_CLI) + " " + args + " 2>" + err.path();
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    for (std::size_t k; (k = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, k);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = err.read();
    return r;
}

std::string ten_rows() {
    return "x,z,delta\n"
           "0.3,1.2,1\n-1.1,0.4,1\n2.2,3.1,0\n0.9,2.5,1\n-0.2,0.8,0\n"
           "1.4,4.4,1\n-2.0,0.2,1\n0.1,1.9,1\n1.8,3.6,0\n-0.7,2.9,1\n";
}

nlohmann::json drop_runtime(std::string line) {
    auto j = nlohmann::json::parse(line);
    j.erase("runtime_ms");
    return j;
}

}  // namespace

TEST(Cli, TestPrintsJsonRecord) {
    fixtures::TempFile csv("cli_in");
    csv.write(ten_rows());
    const auto r = run("test " + csv.path() + " --method ZHSIC --B 99 --seed 3 --threads 1");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["method"], "ZHSIC");
    EXPECT_EQ(j["n"], 10);
    EXPECT_EQ(j["B"], 99);
    EXPECT_EQ(j["seed"], 3);
    EXPECT_DOUBLE_EQ(j["alpha"].get<double>(), 0.05);
    const double p = j["p"];
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_TRUE(j.contains("statistic"));
    EXPECT_TRUE(j.contains("rank"));
    EXPECT_TRUE(j.contains("rejected"));
    EXPECT_TRUE(j.contains("runtime_ms"));
}

TEST(Cli, RepeatedRunsAgreeExceptRuntime) {
    fixtures::TempFile csv("cli_in"), log("cli_log");
    csv.write(ten_rows());
    const std::string args = "test " + csv.path() + " --method OPT-HSIC --B 199 --seed 11 --out " + log.path();
    const auto a = run(args + " --threads 1"), b = run(args + " --threads 4");
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(drop_runtime(a.out), drop_runtime(b.out));
    const auto logged = log.read();
    EXPECT_EQ(std::count(logged.begin(), logged.end(), '\n'), 2);
}

TEST(Cli, CphOnConstantCovariateFails) {
    fixtures::TempFile csv("cli_in");
    csv.write("1,1.0,1\n1,2.0,1\n1,3.0,0\n");
    const auto r = run("test " + csv.path() + " --method CPH");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("degenerate covariate"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
    fixtures::TempFile csv("cli_in");
    csv.write(ten_rows());
    EXPECT_EQ(run("test " + csv.path() + " --method FOO").code, 2);
    EXPECT_EQ(run("test " + csv.path()).code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("simulate --scenario power-9").code, 2);
}

TEST(Cli, DataErrorsExitOne) {
    fixtures::TempFile csv("cli_in");
    csv.write("x,z,delta\n0.1,1,1\n0.2,oops,1\n");
    const auto r = run("test " + csv.path() + " --method ZHSIC");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
    EXPECT_EQ(run("test /nonexistent.csv --method ZHSIC").code, 1);

    fixtures::TempFile cont("cli_in");
    cont.write(ten_rows());
    const auto two = run("test " + cont.path() + " --method LOGRANK");
    EXPECT_EQ(two.code, 1);
    EXPECT_NE(two.err.find("binary"), std::string::npos) << two.err;
}

TEST(Cli, TransformFullyObservedIsIdentity) {
    fixtures::TempFile csv("cli_in"), out("cli_out");
    csv.write("x,z,delta\n0.5,1,1\n-1,2,1\n3,2.5,1\n");
    const auto r = run("transform " + csv.path() + " --out " + out.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(out.read(), "y,t\n0.5,1\n-1,2\n3,2.5\n");
}

TEST(Cli, TransformAllCensoredUsesLastTime) {
    fixtures::TempFile csv("cli_in");
    csv.write("0.5,1,0\n-1,2,0\n3,2.5,0\n");
    const auto r = run("transform " + csv.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "y,t\n-1,2.5\n0.5,2.5\n3,2.5\n");
}

TEST(Cli, TransformTraceHasOneRowPerEvent) {
    fixtures::TempFile csv("cli_in"), trace("cli_trace");
    auto rng = survhsic::make_stream(21, 0);
    const auto d = survhsic::sample_scenario(survhsic::parse_scenario("type1-5"), 200, rng);
    survhsic::save_csv(csv.path(), d);
    const auto r = run("transform " + csv.path() + " --seed 4 --trace " + trace.path());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = trace.read();
    EXPECT_EQ(static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n')), d.event_count() + 1);
    EXPECT_EQ(static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '\n')), d.size() + 1);
}

TEST(Cli, SimulateWritesLoadableCsv) {
    fixtures::TempFile out("cli_sim");
    const auto r = run("simulate --scenario \"power-3 lambda=1/17\" --n 50 --seed 2 --out " + out.path());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = survhsic::load_csv(out.path());
    EXPECT_EQ(d.size(), 50u);
    const auto again = run("simulate --scenario \"power-3 lambda=1/17\" --n 50 --seed 2");
    EXPECT_EQ(again.out, out.read());
}

TEST(Cli, SweepConfigErrorsNameTheLine) {
    fixtures::TempFile cfg("cli_cfg");
    cfg.write("scenario = type1-1\nmethods =\n");
    const auto r = run("sweep --config " + cfg.path());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, SweepWritesResults) {
    fixtures::TempFile cfg("cli_cfg"), out("cli_results");
    cfg.write("scenario = twosample-1\nn = 20\nreplicates = 4\nB = 19\nmethods = LOGRANK, WHSIC-2S\nout = " +
              out.path() + "\n");
    const auto r = run("sweep --config " + cfg.path() + " --threads 2");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = out.read();
    EXPECT_EQ(text.rfind("scenario,n,method,rate,replicates,seed,failed\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
