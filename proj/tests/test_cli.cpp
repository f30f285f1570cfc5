#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrfuq/diagnostics.hpp"
#include "mrfuq/optimize.hpp"

using namespace mrfuq;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    std::string cmd = std::string(MRFUQ_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string data(const std::string& f) { return std::string(MRFUQ_DATA_DIR) + "/" + f; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

std::string header(const std::string& text) { return text.substr(0, text.find('\n')); }

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("mrfuq_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d / name;
}

DiagnosticsScenario fixture_scenario() {
    DiagnosticsScenario s;
    s.p_I = 0.2;
    s.pA = 0.3;
    s.w_c = 1.5;
    s.a = -0.2;
    s.p_II = 0.3;
    return s;
}

} // namespace

TEST(CliBound, IdenticalModelsCollapse) {
    Result r = run("bound --model " + data("medical_base.mrf") + " --alt " + data("medical_base.mrf") +
                   " --qoi indicator:2=0");
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["kl"].get<double>(), 0.0);
    EXPECT_NEAR(j["lower"]["value"].get<double>(), 0.3, 1e-12);
    EXPECT_NEAR(j["upper"]["value"].get<double>(), 0.3, 1e-12);
}

TEST(CliBound, MedicalFixturesMatchClosedForm) {
    DiagnosticsScenario s = fixture_scenario();
    struct Case {
        const char* file;
        BoundReport up, lo;
        double kl;
    };
    std::vector<Case> cases = {
        {"medical_type1.mrf", type1_bounds(s, Direction::upper), type1_bounds(s, Direction::lower), type1_kl(s)},
        {"medical_type2.mrf", type2_bounds_overlap(s, Direction::upper), type2_bounds_overlap(s, Direction::lower),
         type2_kl(s)}};
    for (const auto& c : cases) {
        Result r = run("bound --model " + data("medical_base.mrf") + " --alt " + data(c.file) + " --qoi indicator:2=0");
        ASSERT_EQ(r.code, 0) << c.file;
        auto j = nlohmann::json::parse(r.out);
        EXPECT_NEAR(j["kl"].get<double>(), c.kl, 1e-10) << c.file;
        EXPECT_NEAR(j["upper"]["value"].get<double>(), c.up.value, 1e-8) << c.file;
        EXPECT_NEAR(j["lower"]["value"].get<double>(), c.lo.value, 1e-8) << c.file;
        EXPECT_LE(j["lower"]["value"].get<double>(), j["alt_expectation"].get<double>());
        EXPECT_GE(j["upper"]["value"].get<double>(), j["alt_expectation"].get<double>());
    }
}

TEST(CliBound, EtaModeMatchesGridOracle) {
    Result r = run("bound --model " + data("medical_base.mrf") + " --eta 0.05 --qoi indicator:2=0");
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    double pA = 0.3, best = 1.0, worst = 0.0;
    for (double l : log_grid(1e-4, 1e3, 20000)) {
        best = std::min(best, (std::log(1 - pA + pA * std::exp(l)) + 0.05) / l);
        worst = std::max(worst, -(std::log(1 - pA + pA * std::exp(-l)) + 0.05) / l);
    }
    EXPECT_NEAR(j["upper"]["value"].get<double>(), best, 1e-6);
    EXPECT_NEAR(j["lower"]["value"].get<double>(), worst, 1e-6);
    EXPECT_EQ(j["mode"], "eta");
}

TEST(CliExitCodes, Classes) {
    EXPECT_EQ(run("bound --model " + data("medical_base.mrf") + " --alt " + data("three_nodes.mrf") +
                  " --qoi indicator:2=0").code, 4);
    EXPECT_EQ(run("bound --model " + data("bad_table.mrf") + " --eta 0.1 --qoi state:0").code, 2);
    EXPECT_EQ(run("bound --model /nonexistent.mrf --eta 0.1 --qoi state:0").code, 2);
    EXPECT_EQ(run("bound --model " + data("medical_base.mrf") + " --eta 0.1 --qoi indicator:9=0").code, 2);
    EXPECT_EQ(run("bound --model " + data("medical_base.mrf") + " --qoi state:0").code, 2);
    EXPECT_EQ(run("medical --pA 1.5").code, 2);
    EXPECT_EQ(run("medical --grid 1:0:0.1").code, 2);
    EXPECT_EQ(run("ising band --h 0:1:abc").code, 2);
    EXPECT_EQ(run("ising band --h-offset 1 --h 0:1:0.5").code, 4);
    EXPECT_EQ(run("ising finite --L 30").code, 3);
    EXPECT_EQ(run("ising coarse --gamma 0.2").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(CliBound, ParseErrorCarriesPosition) {
    std::string cmd = std::string(MRFUQ_CLI_PATH) + " bound --model " + data("bad_table.mrf") +
                      " --eta 0.1 --qoi state:0 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    ASSERT_NE(p, nullptr);
    char buf[512] = {};
    std::size_t n = fread(buf, 1, sizeof buf - 1, p);
    pclose(p);
    EXPECT_NE(std::string(buf, n).find("9:11"), std::string::npos) << buf;
}

TEST(CliMedical, SchemaAndCollapse) {
    Result r = run("medical --grid -1:1:0.1");
    ASSERT_EQ(r.code, 0);
    auto rows = csv(r.out);
    ASSERT_EQ(rows.size(), 22u);
    EXPECT_EQ(header(r.out), "parameter,kl,lower,upper,baseline");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double a = std::stod(rows[i][0]);
        DiagnosticsScenario s;
        s.a = a;
        EXPECT_NEAR(std::stod(rows[i][2]), type1_bounds(s, Direction::lower).value, 1e-12);
        EXPECT_NEAR(std::stod(rows[i][3]), type1_bounds(s, Direction::upper).value, 1e-12);
    }
    EXPECT_EQ(rows[11][0], "0");
    EXPECT_NEAR(std::stod(rows[11][2]), 0.3, 1e-9);
    EXPECT_NEAR(std::stod(rows[11][3]), 0.3, 1e-9);
}

TEST(CliIsing, BandSchemaAndDeterminism) {
    fs::path a = scratch("band_a.csv"), b = scratch("band_b.csv"), svg = scratch("band.svg");
    std::string args = "ising band --beta 1.1 --J 1 --a 0.1 --h -2:2:0.02 --method both";
    ASSERT_EQ(run(args + " --out " + a.string() + " --svg " + svg.string()).code, 0);
    ASSERT_EQ(run(args + " --threads 1 --out " + b.string()).code, 0);
    std::string ta = slurp(a);
    EXPECT_EQ(ta, slurp(b));
    EXPECT_EQ(header(ta), "h,m_baseline,m_baseline_minus,m_baseline_plus,lower,upper,method,lambda_star,"
                          "lambda_star_lower");
    auto rows = csv(ta);
    EXPECT_EQ(rows.size(), 1u + 2 * 201);
    EXPECT_EQ(rows[1][0], "-2");
    EXPECT_EQ(rows[201][0], "2");
    EXPECT_EQ(rows[1][6], "theorem");
    EXPECT_EQ(rows[202][6], "norm1");
    EXPECT_EQ(slurp(svg).rfind("<svg", 0), 0u);

    auto ma = nlohmann::json::parse(slurp(a.string() + ".manifest.json"));
    auto mb = nlohmann::json::parse(slurp(b.string() + ".manifest.json"));
    EXPECT_EQ(ma["outputs"][0]["sha256"], mb["outputs"][0]["sha256"]);
    EXPECT_EQ(ma["outputs"].size(), 2u);
    EXPECT_EQ(ma["outputs"][0]["sha256"].get<std::string>().size(), 64u);
    EXPECT_TRUE(ma.contains("wall_time_s"));
    EXPECT_TRUE(ma.contains("seed"));
    fs::remove_all(a.parent_path());
}

TEST(CliIsing, FiniteSandwich) {
    Result r = run("ising finite --d 1 --L 12 --gamma 0.25");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(header(r.out), "method,source,d,L,gamma,beta,h,h_tilde,baseline,perturbed,lower,upper,inside,"
                             "lambda_star,lambda_star_lower,offset");
    auto rows = csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][1], "exact");
        EXPECT_EQ(rows[i][12], "true");
    }
    Result mc = run("ising finite --L 30 --mc --sweeps 50 --seed 3");
    ASSERT_EQ(mc.code, 0);
    EXPECT_EQ(csv(mc.out)[1][1], "mc");
    EXPECT_EQ(mc.out, run("ising finite --L 30 --mc --sweeps 50 --seed 3").out);
}

TEST(CliIsing, CoarseAndLongRange) {
    Result c = run("ising coarse --gamma 0.25 --gamma 0.0625");
    ASSERT_EQ(c.code, 0);
    auto rows = csv(c.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][0], "gamma");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][5], "true");
        EXPECT_EQ(rows[i][8], "true");
    }
    Result l = run("ising longrange --a 1 --gamma 0.25 --L 8");
    ASSERT_EQ(l.code, 0);
    EXPECT_EQ(header(l.out),
              "gamma,tail,constant,kappa_bound,max_abs_kappa,kappa_ok,baseline,perturbed,lower,upper,inside");
    auto lr = csv(l.out);
    EXPECT_EQ(lr[1][5], "true");
    EXPECT_EQ(lr[1][10], "true");
}
