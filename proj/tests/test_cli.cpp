#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <kirchhoff/cli.hpp>

namespace fs = std::filesystem;
using namespace kirchhoff;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run call(std::vector<std::string> args)
{
    args.insert(args.begin(), "kirchhoff");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override
    {
        dir = fs::temp_directory_path() / ("kirchhoff_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        unsetenv("KIRCHHOFF_LOG");
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string at(const std::string& name) const { return (dir / name).string(); }
};

} // namespace

TEST_F(Cli, HelpExitsZero)
{
    auto r = call({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("minimize"), std::string::npos);
}

TEST_F(Cli, UsageErrors)
{
    auto r = call({"minimize", "--dim", "1", "--p", "8.5", "--beta", "1", "--out", at("x.json")});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(at("x.json")));
    EXPECT_EQ(call({"groundstate", "--dim", "1", "--p", "2", "--bogus"}).code, 2);
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"minimize", "--dim", "1", "--p", "2", "--beta", "1", "--out", at("x.json"), "--potential", "cubic"}).code, 2);
    EXPECT_EQ(call({"minimize", "--dim", "1", "--p", "2", "--beta", "1", "--out", at("x.json"), "--grid", "2,10"}).code, 2);
    EXPECT_EQ(call({"verify", "--only", "12"}).code, 2);
    EXPECT_EQ(call({"sweep", "--config", at("a.cfg"), "--out", at("o.csv"), "--set", "novalue"}).code, 2);
}

TEST_F(Cli, MissingConfigNamesPath)
{
    auto r = call({"sweep", "--config", at("missing.cfg"), "--out", at("o.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(at("missing.cfg")), std::string::npos);
    EXPECT_FALSE(fs::exists(at("o.csv")));
}

TEST_F(Cli, BadLogLevel)
{
    setenv("KIRCHHOFF_LOG", "verbose", 1);
    EXPECT_EQ(call({"groundstate", "--dim", "1", "--p", "2"}).code, 2);
    setenv("KIRCHHOFF_LOG", "info", 1);
    EXPECT_EQ(call({"groundstate", "--dim", "1", "--p", "2"}).code, 0);
}

TEST_F(Cli, GroundStateJson)
{
    auto r = call({"groundstate", "--dim", "1", "--p", "2", "--json", at("gs.json"), "--out", at("gs.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(slurp(at("gs.json")));
    EXPECT_NEAR(j["l2_norm_sq"].get<double>(), 2 * std::sqrt(3.0), 1e-4);
    EXPECT_EQ(j["metadata"]["command"], "groundstate");
    EXPECT_EQ(j["metadata"]["version"], version);
    EXPECT_EQ(j["metadata"]["config"]["--p"], "2");
    EXPECT_TRUE(fs::exists(at("gs.csv.meta.json")));
    EXPECT_EQ(slurp(at("gs.csv")).substr(0, 16), "coordinate,value");
    for (const auto& e : fs::directory_iterator(dir))
        EXPECT_NE(e.path().extension(), ".tmp");
}

TEST_F(Cli, ThresholdsJson)
{
    auto r = call({"thresholds", "--dim", "4", "--p", "2", "--b", "2", "--json", at("t.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(slurp(at("t.json")));
    EXPECT_NEAR(j["sobolev_S"].get<double>(), 10.2604, 1e-3);
    EXPECT_NEAR(j["beta_star_critical"].get<double>(), 2 * 10.2604 * 10.2604, 0.05);
    EXPECT_TRUE(j["beta_p"].is_null());
}

TEST_F(Cli, MinimizeIsDeterministic)
{
    const std::vector<std::string> base{"minimize", "--dim", "1", "--p", "2", "--beta", "1", "--grid", "1024,30"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", at("a.json"), "--field", at("a.csv")});
    b.insert(b.end(), {"--out", at("b.json"), "--field", at("b.csv")});
    auto ra = call(a), rb = call(b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(slurp(at("a.csv")), slurp(at("b.csv")));
    auto ja = json::parse(slurp(at("a.json"))), jb = json::parse(slurp(at("b.json")));
    ja["metadata"].erase("config");
    jb["metadata"].erase("config");
    EXPECT_EQ(ja.dump(), jb.dump());
    EXPECT_EQ(ja["status"], "Converged");
    EXPECT_LT(ja["energy"].get<double>(), 0);
    EXPECT_EQ(ja["existence"]["regime"], "MinimizerExists");
}

TEST_F(Cli, SweepWritesColumns)
{
    {
        std::ofstream f(at("s.cfg"));
        f << "dim = 1\nbeta_factor = 2\ndeltas = 0.5, 0.3\nw_nodes = 2049\nrichardson = 0\n";
    }
    auto r = call({"sweep", "--config", at("s.cfg"), "--out", at("s.csv"), "--set", "w_extent=20"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(slurp(at("s.csv")));
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "p,delta,d_measured,d_asym,ratio_d,r_p,eps_p,T,T_sq_over_rp,interaction_scaled_over_rp,"
                      "lambda_eps4,V_term,profile_dist,center_x");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 2);
    auto meta = json::parse(slurp(at("s.csv.meta.json")));
    EXPECT_EQ(meta["config"]["file"]["w_extent"], "20");
    EXPECT_EQ(meta["command"], "sweep");
}

TEST_F(Cli, SweepConfigErrors)
{
    KeyValues kv;
    kv.set("unknown_key", "1");
    EXPECT_THROW(cli::sweep_spec_from(kv), ConfigError);
    KeyValues both;
    both.set("beta", "1");
    both.set("beta_factor", "2");
    EXPECT_THROW(cli::sweep_spec_from(both), ConfigError);
    KeyValues bad;
    bad.set("deltas", "5");
    EXPECT_THROW(cli::sweep_spec_from(bad), ConfigError);
    KeyValues ok;
    ok.set("potential", "harmonic:1:1");
    ok.set("grid", "2048,10");
    auto sp = cli::sweep_spec_from(ok);
    EXPECT_EQ(sp.grid.M, 2048u);
    EXPECT_EQ(sp.V.describe(), "harmonic:1:1");
}

TEST_F(Cli, ParsePotentialAndGrid)
{
    EXPECT_TRUE(cli::parse_potential("zero").is_zero());
    EXPECT_EQ(cli::parse_potential("power:3")(2), 8.0);
    EXPECT_THROW(cli::parse_potential("harmonic:-1"), UsageError);
    EXPECT_THROW(cli::parse_potential("harmonic:1x"), UsageError);
    auto g = cli::parse_grid("513,12.5", 3);
    EXPECT_EQ(g.kind, GridKind::RadialHalfLine);
    EXPECT_EQ(g.M, 513u);
    EXPECT_EQ(g.R, 12.5);
    EXPECT_EQ(cli::parse_grid("64,1", 1).kind, GridKind::FullLine1D);
    EXPECT_THROW(cli::parse_grid("64", 1), UsageError);
}

TEST_F(Cli, QuickVerify)
{
    auto r = call({"verify", "--quick"});
    EXPECT_EQ(r.code, 0) << r.out;
    for (int id : {1, 2, 3, 10, 11})
        EXPECT_NE(r.out.find("[PASS] criterion " + std::string(id < 10 ? " " : "") + std::to_string(id)), std::string::npos) << id;
}
