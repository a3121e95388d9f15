#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "nscop/cli.hpp"
#include "nscop/market_data.hpp"
#include "test_util.hpp"

using namespace nscop;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string error_kind(const Result& r) { return json::parse(r.err)["error"]["kind"]; }

}  // namespace

TEST(Cli, TheoryReportsJson) {
  auto r = call({"theory", "--lambda1", "2", "--lambda2", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_NEAR(j["expected_overlap"].get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(j["eta1"].get<double>(), 1.5, 1e-10);
  EXPECT_NEAR(j["gamma"].get<double>(), 0.75, 1e-10);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call({}).code, 2);
  auto bad = call({"frobnicate"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(error_kind(bad), "UsageError");
  EXPECT_EQ(call({"theory", "--lambda1", "x", "--lambda2", "1"}).code, 2);

  auto dom = call({"theory", "--lambda1", "0", "--lambda2", "1"});
  EXPECT_EQ(dom.code, 1);
  EXPECT_EQ(error_kind(dom), "InvalidParameter");

  auto bad_csv = nscop::test::write_file("bad.csv", "time,price\n0,1\n0,1\n");
  auto mal = call({"pair", "--a", bad_csv.string(), "--b", bad_csv.string()});
  EXPECT_EQ(mal.code, 1);
  EXPECT_EQ(error_kind(mal), "MalformedInput");
}

TEST(Cli, SimulatePairEstimatePipeline) {
  const auto prefix = nscop::test::temp_path("run").string();
  auto s = call({"--seed", "5", "simulate", "--family", "clayton", "--param", "2", "--n", "600",
                 "--out", prefix});
  ASSERT_EQ(s.code, 0) << s.err;
  auto truth = json::parse(std::ifstream(prefix + "_truth.json"));
  EXPECT_DOUBLE_EQ(truth["tau"].get<double>(), 0.5);
  EXPECT_EQ(truth["seed"].get<int>(), 5);
  EXPECT_EQ(load_ticks(prefix + "_asset1.csv").size(), 600u);

  // global flags are accepted after the subcommand too
  auto s2 = call({"simulate", "--family", "clayton", "--param", "2", "--n", "600", "--out",
                  prefix + "b", "--seed", "5"});
  ASSERT_EQ(s2.code, 0) << s2.err;
  std::ifstream f1(prefix + "_asset1.csv"), f2(prefix + "b_asset1.csv");
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  EXPECT_EQ(b1.str(), b2.str());

  const auto paired = prefix + "_paired.csv";
  auto p = call({"pair", "--a", prefix + "_asset1.csv", "--b", prefix + "_asset2.csv", "--scheme", "a0",
                 "--out", paired});
  ASSERT_EQ(p.code, 0) << p.err;
  auto back = load_paired_csv(paired);
  EXPECT_EQ(back.scheme, PairingScheme::A0);
  EXPECT_EQ(back.raw1, 600u);

  auto e = call({"estimate", "--paired", paired, "--method", "kendall"});
  ASSERT_EQ(e.code, 0) << e.err;
  const double tau_hat = json::parse(e.out)["point"];
  EXPECT_GT(tau_hat, 0.1);
  EXPECT_LT(tau_hat, 0.5);

  auto c = call({"estimate", "--paired", paired, "--method", "corrected-corr"});
  ASSERT_EQ(c.code, 0) << c.err;
  auto cj = json::parse(c.out);
  EXPECT_LE(cj["interval"]["lo"].get<double>(), cj["point"].get<double>());

  auto sel = call({"select-copula", "--paired", paired, "--families", "gaussian,clayton"});
  ASSERT_EQ(sel.code, 0) << sel.err;
  EXPECT_EQ(sel.out.rfind("rank,family", 0), 0u);

  auto iv = call({"intervals", "--paired", paired, "--method", "elliptical"});
  ASSERT_EQ(iv.code, 0) << iv.err;
  auto ij = json::parse(iv.out);
  EXPECT_LT(ij["lo"].get<double>(), ij["hi"].get<double>());

  auto nocurve = call({"intervals", "--tau-hat", "0.3", "--method", "quad"});
  EXPECT_EQ(nocurve.code, 2);
}

TEST(Cli, PairedCsvRoundTrip) {
  PairedSeries p;
  p.t1 = {2, 5, 9};
  p.t2 = {3, 4, 7};
  p.x = {0.1, 0.2, 0.15};
  p.y = {1.0, 1.1, 0.9};
  p.raw1 = p.raw2 = 4;
  std::ostringstream os;
  write_paired_csv(os, p);
  auto path = nscop::test::write_file("p.csv", os.str());
  auto q = load_paired_csv(path);
  EXPECT_EQ(q.t1, p.t1);
  EXPECT_EQ(q.t2, p.t2);
  EXPECT_EQ(q.x, p.x);
  EXPECT_EQ(q.y, p.y);
  EXPECT_EQ(q.raw1, 4u);
}
