#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "s2r/cli/app.hpp"
#include "s2r/fid/feature_file.hpp"
#include "support.hpp"

using namespace s2r;
using namespace s2r::cli;
using s2r::testing::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sim2real");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json report(const CliRun& r) {
  EXPECT_EQ(r.code, 0) << r.err;
  return json::parse(r.out);
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

// Straight northbound centerline and a trajectory on it.
void write_track_files(const TempDir& dir, double east_shift = 0.0, const std::string& stem = "run") {
  std::string c = "x,y\n", t = "t,x,y\n";
  for (int i = 0; i <= 100; ++i) {
    c += "500000," + std::to_string(4000000 + i) + "\n";
    t += std::to_string(0.1 * i) + "," + std::to_string(500000 + east_shift) + "," + std::to_string(4000000 + i) + "\n";
  }
  write_text(dir / "center.csv", c);
  write_text(dir / (stem + ".csv"), t);
}

}  // namespace

TEST(Config, DefaultsFileThenFlags) {
  const std::vector<Key> keys = {{"n", Kind::kInt, 3, "", checks::positive()},
                                 {"x", Kind::kNumber, 0.5, "", {}},
                                 {"name", Kind::kString, "a", "", {}},
                                 {"list", Kind::kNumberList, json::array(), "", {}},
                                 {"opt", Kind::kNumber, nullptr, "", {}}};
  json cfg = resolve_config(keys, std::nullopt, {});
  EXPECT_EQ(cfg["n"], 3);
  EXPECT_TRUE(cfg["opt"].is_null());

  TempDir dir;
  write_text(dir / "c.json", R"({"n": 5, "x": 2, "name": "file"})");
  cfg = resolve_config(keys, (dir / "c.json").string(), {{"name", "flag"}, {"list", "1, 2.5,3"}});
  EXPECT_EQ(cfg["n"], 5);
  EXPECT_TRUE(cfg["x"].is_number_float());
  EXPECT_EQ(cfg["x"], 2.0);
  EXPECT_EQ(cfg["name"], "flag");
  EXPECT_EQ(cfg["list"], json::parse("[1.0, 2.5, 3.0]"));
  // key order follows the declaration, not the file
  std::vector<std::string> order;
  for (const auto& [k, v] : cfg.items()) order.push_back(k);
  EXPECT_EQ(order, (std::vector<std::string>{"n", "x", "name", "list", "opt"}));
}

TEST(Config, CollectsEveryProblem) {
  const std::vector<Key> keys = {{"n", Kind::kInt, 3, "", checks::positive()}, {"b", Kind::kBool, false, "", {}}};
  TempDir dir;
  write_text(dir / "c.json", R"({"bogus": 1, "other": 2, "n": "three"})");
  try {
    resolve_config(keys, (dir / "c.json").string(), {{"b", "maybe"}, {"zzz", "1"}});
    FAIL();
  } catch (const ConfigError& e) {
    const auto& p = e.problems();
    ASSERT_EQ(p.size(), 5u) << e.what();
    const std::string all = e.what();
    for (const char* word : {"'bogus'", "'other'", "'zzz'", "'n'", "--b"}) {
      EXPECT_NE(all.find(word), std::string::npos) << word;
    }
  }
  EXPECT_THROW(resolve_config(keys, std::nullopt, {{"n", "-2"}}), ConfigError);
  EXPECT_THROW(resolve_config(keys, std::nullopt, {{"n", "2.5"}}), ConfigError);
  write_text(dir / "bad.json", "{ nope");
  EXPECT_THROW(resolve_config(keys, (dir / "bad.json").string(), {}), ConfigError);
  write_text(dir / "arr.json", "[1]");
  EXPECT_THROW(resolve_config(keys, (dir / "arr.json").string(), {}), ConfigError);
  EXPECT_THROW(resolve_config(keys, (dir / "missing.json").string(), {}), ConfigError);
}

TEST(Config, RoundFloats) {
  json j = json::parse(R"({"a": 0.123456789, "b": [1234567.89, 3], "c": {"d": 1e-20}})");
  j["nan"] = std::nan("");
  round_floats(j);
  EXPECT_EQ(j["a"].dump(), "0.123457");
  EXPECT_EQ(j["b"][0].get<double>(), 1234570.0);
  EXPECT_TRUE(j["b"][1].is_number_integer());
  EXPECT_EQ(j["c"]["d"].get<double>(), 1e-20);
  EXPECT_TRUE(j["nan"].is_null());
  EXPECT_EQ(format_g6(2.0 / 3.0), "0.666667");
}

TEST(Help, EnumeratesEveryKeyWithItsDefault) {
  const auto all = all_commands();
  for (const auto& c : all) {
    const CliRun r = invoke({c.name, "--help"});
    EXPECT_EQ(r.code, 0) << c.name;
    for (const auto& k : c.keys) {
      EXPECT_NE(r.out.find("--" + k.name), std::string::npos) << c.name << " --" << k.name;
      EXPECT_NE(r.out.find("default: " + default_text(k) + "]"), std::string::npos) << c.name << " " << k.name;
    }
    EXPECT_NE(r.out.find("--config"), std::string::npos);
    EXPECT_NE(r.out.find("--threads"), std::string::npos);
  }
  const CliRun top = invoke({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const auto& c : all) EXPECT_NE(top.out.find(c.name), std::string::npos) << c.name;
  EXPECT_NE(top.out.find("Exit codes"), std::string::npos);
}

TEST(ExitCodes, UsageAndValidation) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"fid", "--no-such-flag", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"fid", "--threads", "0"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--version"}).code, kExitOk);

  TempDir dir;
  EXPECT_EQ(invoke({"fid", "--a", (dir / "nope").string(), "--b", (dir / "nope").string()}).code, kExitValidation);
  EXPECT_EQ(invoke({"fid", "--a", "x"}).code, kExitValidation);  // b is required
  EXPECT_EQ(invoke({"fid", "--a", "x", "--b", "y", "--d", "0"}).code, kExitValidation);

  // f32 storage turns 1e200 into inf, which is rejected on read
  fid::FeatureMatrix big;
  big.values.resize(4, 2);
  big.values << 1e200, 0, -1e200, 1, 1e200, 2, -1e200, 3;
  fid::write_feature_file(dir / "big.s2rf", big);
  const CliRun r = invoke({"fid", "--a", (dir / "big.s2rf").string(), "--b", (dir / "big.s2rf").string()});
  EXPECT_EQ(r.code, kExitValidation) << r.out << r.err;
  EXPECT_NE(r.err.find("non-finite"), std::string::npos);
}

TEST(Fid, SameDirectoryIsNearZeroAndReportIsDeterministic) {
  TempDir dir;
  const CliRun s = invoke({"synth", "--out_dir", dir.path().string(), "--frames", "12", "--width", "202", "--height", "155",
                     "--style", "soft"});
  const json sj = report(s);
  const std::string images = sj["result"]["members"][0]["dir"];
  const CliRun a = invoke({"fid", "--a", images, "--b", images, "--d", "16", "--seed", "1"});
  const json rep = report(a);
  EXPECT_LT(rep["result"]["fid"].get<double>(), 1e-3);
  EXPECT_EQ(rep["tool"], "sim2real");
  EXPECT_EQ(rep["command"], "fid");
  EXPECT_EQ(rep["config"]["d"], 16);
  EXPECT_FALSE(rep["config"].contains("threads"));
  const CliRun again = invoke({"fid", "--a", images, "--b", images, "--d", "16", "--seed", "1", "--threads", "3"});
  EXPECT_EQ(a.out, again.out);

  // feature-file input goes through the same path
  fid::FeatureMatrix m;
  m.values = Eigen::MatrixXd::Random(40, 3);
  fid::write_feature_file(dir / "f.s2rf", m);
  const json ff = report(invoke({"fid", "--a", (dir / "f.s2rf").string(), "--b", (dir / "f.s2rf").string()}));
  EXPECT_LT(std::abs(ff["result"]["fid"].get<double>()), 1e-9);
  EXPECT_EQ(ff["result"]["d"], 3);
}

TEST(SelectLambda, PaperScoresJsonAndCsv) {
  const std::vector<std::string> args = {"select-lambda", "--scores", "1=0.439,2=0.423,3=0.451,4=0.403"};
  EXPECT_EQ(report(invoke(args))["result"]["selected"], "3");
  auto csv_args = args;
  csv_args.push_back("--csv");
  const CliRun c = invoke(csv_args);
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out, "lambda,mean_fsim,selected\n1,0.439,false\n2,0.423,false\n3,0.451,true\n4,0.403,false\n");
  EXPECT_EQ(invoke({"select-lambda"}).code, kExitValidation);
  EXPECT_EQ(invoke({"select-lambda", "--scores", "1=abc"}).code, kExitValidation);
}

TEST(TrajRmse, ZeroForTheCenterlineItself) {
  TempDir dir;
  write_track_files(dir);
  const json rep = report(invoke({"traj-rmse", "--trajectories", (dir / "run.csv").string(), "--centerline",
                               (dir / "center.csv").string(), "--sections", "first:0:50,second:50:100"}));
  const auto& s = rep["result"]["runs"][0]["sections"];
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0]["rmse_x"].get<double>(), 0.0);
  EXPECT_EQ(s[0]["rmse_y"].get<double>(), 0.0);
  EXPECT_EQ(s[1]["name"], "second");
  EXPECT_EQ(invoke({"traj-rmse", "--trajectories", (dir / "run.csv").string(), "--centerline",
                 (dir / "center.csv").string(), "--sections", "far:200:300"})
                .code,
            kExitValidation);
}

TEST(Report, MergesIntoATableShape) {
  TempDir dir;
  write_track_files(dir, 0.0, "cwd");
  write_track_files(dir, 1.0, "cwod");
  const std::string secs = "section_1:0:25,section_2:25:50,section_3:50:75,section_4:75:100";
  for (const char* stem : {"cwd", "cwod"}) {
    const CliRun r = invoke({"traj-rmse", "--trajectories", (dir / (std::string(stem) + ".csv")).string(), "--centerline",
                       (dir / "center.csv").string(), "--sections", secs, "--out",
                       (dir / (std::string(stem) + "_rmse.json")).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
  }
  const CliRun rest = invoke({"restore-eval", "--trajectories", (dir / "cwod.csv").string(), "--centerline",
                        (dir / "center.csv").string(), "--out", (dir / "restore.json").string()});
  ASSERT_EQ(rest.code, 0) << rest.err;

  const json rep = report(invoke({"report", "--inputs",
                               (dir / "cwd_rmse.json").string() + "," + (dir / "cwod_rmse.json").string() + "," +
                                   (dir / "restore.json").string(),
                               "--labels", "CwD,Cw/oD,restore"}));
  const auto& res = rep["result"];
  EXPECT_EQ(res["columns"], json::parse(R"(["section_1","section_2","section_3","section_4"])"));
  ASSERT_EQ(res["rows"].size(), 3u);
  EXPECT_EQ(res["rows"][1]["label"], "Cw/oD");
  EXPECT_EQ(res["rows"][1]["sections"]["section_3"]["x"].get<double>(), 1.0);
  EXPECT_EQ(res["rows"][0]["sections"]["section_3"]["y"].get<double>(), 0.0);
  EXPECT_TRUE(res["rows"][0]["success_rate"].is_null());
  EXPECT_EQ(res["rows"][2]["success_rate"].get<double>(), 0.0);  // never returned: 1 m off throughout

  const CliRun csv = invoke({"report", "--inputs", (dir / "cwd_rmse.json").string(), "--csv"});
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')),
            "label,section_1_x,section_1_y,section_2_x,section_2_y,section_3_x,section_3_y,section_4_x,section_4_y,"
            "success_rate");

  EXPECT_EQ(invoke({"report"}).code, kExitValidation);
  EXPECT_EQ(invoke({"report", "--inputs", (dir / "center.csv").string()}).code, kExitValidation);
}

TEST(Config, FileDrivesACommand) {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"scores": ["a=0.2", "b=0.9"]})");
  EXPECT_EQ(report(invoke({"select-lambda", "--config", (dir / "cfg.json").string()}))["result"]["selected"], "b");
  write_text(dir / "typo.json", R"({"score": ["a=0.2"]})");
  const CliRun r = invoke({"select-lambda", "--config", (dir / "typo.json").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("unknown key 'score'"), std::string::npos);
}

TEST(Binary, ExitCodesThroughTheShell) {
  const std::string exe = S2R_CLI_PATH;
  EXPECT_EQ(s2r::testing::run_command("'" + exe + "' --version").exit_code, 0);
  EXPECT_EQ(s2r::testing::run_command("'" + exe + "' 2>/dev/null").exit_code, 64);
  EXPECT_EQ(s2r::testing::run_command("'" + exe + "' fid --a /nonexistent --b /nonexistent 2>/dev/null").exit_code, 1);
  const auto r = s2r::testing::run_command("'" + exe + "' select-lambda --scores 1=0.439,2=0.423,3=0.451,4=0.403");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.output)["result"]["selected"], "3");
}
