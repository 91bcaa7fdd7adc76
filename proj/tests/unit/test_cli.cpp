#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bdris/config.hpp"
#include "bdris/sweep.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string output; // stdout followed by stderr
};

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "bdris_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const std::string &name, const std::string &text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

Outcome cli(const std::string &args) {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + BDRIS_CLI_PATH + "\" " + args +
                          " >\"" + out.string() + "\" 2>\"" + err.string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.output = slurp(out) + slurp(err);
  return o;
}

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty())
      out.push_back(line);
  return out;
}

const char *kRunConfig = R"([scenario]
N = 4
K_r = 2
K_t = 2
M = 8
mode = hybrid
arch = single
seed = 3
)";

const char *kSweepConfig = R"([scenario]
N = 2
K_r = 1
K_t = 1
M = 4
G = 2
max_outer = 30
[sweep]
var = P_dbm
values = 0, 5, 10
trials = 3
base_seed = 11
cases = hybrid:full, hybrid:single
)";

TEST(Cli, RunPrintsOneSummaryLine) {
  const fs::path cfg = write_file("run.cfg", kRunConfig);
  const Outcome o = cli("run --config \"" + cfg.string() + "\"");
  EXPECT_EQ(o.code, 0) << o.output;
  const auto l = lines(o.output);
  ASSERT_EQ(l.size(), 1u) << o.output;
  EXPECT_NE(l[0].find("sum_rate="), std::string::npos);
  EXPECT_NE(l[0].find("mode=hybrid arch=single"), std::string::npos);
}

TEST(Cli, GroupCountNotDividingCellsIsConfigError) {
  const fs::path cfg =
      write_file("bad_g.cfg", "[scenario]\nM = 16\narch = group\nG = 3\n");
  const Outcome o = cli("run --config \"" + cfg.string() + "\"");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("scenario.G"), std::string::npos) << o.output;
}

TEST(Cli, UnknownKeyIsConfigError) {
  const fs::path cfg = write_file("bad_key.cfg", "[scenario]\nQ = 1\n");
  EXPECT_EQ(cli("run --config \"" + cfg.string() + "\"").code, 2);
}

TEST(Cli, MissingArgumentsAreUsageErrors) {
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
}

TEST(Cli, TraceIsNonDecreasing) {
  const fs::path cfg = write_file("trace.cfg", kRunConfig);
  const fs::path trace = scratch() / "trace.csv";
  const Outcome o = cli("run --config \"" + cfg.string() + "\" --seed 5 --trace \"" +
                        trace.string() + "\"");
  ASSERT_EQ(o.code, 0) << o.output;
  const auto l = lines(slurp(trace));
  ASSERT_GE(l.size(), 3u);
  EXPECT_EQ(l[0], "iter,f_o,power_used,constraint_residual");
  double prev = -1.0;
  for (std::size_t i = 1; i < l.size(); ++i) {
    std::istringstream row(l[i]);
    std::string iter, f_o;
    std::getline(row, iter, ',');
    std::getline(row, f_o, ',');
    const double f = std::stod(f_o);
    EXPECT_GE(f, prev - 1e-9) << "row " << i;
    prev = f;
  }
  EXPECT_NE(o.output.find("seed=5"), std::string::npos);
}

TEST(Cli, UnwritableTraceIsIoError) {
  const fs::path cfg = write_file("io.cfg", kRunConfig);
  EXPECT_EQ(cli("run --config \"" + cfg.string() +
                "\" --trace /nonexistent_dir/trace.csv")
                .code,
            4);
}

TEST(Cli, SweepRowsAndByteIdenticalReruns) {
  const fs::path cfg = write_file("sweep.cfg", kSweepConfig);
  const fs::path a = scratch() / "a.csv";
  const fs::path b = scratch() / "b.csv";
  const fs::path record = scratch() / "record.json";
  const Outcome oa = cli("sweep --config \"" + cfg.string() + "\" --out \"" +
                         a.string() + "\" --no-timing --record \"" +
                         record.string() + "\"");
  ASSERT_EQ(oa.code, 0) << oa.output;
  const Outcome ob = cli("sweep --config \"" + cfg.string() + "\" --out \"" +
                         b.string() + "\" --no-timing --workers 2");
  ASSERT_EQ(ob.code, 0) << ob.output;

  const std::string csv = slurp(a);
  EXPECT_EQ(csv, slurp(b));
  const auto l = lines(csv);
  ASSERT_EQ(l.size(), 19u);
  EXPECT_EQ(l[0], bdris::kSweepCsvHeader);

  const auto json = nlohmann::json::parse(slurp(record));
  EXPECT_EQ(json["points"].size(), 6u);
  for (const auto &p : json["points"]) {
    double total = 0.0;
    for (double r : p["sum_rates"])
      total += r;
    EXPECT_NEAR(total / 3.0, double(p["mean"]), 1e-12);
  }
}

TEST(Cli, SweepWithoutSweepSectionIsConfigError) {
  const fs::path cfg = write_file("nosweep.cfg", kRunConfig);
  EXPECT_EQ(cli("sweep --config \"" + cfg.string() + "\" --out \"" +
                (scratch() / "x.csv").string() + "\"")
                .code,
            2);
}

TEST(Cli, SelftestPasses) {
  const Outcome o = cli("selftest");
  EXPECT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(lines(o.output).size(), 4u);
  EXPECT_EQ(cli("gradcheck --seed 7").code, 0);
}

TEST(Cli, InjectedGradientBugFailsNamingSuite) {
  const Outcome o = cli("selftest --inject-gradient-sign-bug");
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.output.find("selftest failed: gradient suite"), std::string::npos)
      << o.output;
}

TEST(Recipes, EveryRecipeParses) {
  int count = 0;
  for (const auto &entry : fs::directory_iterator(BDRIS_RECIPES_DIR)) {
    if (entry.path().extension() != ".cfg")
      continue;
    ++count;
    EXPECT_NO_THROW(bdris::load_config(entry.path())) << entry.path();
  }
  EXPECT_GT(count, 0);
}

} // namespace
