#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dampedwave/config.hpp"
#include "dampedwave/experiments.hpp"
#include "dampedwave/output.hpp"

using namespace dampedwave;
namespace fs = std::filesystem;

namespace {

std::string csv_of(const std::string& experiment, const ConfigMap& overrides) {
  const ExperimentConfig c = resolve_config(experiment, {}, overrides);
  std::ostringstream os;
  write_csv(os, c.header_line(), run_experiment(c).table);
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DAMPEDWAVE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("dampedwave_test_" + name); }

}  // namespace

TEST(Config, ParsesCommentsAndNormalizesKeys) {
  const ConfigMap m = parse_config_text("# header\nn_cells = 12  # trailing\n\ntau=0.5\n");
  EXPECT_EQ(m.at("n-cells"), "12");
  EXPECT_EQ(m.at("tau"), "0.5");
  EXPECT_EQ(m.size(), 2u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config_text("n-cells 12"), ConfigError);
  EXPECT_THROW(parse_config_text("bogus = 1"), ConfigError);
  EXPECT_THROW(parse_config_text("tau ="), ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/dampedwave.cfg"), ConfigError);
}

TEST(Config, DefaultsFileAndOverridesMerge) {
  const ExperimentConfig c = resolve_config("simulate", {{"tau", "0.1"}, {"n-cells", "7"}}, {{"n-cells", "9"}});
  EXPECT_EQ(c.count("n-cells"), 9u);
  EXPECT_DOUBLE_EQ(c.real("tau"), 0.1);
  EXPECT_DOUBLE_EQ(c.real("a-const"), 10.0);
}

TEST(Config, DerivedKeysAndConsistency) {
  const ExperimentConfig c = resolve_config("simulate", {}, {{"h", "0.125"}, {"n-steps", "4"}, {"tau", "0.25"}});
  EXPECT_EQ(c.count("n-cells"), 8u);
  EXPECT_DOUBLE_EQ(c.real("t-final"), 1.0);
  EXPECT_THROW(resolve_config("simulate", {}, {{"h", "0.125"}, {"n-cells", "4"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"h", "0.3"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"tau", "0.3"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"n-steps", "4"}, {"tau", "0.25"}, {"t-final", "2"}}), ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(resolve_config("simulate", {}, {{"theta", "0.5"}, {"lambda", "1"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"theta", "1.5"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"tau", "abc"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"n-cells", "-3"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"u0", "triangle"}}), ConfigError);
  EXPECT_THROW(resolve_config("simulate", {}, {{"degree", "12"}}), ConfigError);
  EXPECT_THROW(resolve_config("convergence", {}, {{"reference", "nodal"}}), ConfigError);
  EXPECT_THROW(resolve_config("nonsense", {}, {}), ConfigError);
}

TEST(Config, HeaderLineListsEveryResolvedKey) {
  const ExperimentConfig c = resolve_config("stationary", {}, {{"n-cells", "8"}});
  EXPECT_EQ(c.header_line(), "# dampedwave stationary a-const=1 degree=0 method=monolithic n-cells=8 out=- seed=1");
}

TEST(Output, NumberFormat) {
  EXPECT_EQ(format_number(2.25181), "2.25181e+00");
  EXPECT_EQ(format_number(-5.18359e-10), "-5.18359e-10");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Output, CsvLayout) {
  Table t{{"note"}, {"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  std::ostringstream os;
  write_csv(os, "# head", t);
  EXPECT_EQ(os.str(), "# head\n# note\na,b\n1,2\n3,4\n");
}

TEST(Output, SvgIsWellFormed) {
  Plot p{"E & <decay>", "t", "E", true, {{"s", {0, 1, 2}, {1, 0.1, 0.01}}}};
  std::ostringstream os;
  write_svg(os, p);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("E &amp; &lt;decay&gt;"), std::string::npos);
}

TEST(Experiments, StationaryTableAndErrors) {
  const std::string out = csv_of("stationary", {{"n-cells", "16"}});
  EXPECT_NE(out.find("# l2_error_u="), std::string::npos);
  EXPECT_NE(out.find("x,u_h,p_h,u_exact,p_exact"), std::string::npos);
}

TEST(Experiments, SimulateIsDeterministic) {
  const ConfigMap o{{"n-cells", "20"}, {"t-final", "0.2"}, {"u0", "random"}, {"p0", "random"}, {"seed", "5"}};
  EXPECT_EQ(csv_of("simulate", o), csv_of("simulate", o));
}

TEST(Experiments, SmallDecayTableTracksExactEnergy) {
  const ExperimentConfig c =
      resolve_config("decay-table", {}, {{"n-cells", "100"}, {"tau", "1e-2"}, {"t-final", "2"}, {"report-every", "1"}});
  const Table t = run_experiment(c).table;
  ASSERT_EQ(t.columns.size(), 4u);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows.back().front(), "alpha");
  const double exact = std::stod(t.rows[2][1]);
  for (std::size_t col = 2; col < 4; ++col) EXPECT_NEAR(std::stod(t.rows[2][col]), exact, 0.05 * exact);
}

TEST(Experiments, ConvergenceSmallSweep) {
  const ExperimentConfig c = resolve_config(
      "convergence", {}, {{"sweep", "h"}, {"levels", "3"}, {"n-cells-coarse", "4"}, {"tau", "1e-3"}, {"theta", "1"}});
  const Table t = run_experiment(c).table;
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(t.rows[0].back().empty());
  EXPECT_GT(std::stod(t.rows[2].back()), 1.5);
}

TEST(Experiments, ArateSingleDamping) {
  const ExperimentConfig c = resolve_config("arate", {}, {{"a-exp-min", "3"}, {"a-exp-max", "3"}});
  const auto rows = arate_rows(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].rate, rows[0].g, 0.05 * rows[0].g);
}

TEST(Experiments, DecayTableRejectsMixedInitialData) {
  const ExperimentConfig c = resolve_config("decay-table", {}, {{"u0", "cos"}});
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path out = temp_file("out.csv");
  const fs::path svg = temp_file("plot.svg");
  EXPECT_EQ(cli("stationary --n-cells 8 --out " + out.string() + " --svg " + svg.string()), 0);
  EXPECT_TRUE(fs::exists(out));
  EXPECT_TRUE(fs::exists(svg));
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("# dampedwave stationary", 0), 0u);

  EXPECT_EQ(cli("stationary --n-cells abc"), 2);
  EXPECT_EQ(cli("stationary --bogus 1"), 2);
  EXPECT_EQ(cli("nonsense"), 2);
  EXPECT_EQ(cli("simulate --theta 0.5 --lambda 1"), 2);
  EXPECT_EQ(cli("stationary --config /nonexistent/x.cfg"), 2);
  EXPECT_EQ(cli("decay-table --a-const 1 --n-cells 10 --tau 0.1 --t-final 1 --report-every 0.5"), 2);
  EXPECT_EQ(cli("simulate --theta 0 --tau 1 --t-final 2000 --n-cells 64 --u0 random --p0 random"), 3);
  EXPECT_EQ(cli("stationary --a-const 0"), 3);
  fs::remove(out);
  fs::remove(svg);
}

TEST(Cli, ConfigFileAndByteIdenticalReruns) {
  const fs::path cfg = temp_file("run.cfg");
  const fs::path a = temp_file("a.csv");

  std::ofstream(cfg) << "# small run\nn_cells = 10\nt-final = 0.1\nu0 = random\np0 = sin\n";
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --out " + a.string()), 0);
  const std::string first = slurp(a);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --out " + a.string()), 0);
  EXPECT_EQ(slurp(a), first);
  EXPECT_NE(first.find("n-cells=10"), std::string::npos);
  fs::remove(cfg);
  fs::remove(a);
}
