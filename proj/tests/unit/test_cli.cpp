#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qrobust/io/csv.hpp"

namespace fs = std::filesystem;
using qrobust::io::CsvTable;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(QROBUST_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qrobust_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

const std::string kSample = std::string(QROBUST_SAMPLES_DIR) + "/single_qubit.yaml";

}  // namespace

TEST(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("analyze --jobs notanumber").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, MissingConfigNamesPath) {
  const auto r = run("synthesize --config /nonexistent/exp.yaml");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/nonexistent/exp.yaml"), std::string::npos) << r.output;
}

TEST(Cli, MalformedConfigReportsLocation) {
  const auto dir = scratch("malformed");
  write(dir / "bad.yaml", "seed: 1\nanalysis:\n  epsilon: [0.1\n");
  const auto r = run("synthesize --config " + (dir / "bad.yaml").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("bad.yaml:"), std::string::npos) << r.output;
  EXPECT_EQ(run("certify --epsilon 3 --config " + kSample).code, 2);
}

TEST(Cli, SynthesisFailureExitCode) {
  const auto dir = scratch("fail");
  write(dir / "hard.yaml",
        "system:\n  drift: [[1, 0], [0, -1]]\n  interactions: [[[0, 1], [1, 0]]]\n  steps: 2\n  final_time: 0.1\n"
        "target:\n  gate: x\nsynthesis:\n  restarts: 1\n  max_iterations: 2\n  accept_error: 1e-12\n");
  const auto r = run("synthesize -q --config " + (dir / "hard.yaml").string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST(Cli, FullPipelineOnSingleQubit) {
  const auto dir = scratch("pipeline");
  const std::string common = " -q --config " + kSample + " --out " + dir.string();
  ASSERT_EQ(run("synthesize" + common).code, 0);
  const auto manifest = CsvTable::read((dir / "manifest.csv").string());
  ASSERT_GE(manifest.size(), 1u);
  for (std::size_t i = 0; i < manifest.size(); ++i) EXPECT_LT(manifest.number(i, "nominal_error"), 1e-3);
  const auto first = slurp(dir / manifest.cell(0, "file"));
  EXPECT_NE(first.find("# system_hash "), std::string::npos);
  EXPECT_NE(first.find("# seed 3"), std::string::npos);

  ASSERT_EQ(run("analyze" + common).code, 0);
  const auto sens = CsvTable::read((dir / "sensitivity.csv").string());
  ASSERT_EQ(sens.size(), manifest.size());
  for (std::size_t i = 0; i < sens.size(); ++i) {
    for (const char* l : {"H0", "H1", "H2"}) {
      EXPECT_LE(sens.number(i, std::string("abs_zeta_") + l), sens.number(i, "b2") + 1e-10);
    }
    EXPECT_LE(sens.number(i, "b2"), sens.number(i, "b3") + 1e-10);
  }

  ASSERT_EQ(run("certify" + common).code, 0);
  const auto certs = CsvTable::read((dir / "certificates.csv").string());
  ASSERT_EQ(certs.size(), manifest.size());
  for (std::size_t i = 0; i < certs.size(); ++i) {
    ASSERT_EQ(certs.cell(i, "status"), "ok");
    EXPECT_LT(certs.number(i, "thm3_err_plus_H0"), 0.01);
    EXPECT_LT(certs.number(i, "alg1_err_at_delta_bar"), 0.01);
    EXPECT_GE(certs.number(i, "alg1_err_next"), 0.01);
    EXPECT_GT(certs.number(i, "ratio_alg1_thm3_H0"), 1.0);
  }
  EXPECT_FALSE(CsvTable::read((dir / "alg1_trace.csv").string()).empty());

  ASSERT_EQ(run("sweep" + common).code, 0);
  const auto sweep = CsvTable::read((dir / "sweep.csv").string());
  EXPECT_EQ(sweep.size(), manifest.size() * 3 * 51);

  ASSERT_EQ(run("plot -q --out " + dir.string()).code, 0);
  for (const char* f : {"fig_sensitivity.svg", "fig_theorem3.svg", "fig_algorithm1.svg"}) {
    EXPECT_NE(slurp(dir / f).find("<svg"), std::string::npos) << f;
  }
}

TEST(Cli, RerunIsByteIdentical) {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  ASSERT_EQ(run("synthesize -q --seed 11 --config " + kSample + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("synthesize -q --seed 11 --jobs 2 --config " + kSample + " --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  const auto manifest = CsvTable::read((a / "manifest.csv").string());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    EXPECT_EQ(slurp(a / manifest.cell(i, "file")), slurp(b / manifest.cell(i, "file")));
  }
}

TEST(Cli, CorruptControllerIsDataError) {
  const auto dir = scratch("corrupt");
  const std::string common = " -q --config " + kSample + " --out " + dir.string();
  ASSERT_EQ(run("synthesize" + common).code, 0);
  const auto manifest = CsvTable::read((dir / "manifest.csv").string());
  const auto file = manifest.cell(0, "file");
  write(dir / file, "# qrobust-controller 1\n# seed x\n");
  const auto r = run("analyze" + common);
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.output.find(file), std::string::npos) << r.output;
  fs::remove(dir / "manifest.csv");
  EXPECT_EQ(run("certify" + common).code, 4);
}

TEST(Cli, EmptyControllerListGivesHeaderOnlyOutputs) {
  const auto dir = scratch("empty");
  write(dir / "manifest.csv", "controller,file,restart,restart_seed,seed,nominal_error,iterations,status,system_hash\n");
  const std::string common = " -q --config " + kSample + " --out " + dir.string();
  ASSERT_EQ(run("analyze" + common).code, 0);
  ASSERT_EQ(run("certify" + common).code, 0);
  const auto sens = CsvTable::read((dir / "sensitivity.csv").string());
  EXPECT_TRUE(sens.empty());
  EXPECT_TRUE(sens.has_column("b3"));
  ASSERT_EQ(run("plot -q --out " + dir.string()).code, 0);
  const auto svg = slurp(dir / "fig_sensitivity.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("<circle"), std::string::npos);
}

TEST(Cli, PlotWithMissingColumnsIsDataError) {
  const auto dir = scratch("plotbad");
  write(dir / "sensitivity.csv", "controller,b2\n0,1\n");
  write(dir / "certificates.csv", "controller\n");
  EXPECT_EQ(run("plot -q --out " + dir.string()).code, 4);
  fs::remove(dir / "sensitivity.csv");
  EXPECT_EQ(run("plot -q --out " + dir.string()).code, 4);
}
