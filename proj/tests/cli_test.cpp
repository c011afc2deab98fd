#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sstream>
#include <sys/wait.h>

#include "pilat/pipeline.hpp"
#include "support.hpp"

namespace pilat {
namespace {

struct Outcome {
  int status;
  std::string out;
};

std::string corpus(const std::string& rel) { return test::corpus_dir().string() + rel; }

Outcome run_binary(const std::string& args) {
  std::string cmd = std::string(PILAT_BINARY) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  Outcome r{-1, {}};
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Outcome cli(const std::string& file, const std::string& args) {
  return run_binary("analyze " + corpus("/" + file) + " " + args);
}

TEST(InitAssignment, PointAndInterval) {
  InitConstraint p = parse_init_assignment("x=1.5");
  EXPECT_EQ(p.var, "x");
  EXPECT_EQ(p.lower, Rational(3, 2));
  EXPECT_TRUE(p.is_point());
  InitConstraint i = parse_init_assignment("s1=[-1, 0.25]");
  EXPECT_EQ(i.var, "s1");
  EXPECT_EQ(i.lower, -1);
  EXPECT_EQ(i.upper, Rational(1, 4));
  EXPECT_ANY_THROW(parse_init_assignment("x"));
  EXPECT_ANY_THROW(parse_init_assignment("x=[2,1]"));
  EXPECT_ANY_THROW(parse_init_assignment("=3"));
}

TEST(Options, ModeAndOutputNames) {
  EXPECT_EQ(mode_from_string("convergent"), Mode::Convergent);
  EXPECT_EQ(mode_from_string("all"), Mode::All);
  EXPECT_EQ(output_format_from_string("both"), OutputFormat::Both);
  EXPECT_ANY_THROW(mode_from_string("fast"));
}

TEST(ExitCodes, CorpusMatchesHeaders) {
  for (const auto& f : test::corpus_files()) {
    Config cfg;
    cfg.degree = 2;
    cfg.trials = 500;
    AnalysisResult r = analyze_source(cfg, test::read_file(f));
    EXPECT_EQ(r.exit_code, test::expected_exit(test::read_file(f))) << f << "\n" << r.error;
    if (r.exit_code == 1) EXPECT_FALSE(r.error.empty()) << f;
  }
}

TEST(ExitCodes, MissingFileIsAnError) {
  Config cfg;
  std::ostringstream out, err;
  EXPECT_EQ(run_analysis(cfg, corpus("/does_not_exist.loop"), out, err), 1);
  EXPECT_FALSE(err.str().empty());
}

TEST(ExitCodes, SyntaxErrorReportsLocation) {
  Config cfg;
  std::ostringstream out, err;
  EXPECT_EQ(run_analysis(cfg, corpus("/syntax_error.loop"), out, err), 1);
  EXPECT_NE(err.str().find("Syntax"), std::string::npos) << err.str();
  EXPECT_NE(err.str().find(":"), std::string::npos);
}

TEST(Cli, FilterWithInitialState) {
  Outcome r = cli("fig6.loop", "--degree 2 --init s0=2 --init s1=1 --trials 2000");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("<= 2.42858;"), std::string::npos) << r.out;
}

TEST(Cli, SkipBodyYieldsExactRelations) {
  Outcome r = cli("skip.loop", "--degree 1 --mode exact --trials 100");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\\at(x, LoopEntry)"), std::string::npos) << r.out;
}

TEST(Cli, ModeFilterDropsOtherClasses) {
  // The contraction has convergent relations only, so nothing remains.
  Outcome r = cli("fig1.loop", "--degree 2 --mode divergent --trials 100");
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_EQ(r.out.find("<="), std::string::npos) << r.out;
  EXPECT_EQ(cli("fig1.loop", "--degree 2 --mode convergent --trials 100").status, 0);
}

TEST(Cli, NoCandidateExitsWithTwo) {
  Outcome r = cli("random_walk.loop", "--degree 2");
  EXPECT_EQ(r.status, 2) << r.out;
}

TEST(Cli, BadArgumentsAreRejected) {
  EXPECT_NE(cli("fig1.loop", "").status, 0);
  EXPECT_NE(cli("fig1.loop", "--degree 0").status, 0);
  EXPECT_NE(cli("fig1.loop", "--degree 2 --float-model half").status, 0);
}

TEST(Cli, ApproximateEigenpairsAreDiagnosticsOnly) {
  Outcome r = cli("gaussian_regulator.loop", "--degree 1 --approximate-eigenpairs --trials 100");
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_NE(r.out.find("unverified approximate eigenvalue 0.54 + 0.72i"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("/*@"), std::string::npos) << r.out;
}

TEST(Cli, JsonOutputParses) {
  Outcome r = cli("fig4.loop", "--degree 2 --output json --trials 500");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\"lambda\": \"578/625\""), std::string::npos) << r.out;
}

}  // namespace
}  // namespace pilat
