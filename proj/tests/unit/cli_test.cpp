#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "rbc/error.hpp"
#include "rbc/job_dir.hpp"
#include "rbc/process.hpp"
#include "rbc/retrieval.hpp"
#include "rbc/version.hpp"
#include "test_support.hpp"

namespace rbc::cli {
namespace {

namespace fs = std::filesystem;
using rbc::testing::Sandbox;
using rbc::testing::slurp;
using rbc::testing::write_file;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  Sandbox sb;

  Outcome run_cli(Command command, std::vector<std::string> args,
                  std::optional<fs::path> cwd = std::nullopt,
                  std::string input = {}, bool interactive = false) {
    std::istringstream in(input);
    std::ostringstream out, err;
    Context ctx{in, out, err, interactive, rbc::testing::env_from(sb.env()),
                cwd.value_or(sb.host())};
    Outcome o;
    o.code = run(command, args, ctx);
    o.out = out.str();
    o.err = err.str();
    return o;
  }
  std::uint64_t version() { return sb.store.version(); }
  fs::path bsgenome() {
    return sb.job("BSGenome",
                  {{"GenomeSearching.R", "echo hit > Results/ce2dict0_ana1.txt\n"},
                   {"fail.R", "exit 7\n"}});
  }
};

constexpr Command kAll[] = {Command::gather, Command::submit, Command::execute,
                            Command::results, Command::terminate};

TEST_F(CliTest, HelpAndVersionHaveNoSideEffects) {
  for (Command c : kAll) {
    for (const char* flag : {"-h", "-v"}) {
      auto o = run_cli(c, {flag});
      EXPECT_EQ(o.code, kExitOk) << alias_name(c) << " " << flag;
      EXPECT_TRUE(o.err.empty());
      // handled even next to otherwise fatal arguments
      EXPECT_EQ(run_cli(c, {"-rname", "x", "-bogus", flag}).code, kExitOk);
    }
    EXPECT_NE(run_cli(c, {"-h"}).out.find(std::string("usage: ") + std::string(alias_name(c))),
              std::string::npos);
    EXPECT_EQ(run_cli(c, {"-v"}).out,
              std::string(alias_name(c)) + " " + std::string(kVersion) + "\n");
  }
  EXPECT_FALSE(fs::exists(sb.config.state_path));
  EXPECT_FALSE(fs::exists(sb.config.provider_workdir));
}

TEST_F(CliTest, UsageErrorsExitTwoWithoutSideEffects) {
  sb.executor.gather_resource({"existing", 1, {}, EbsSpec::use_default(), ""});
  const auto v = version();
  const auto instances = sb.provider.instances().size();
  const std::vector<std::pair<Command, std::vector<std::string>>> cases = {
      {Command::gather, {"-ebsvol", "vol-1", "-snap", "snap-1"}},
      {Command::gather, {"-rname", "a", "-rname", "b"}},
      {Command::gather, {"-rsize", "abc"}},
      {Command::gather, {"-rsize", "0"}},
      {Command::gather, {"-rsize"}},
      {Command::gather, {"--rname", "a"}},
      {Command::gather, {"stray"}},
      {Command::gather, {"-deletevol"}},
      {Command::submit, {"-toallnodes", "-tomaster"}},
      {Command::submit, {"-data", "x", "-jobdir", "y"}},
      {Command::execute, {"-rname", "existing", "-rscript", "a.R"}},
      {Command::execute, {"-runname", ""}},
      {Command::results, {"-frommaster", "-fromall", "-runname", "r"}},
      {Command::results, {"-rname", "existing"}},
      {Command::terminate, {"-rname", "existing", "-report", "xml"}},
      {Command::terminate, {"-rname", "existing", "-force"}},
  };
  for (const auto& [command, args] : cases) {
    auto o = run_cli(command, args);
    EXPECT_EQ(o.code, kExitUsage) << alias_name(command) << " " << ::testing::PrintToString(args);
    EXPECT_TRUE(o.out.empty());
    EXPECT_FALSE(o.err.empty());
  }
  EXPECT_EQ(version(), v);
  EXPECT_EQ(sb.provider.instances().size(), instances);
  EXPECT_EQ(sb.store.lookup_resource("existing").state, ResourceState::active);
}

TEST_F(CliTest, GatherPrintsSummaryAndTiming) {
  auto o = run_cli(Command::gather, {"-rname", "BSgenome_instance", "-rsize", "1",
                                     "-desc", "For_Genome_Searching"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("BSgenome_instance"), std::string::npos);
  EXPECT_NE(o.out.find("For_Genome_Searching"), std::string::npos);
  EXPECT_NE(o.out.find("timing: gather"), std::string::npos);
  EXPECT_TRUE(o.err.empty());

  auto cluster = run_cli(Command::gather, {"-rsize", "8", "-rname", "LVSmiRNA_cluster",
                                           "-report", "tsv"});
  ASSERT_EQ(cluster.code, kExitOk) << cluster.err;
  EXPECT_NE(cluster.out.find("8 x m1.xlarge"), std::string::npos);
  EXPECT_EQ(sb.store.lookup_resource("LVSmiRNA_cluster").instances.size(), 8u);
  EXPECT_NE(cluster.out.find("\ngather\tLVSmiRNA_cluster\t-\t"), std::string::npos);
}

TEST_F(CliTest, DuplicateNameIsOperationalFailure) {
  ASSERT_EQ(run_cli(Command::gather, {"-rname", "BSgenome_instance"}).code, kExitOk);
  const auto v = version();
  auto o = run_cli(Command::gather, {"-rname", "BSgenome_instance"});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("DuplicateResourceName"), std::string::npos);
  EXPECT_EQ(version(), v);
}

TEST_F(CliTest, VolumeWithClusterIsOperational) {
  auto o = run_cli(Command::gather, {"-rsize", "2", "-ebsvol", "vol-00000001"});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("VolumeWithCluster"), std::string::npos);
}

TEST_F(CliTest, DefaultResourceAndCwd) {
  write_file(sb.dir / "config",
             "runtime_command=sh {script}\ndefault_resource_name=BSgenome_instance\n");
  const auto job = bsgenome();
  ASSERT_EQ(run_cli(Command::gather, {}).code, kExitOk);
  EXPECT_EQ(sb.store.lookup_resource("BSgenome_instance").size, 1);
  auto o = run_cli(Command::submit, {}, job);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("Submitted job BSGenome to BSgenome_instance"), std::string::npos);
  auto master = sb.store.lookup_resource("BSgenome_instance").master;
  EXPECT_TRUE(fs::exists(sb.remote(master, "BSGenome/GenomeSearching.R")));
}

TEST_F(CliTest, SubmitVariants) {
  const auto job = bsgenome();
  ASSERT_EQ(run_cli(Command::gather, {"-rname", "c", "-rsize", "3"}).code, kExitOk);
  auto o = run_cli(Command::submit, {"-rname", "c", "-toallnodes", "-jobdir", job.string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const auto& id : sb.store.lookup_resource("c").instances) {
    EXPECT_NE(o.out.find(id.str() + ": 2 copied"), std::string::npos) << o.out;
  }
  write_file(sb.host() / "refs/genome.txt", "ACGT");
  auto data = run_cli(Command::submit, {"-rname", "c", "-data", "refs"});
  ASSERT_EQ(data.code, kExitOk) << data.err;
  auto master = sb.store.lookup_resource("c").master;
  EXPECT_EQ(slurp(sb.remote(master, "refs/genome.txt")), "ACGT");
  // cwd is not a job directory
  auto bad = run_cli(Command::submit, {"-rname", "c"});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_NE(bad.err.find("Missing"), std::string::npos);
}

TEST_F(CliTest, ExecuteAndPayloadFailure) {
  const auto job = bsgenome();
  run_cli(Command::gather, {"-rname", "logitT_instance"});
  run_cli(Command::submit, {"-rname", "logitT_instance"}, job);
  auto o = run_cli(Command::execute, {"-rname", "logitT_instance", "-rscript",
                                      "GenomeSearching.R", "-runname",
                                      "Run1_on_logitT_instance"},
                   job);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("succeeded (exit 0)"), std::string::npos);
  EXPECT_NE(o.out.find("timing: execute"), std::string::npos);

  auto f = run_cli(Command::execute, {"-rname", "logitT_instance", "-rscript", "fail.R",
                                      "-runname", "Run2"},
                   job);
  EXPECT_EQ(f.code, kExitFailure);
  EXPECT_NE(f.err.find("status 7"), std::string::npos);
  auto run = sb.store.lookup_run({"logitT_instance", "BSGenome", "Run2"});
  EXPECT_EQ(run.status, RunStatus::failed);
  EXPECT_EQ(run.exit_code, 7);

  auto missing = run_cli(Command::execute, {"-rname", "logitT_instance", "-rscript",
                                            "nope.R", "-runname", "Run3"},
                         job);
  EXPECT_EQ(missing.code, kExitFailure);
  EXPECT_NE(missing.err.find("ScriptNotFound"), std::string::npos);
}

TEST_F(CliTest, ExecutePromptsForScript) {
  const auto job = bsgenome();
  run_cli(Command::gather, {"-rname", "r"});
  run_cli(Command::submit, {"-rname", "r"}, job);
  auto batch = run_cli(Command::execute, {"-rname", "r", "-runname", "Run1"}, job);
  EXPECT_EQ(batch.code, kExitFailure);
  EXPECT_NE(batch.err.find("NonInteractiveSession"), std::string::npos);

  auto o = run_cli(Command::execute, {"-rname", "r", "-runname", "Run1"}, job, "1\n", true);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.err.find("[1] GenomeSearching.R"), std::string::npos);
  EXPECT_NE(o.err.find("[2] fail.R"), std::string::npos);
  EXPECT_EQ(sb.store.lookup_run({"r", "BSGenome", "Run1"}).script, "GenomeSearching.R");
}

TEST_F(CliTest, ResultsAndTerminate) {
  const auto job = bsgenome();
  run_cli(Command::gather, {"-rname", "LVSmiRNA_cluster", "-rsize", "2"});
  run_cli(Command::submit, {"-rname", "LVSmiRNA_cluster", "-toallnodes"}, job);
  run_cli(Command::execute, {"-rname", "LVSmiRNA_cluster", "-rscript", "GenomeSearching.R",
                             "-runname", "Run2_on_LVSmiRNA_cluster"},
          job);
  run_cli(Command::execute, {"-rname", "LVSmiRNA_cluster", "-rscript", "GenomeSearching.R",
                             "-runname", "Forgotten"},
          job);
  auto o = run_cli(Command::results, {"-rname", "LVSmiRNA_cluster", "-runname",
                                      "Run2_on_LVSmiRNA_cluster", "-frommaster"},
                   job);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_TRUE(fs::exists(job / "RunResults/Run2_on_LVSmiRNA_cluster/ce2dict0_ana1.txt"));
  EXPECT_NE(o.out.find("timing: retrieve"), std::string::npos);

  auto tsv = run_cli(Command::results, {"-rname", "LVSmiRNA_cluster", "-runname",
                                        "Run2_on_LVSmiRNA_cluster", "-fromall", "-report",
                                        "tsv"},
                     job);
  ASSERT_EQ(tsv.code, kExitOk) << tsv.err;
  EXPECT_NE(tsv.out.find("Run2_on_LVSmiRNA_cluster\tall\t"), std::string::npos);
  EXPECT_NE(tsv.out.find("\nretrieve\tLVSmiRNA_cluster\tRun2_on_LVSmiRNA_cluster\t"),
            std::string::npos);

  auto unknown = run_cli(Command::results, {"-rname", "LVSmiRNA_cluster", "-runname", "Nope"}, job);
  EXPECT_EQ(unknown.code, kExitFailure);
  EXPECT_NE(unknown.err.find("RunNotFound"), std::string::npos);

  auto term = run_cli(Command::terminate, {"-rname", "LVSmiRNA_cluster", "-deletevol"});
  ASSERT_EQ(term.code, kExitOk) << term.err;
  EXPECT_NE(term.out.find("2 instance(s), 2 volume(s) deleted"), std::string::npos);
  EXPECT_NE(term.err.find("Forgotten"), std::string::npos);
  EXPECT_EQ(term.err.find("Run2_on_LVSmiRNA_cluster"), std::string::npos);

  EXPECT_EQ(run_cli(Command::terminate, {"-rname", "nothing"}).code, kExitFailure);
}

TEST_F(CliTest, CorruptStateIsReported) {
  write_file(sb.config.state_path, "{ not json");
  auto o = run_cli(Command::gather, {"-rname", "x"});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("CorruptState"), std::string::npos);
  EXPECT_EQ(slurp(sb.config.state_path), "{ not json");
}

TEST(CliNames, Mapping) {
  for (Command c : kAll) {
    EXPECT_EQ(command_from_name(subcommand_name(c)), c);
    EXPECT_EQ(command_from_name(alias_name(c)), c);
  }
  EXPECT_EQ(command_from_name("RBC_Nothing"), std::nullopt);
}

TEST(CliParse, FlagSurface) {
  const std::vector<std::string> args{"-rname", "r", "-deletevol"};
  auto flags = parse_flags(args, flag_spec(Command::terminate));
  EXPECT_EQ(flags.value("rname"), "r");
  EXPECT_TRUE(flags.has("deletevol"));
  EXPECT_FALSE(flags.has("report"));
  // a value that looks like a flag is still a value
  const std::vector<std::string> desc{"-desc", "-rsize"};
  EXPECT_EQ(parse_flags(desc, flag_spec(Command::gather)).value("desc"), "-rsize");
}

// The installed binaries dispatch on argv[0] or on the first argument.
TEST(CliBinary, ExitCodes) {
  rbc::testing::TempDir dir;
  const fs::path rbc_bin = RBC_CLI_BINARY;
  auto exit_of = [&](std::vector<std::string> argv) {
    ProcessSpec spec;
    spec.argv = std::move(argv);
    spec.env = {{"HOME", dir.path().string()}, {"PATH", "/usr/bin:/bin"}};
    spec.cwd = dir.path();
    spec.stdout_path = dir / "out";
    spec.stderr_path = dir / "err";
    return run_process(spec);
  };
  EXPECT_EQ(exit_of({rbc_bin.string(), "-v"}), 0);
  EXPECT_EQ(exit_of({rbc_bin.string(), "-h"}), 0);
  EXPECT_EQ(exit_of({rbc_bin.string()}), 2);
  EXPECT_EQ(exit_of({rbc_bin.string(), "launch"}), 2);
  EXPECT_EQ(exit_of({rbc_bin.string(), "gather", "-h"}), 0);
  EXPECT_EQ(exit_of({rbc_bin.string(), "execute", "-rname", "x"}), 2);
  const auto alias = rbc_bin.parent_path() / "RBC_TerminateResource";
  EXPECT_EQ(exit_of({alias.string(), "-v"}), 0);
  EXPECT_EQ(slurp(dir / "out"), "RBC_TerminateResource " + std::string(kVersion) + "\n");
  EXPECT_EQ(exit_of({alias.string(), "-rname", "ghost"}), 1);
  EXPECT_NE(slurp(dir / "err").find("ResourceNotFound"), std::string::npos);
}

}  // namespace
}  // namespace rbc::cli
