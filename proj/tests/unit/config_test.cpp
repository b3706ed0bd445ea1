#include <gtest/gtest.h>

#include "rbc/config.hpp"
#include "rbc/error.hpp"
#include "test_support.hpp"

namespace rbc {
namespace {

using testing::env_from;
using testing::TempDir;
using testing::write_file;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no rbc::Error thrown";
  return ErrorCode::usage;
}

TEST(Config, InstanceTypeFromFile) {
  TempDir dir;
  write_file(dir / "cfg", "default_instance_type=m1.xlarge\n");
  auto c = load_config(dir / "cfg", env_from({{"HOME", dir.path().string()}}));
  EXPECT_EQ(c.default_instance_type, "m1.xlarge");
}

TEST(Config, AbsentFileGivesBuiltins) {
  TempDir dir;
  auto env = env_from({{"HOME", dir.path().string()}});
  EXPECT_EQ(load_config(std::nullopt, env), builtin_config(env));
}

TEST(Config, RuntimeCommandPassthrough) {
  auto c = parse_config("runtime_command=sh {script}\n", Config{});
  EXPECT_EQ(c.runtime_command, "sh {script}");
}

TEST(Config, BuiltinValues) {
  Config c;
  EXPECT_EQ(c.default_snapshot_id, "snap-default");
  EXPECT_EQ(c.default_instance_type, "m1.xlarge");
  EXPECT_EQ(c.remote_user, "root");
  EXPECT_EQ(c.runtime_command, "Rscript {script}");
  EXPECT_EQ(c.provider, "local");
  EXPECT_EQ(c.effective_remote_home(), "/home/root");
}

TEST(Config, CommentsAndWhitespace) {
  auto c = parse_config(
      "# defaults\n\n  remote_user = analyst  \nremote_home=/srv/work\n",
      Config{});
  EXPECT_EQ(c.remote_user, "analyst");
  EXPECT_EQ(c.effective_remote_home(), "/srv/work");
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    parse_config("provider=local\n\nflavour=vanilla\n", Config{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_config);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, LineWithoutEquals) {
  EXPECT_EQ(code_of([] { parse_config("just words\n", Config{}); }),
            ErrorCode::malformed_config);
}

TEST(Config, PlaceholderCountEnforced) {
  TempDir dir;
  auto env = env_from({{"HOME", dir.path().string()}});
  write_file(dir / "none", "runtime_command=Rscript main.R\n");
  write_file(dir / "two", "runtime_command=cp {script} {script}.bak\n");
  EXPECT_EQ(code_of([&] { load_config(dir / "none", env); }),
            ErrorCode::malformed_config);
  EXPECT_EQ(code_of([&] { load_config(dir / "two", env); }),
            ErrorCode::malformed_config);
}

TEST(Config, InstanceTypeMustBeInCatalog) {
  TempDir dir;
  write_file(dir / "cfg", "default_instance_type=x9.galactic\n");
  EXPECT_EQ(code_of([&] {
              load_config(dir / "cfg", env_from({{"HOME", dir.path().string()}}));
            }),
            ErrorCode::malformed_config);
}

TEST(Config, ExplicitMissingPathFails) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { load_config(dir / "nope", env_from({})); }),
            ErrorCode::malformed_config);
}

TEST(Config, LookupOrder) {
  TempDir dir;
  write_file(dir / ".rbc/config", "default_resource_name=from_home\n");
  write_file(dir / "env.cfg", "default_resource_name=from_env\n");
  write_file(dir / "arg.cfg", "default_resource_name=from_arg\n");
  const auto home = dir.path().string();

  EXPECT_EQ(load_config(std::nullopt, env_from({{"HOME", home}}))
                .default_resource_name,
            "from_home");
  auto env = env_from({{"HOME", home}, {"RBC_CONFIG", (dir / "env.cfg").string()}});
  EXPECT_EQ(load_config(std::nullopt, env).default_resource_name, "from_env");
  EXPECT_EQ(load_config(dir / "arg.cfg", env).default_resource_name, "from_arg");
}

TEST(Config, EnvironmentOverridesPaths) {
  TempDir dir;
  write_file(dir / "cfg", "state_path=/a/state.json\nprovider_workdir=/a/w\n");
  auto c = load_config(dir / "cfg", env_from({{"RBC_STATE", "/b/s.json"},
                                              {"RBC_PROVIDER_WORKDIR", "/b/w"}}));
  EXPECT_EQ(c.state_path, "/b/s.json");
  EXPECT_EQ(c.provider_workdir, "/b/w");
}

TEST(Config, DefaultPathsUnderHome) {
  auto c = builtin_config(env_from({{"HOME", "/users/ana"}}));
  EXPECT_EQ(c.state_path, "/users/ana/.rbc/state.json");
  EXPECT_EQ(c.provider_workdir, "/users/ana/.rbc/sandbox");
}

}  // namespace
}  // namespace rbc
