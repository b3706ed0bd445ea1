#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "rbc/error.hpp"
#include "rbc/state_store.hpp"
#include "test_support.hpp"

namespace rbc {
namespace {

using testing::slurp;
using testing::TempDir;
using testing::write_file;

ResourceRecord resource(const std::string& name) {
  ResourceRecord r;
  r.name = name;
  r.instances = {InstanceId("i-00000001")};
  r.master = r.instances.front();
  r.instance_type = "m1.xlarge";
  return r;
}

RunRecord run(const std::string& resource, const std::string& job,
              const std::string& name) {
  RunRecord r;
  r.resource = resource;
  r.job = job;
  r.run_name = name;
  r.script = "GenomeSearching.R";
  return r;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no rbc::Error thrown";
  return ErrorCode::usage;
}

TEST(StateStore, FreshIsEmpty) {
  TempDir dir;
  StateStore store(dir / "state.json");
  auto doc = store.read();
  EXPECT_TRUE(doc.resources.empty());
  EXPECT_TRUE(doc.runs.empty());
  EXPECT_EQ(doc.version, 0u);
}

TEST(StateStore, OpenCreatesParent) {
  TempDir dir;
  Config c;
  c.state_path = dir / "nested/deeper/state.json";
  auto store = StateStore::open(c);
  store.register_resource(resource("a"));
  EXPECT_TRUE(std::filesystem::exists(c.state_path));
}

TEST(StateStore, ReloadTwoResources) {
  TempDir dir;
  auto a = resource("a");
  auto b = resource("b");
  b.size = 3;
  b.description = "three nodes";
  b.instances = {InstanceId("i-1"), InstanceId("i-2"), InstanceId("i-3")};
  b.master = InstanceId("i-1");
  b.volumes = {VolumeId("vol-1")};
  {
    StateStore store(dir / "state.json");
    store.register_resource(a);
    store.register_resource(b);
  }
  StateStore reloaded(dir / "state.json");
  auto doc = reloaded.read();
  ASSERT_EQ(doc.resources.size(), 2u);
  EXPECT_EQ(doc.resource("a"), a);
  EXPECT_EQ(doc.resource("b"), b);
}

TEST(StateStore, TruncatedIsCorrupt) {
  TempDir dir;
  StateStore store(dir / "state.json");
  store.register_resource(resource("a"));
  auto text = slurp(dir / "state.json");
  write_file(dir / "state.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { store.read(); }), ErrorCode::corrupt_state);
  // never silently reset
  EXPECT_EQ(slurp(dir / "state.json"), text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { store.register_resource(resource("b")); }),
            ErrorCode::corrupt_state);
}

TEST(StateStore, RegisterAndDuplicate) {
  TempDir dir;
  StateStore store(dir / "state.json");
  store.register_resource(resource("BSgenome_instance"));
  EXPECT_EQ(store.read().resources.size(), 1u);
  EXPECT_EQ(store.version(), 1u);

  const auto before = slurp(dir / "state.json");
  EXPECT_EQ(code_of([&] { store.register_resource(resource("BSgenome_instance")); }),
            ErrorCode::duplicate_resource_name);
  EXPECT_EQ(slurp(dir / "state.json"), before);
}

TEST(StateStore, RunsKeyedByTriple) {
  TempDir dir;
  StateStore store(dir / "state.json");
  store.register_resource(resource("BSgenome_instance"));
  store.register_run(run("BSgenome_instance", "BSGenome", "Run1_on_BSgenome_instance"));
  auto r = store.lookup_run({"BSgenome_instance", "BSGenome", "Run1_on_BSgenome_instance"});
  EXPECT_EQ(r.status, RunStatus::pending);

  EXPECT_EQ(code_of([&] {
              store.register_run(run("BSgenome_instance", "BSGenome",
                                     "Run1_on_BSgenome_instance"));
            }),
            ErrorCode::duplicate_run_name);

  store.register_run(run("BSgenome_instance", "BSGenome", "Run2"));
  // same run name, other job: allowed
  store.register_run(run("BSgenome_instance", "Other", "Run2"));
  EXPECT_EQ(store.runs_for("BSgenome_instance", "BSGenome").size(), 2u);
  EXPECT_EQ(store.read().runs.size(), 3u);
}

TEST(StateStore, LookupAndRemove) {
  TempDir dir;
  StateStore store(dir / "state.json");
  store.register_resource(resource("a"));
  EXPECT_EQ(store.lookup_resource("a").name, "a");
  EXPECT_EQ(code_of([&] { store.lookup_resource("b"); }),
            ErrorCode::resource_not_found);
  EXPECT_EQ(code_of([&] { store.lookup_run({"a", "job", "r"}); }),
            ErrorCode::run_not_found);
  store.remove_resource("a");
  EXPECT_EQ(code_of([&] { store.lookup_resource("a"); }),
            ErrorCode::resource_not_found);
}

TEST(StateStore, FailedMutationWritesNothing) {
  TempDir dir;
  StateStore store(dir / "state.json");
  store.register_resource(resource("a"));
  const auto before = slurp(dir / "state.json");
  EXPECT_THROW(store.mutate([](StateDocument& doc) {
    doc.resources.clear();
    throw std::runtime_error("abort");
  }),
               std::runtime_error);
  EXPECT_EQ(slurp(dir / "state.json"), before);
  EXPECT_EQ(store.version(), 1u);
}

// Random records survive serialization and a reload unchanged.
TEST(StateStoreProperty, RoundTrip) {
  std::mt19937_64 rng(20130611);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  auto word = [&] {
    std::string s;
    for (int i = pick(12) + 1; i > 0; --i) {
      s += "abcxyz_-. \t\"\\/"[pick(14)];
    }
    if (pick(5) == 0) s += "\u00e9";
    return s;
  };
  auto stamp = [&] {
    return from_nanos(static_cast<std::int64_t>(rng() >> 2));
  };
  for (int round = 0; round < 200; ++round) {
    TempDir dir;
    StateStore store(dir / "state.json");
    StateDocument expected;
    for (int i = pick(4); i >= 0; --i) {
      ResourceRecord r;
      r.name = "res" + std::to_string(i) + word();
      r.description = word();
      r.size = pick(9) + 1;
      for (int k = 0; k < r.size; ++k) {
        r.instances.emplace_back("i-" + std::to_string(k) + word());
      }
      r.master = r.instances[static_cast<std::size_t>(pick(r.size))];
      for (int k = pick(3); k > 0; --k) r.volumes.emplace_back("vol-" + word());
      r.instance_type = word();
      r.state = static_cast<ResourceState>(pick(3));
      r.created_at = stamp();
      if (pick(2)) r.terminated_at = stamp();
      if (pick(2)) r.busy_run = word();
      r.busy_pid = pick(100000);
      r.gather_seconds = static_cast<double>(pick(100000)) / 1000.0;
      for (int k = pick(3); k > 0; --k) r.submit_seconds[word()] = pick(1000) / 8.0;
      store.register_resource(r);
      expected.resources.emplace(r.name, r);

      for (int k = pick(3); k > 0; --k) {
        RunRecord run;
        run.resource = r.name;
        run.job = word();
        run.run_name = "run" + std::to_string(k) + word();
        run.script = word() + ".R";
        run.status = static_cast<RunStatus>(pick(4));
        if (pick(2)) run.exit_code = pick(256) - 128;
        if (pick(2)) run.started_at = stamp();
        if (pick(2)) run.finished_at = stamp();
        for (Phase p : kLifecycle) {
          if (pick(2)) run.phase_timings[p] = pick(1000000) / 1024.0;
        }
        if (pick(2)) run.retrieved_to = "/host/" + word();
        if (expected.runs.contains(run.key())) continue;
        store.register_run(run);
        expected.runs.emplace(run.key(), run);
      }
    }
    StateStore reloaded(dir / "state.json");
    auto doc = reloaded.read();
    expected.version = doc.version;
    ASSERT_EQ(doc, expected) << "round " << round;
    EXPECT_EQ(parse_state(serialize_state(doc)), doc);
  }
}

// Concurrent pairs never lose an update or leave a torn document.
TEST(StateStoreProperty, ConcurrentPairs) {
  TempDir dir;
  StateStore a(dir / "state.json");
  StateStore b(dir / "state.json");
  for (int i = 0; i < 50; ++i) {
    const auto before = a.version();
    std::thread t1([&] { a.register_resource(resource("a" + std::to_string(i))); });
    std::thread t2([&] { b.register_resource(resource("b" + std::to_string(i))); });
    t1.join();
    t2.join();
    auto doc = a.read();
    ASSERT_EQ(doc.version, before + 2);
    ASSERT_TRUE(doc.resources.contains("a" + std::to_string(i)));
    ASSERT_TRUE(doc.resources.contains("b" + std::to_string(i)));
  }
}

TEST(StateStoreProperty, VersionStrictlyIncreases) {
  TempDir dir;
  StateStore store(dir / "state.json");
  std::uint64_t last = store.version();
  for (int i = 0; i < 20; ++i) {
    store.mutate([&](StateDocument& doc) { doc.resources["r"] = resource("r"); });
    const auto now = store.version();
    EXPECT_EQ(now, last + 1);
    last = now;
  }
}

}  // namespace
}  // namespace rbc
