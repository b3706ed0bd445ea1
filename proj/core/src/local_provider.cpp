#include "rbc/local_provider.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstdio>
#include <set>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "rbc/error.hpp"
#include "rbc/file_lock.hpp"
#include "rbc/instance_types.hpp"
#include "rbc/process.hpp"

namespace rbc {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(InstanceState state) noexcept {
  switch (state) {
    case InstanceState::pending: return "pending";
    case InstanceState::running: return "running";
    case InstanceState::terminated: return "terminated";
  }
  return "?";
}

fs::path RemoteTree::host_path(std::string_view relative) const {
  return host_root / (RemotePath{} / relative).relative();
}

struct LocalProvider::Metadata {
  std::uint64_t next_instance = 1;
  std::uint64_t next_volume = 1;
  std::uint64_t next_snapshot = 1;
  std::map<InstanceId, InstanceHandle> instances;
  std::map<VolumeId, VolumeRecord> volumes;
  std::set<SnapshotId> snapshots;
  std::vector<LedgerEntry> ledger;
};

namespace {

constexpr InstanceState kInstanceStates[] = {
    InstanceState::pending, InstanceState::running, InstanceState::terminated};

InstanceState parse_instance_state(const std::string& s) {
  for (auto st : kInstanceStates) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown instance state '" + s + "'");
}

std::string make_id(const char* prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%08llu", prefix,
                static_cast<unsigned long long>(n));
  return buf;
}

json opt_time(const std::optional<Timestamp>& t) {
  return t ? json(to_nanos(*t)) : json(nullptr);
}

std::optional<Timestamp> get_opt_time(const json& j) {
  if (j.is_null()) return std::nullopt;
  return from_nanos(j.get<std::int64_t>());
}

fs::path unique_temp(const fs::path& dir) {
  static std::atomic<unsigned> counter{0};
  return dir / (".tmp-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
}

void copy_tree(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_directories(to, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + to.string());
  fs::copy(from, to,
           fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
  if (ec) {
    fail(ErrorCode::io_error, "cannot copy " + from.string() + " to " +
                                  to.string() + ": " + ec.message());
  }
}

}  // namespace

namespace {

std::string serialize(const LocalProvider::Metadata& m) {
  json instances = json::array();
  for (const auto& [id, h] : m.instances) {
    json history = json::array();
    for (auto st : h.history) history.push_back(to_string(st));
    instances.push_back({{"id", id.str()},
                         {"type", h.type_name},
                         {"state", to_string(h.state)},
                         {"sandbox_root", h.sandbox_root},
                         {"launched_at", to_nanos(h.launched_at)},
                         {"terminated_at", opt_time(h.terminated_at)},
                         {"history", history}});
  }
  json volumes = json::array();
  for (const auto& [id, v] : m.volumes) {
    volumes.push_back(
        {{"id", id.str()},
         {"source_snapshot",
          v.source_snapshot ? json(v.source_snapshot->str()) : json(nullptr)},
         {"attached_to",
          v.attached_to ? json(v.attached_to->str()) : json(nullptr)},
         {"deleted", v.deleted}});
  }
  json snapshots = json::array();
  for (const auto& id : m.snapshots) snapshots.push_back(id.str());
  json ledger = json::array();
  for (const auto& e : m.ledger) {
    ledger.push_back({{"instance", e.instance.str()},
                      {"type", e.type_name},
                      {"start", to_nanos(e.start)},
                      {"stop", opt_time(e.stop)}});
  }
  json root = {{"next_instance", m.next_instance},
               {"next_volume", m.next_volume},
               {"next_snapshot", m.next_snapshot},
               {"instances", instances},
               {"volumes", volumes},
               {"snapshots", snapshots},
               {"ledger", ledger}};
  return root.dump(1) + "\n";
}

LocalProvider::Metadata parse(const std::string& text) {
  LocalProvider::Metadata m;
  const json root = json::parse(text);
  m.next_instance = root.at("next_instance").get<std::uint64_t>();
  m.next_volume = root.at("next_volume").get<std::uint64_t>();
  m.next_snapshot = root.at("next_snapshot").get<std::uint64_t>();
  for (const auto& j : root.at("instances")) {
    InstanceHandle h;
    h.id = InstanceId{j.at("id").get<std::string>()};
    h.type_name = j.at("type").get<std::string>();
    h.state = parse_instance_state(j.at("state").get<std::string>());
    h.sandbox_root = j.at("sandbox_root").get<std::string>();
    h.launched_at = from_nanos(j.at("launched_at").get<std::int64_t>());
    h.terminated_at = get_opt_time(j.at("terminated_at"));
    for (const auto& st : j.at("history")) {
      h.history.push_back(parse_instance_state(st.get<std::string>()));
    }
    m.instances.emplace(h.id, std::move(h));
  }
  for (const auto& j : root.at("volumes")) {
    VolumeRecord v;
    v.id = VolumeId{j.at("id").get<std::string>()};
    if (!j.at("source_snapshot").is_null()) {
      v.source_snapshot = SnapshotId{j.at("source_snapshot").get<std::string>()};
    }
    if (!j.at("attached_to").is_null()) {
      v.attached_to = InstanceId{j.at("attached_to").get<std::string>()};
    }
    v.deleted = j.at("deleted").get<bool>();
    m.volumes.emplace(v.id, std::move(v));
  }
  for (const auto& j : root.at("snapshots")) {
    m.snapshots.emplace(j.get<std::string>());
  }
  for (const auto& j : root.at("ledger")) {
    m.ledger.push_back({InstanceId{j.at("instance").get<std::string>()},
                        j.at("type").get<std::string>(),
                        from_nanos(j.at("start").get<std::int64_t>()),
                        get_opt_time(j.at("stop"))});
  }
  return m;
}

}  // namespace

LocalProvider::LocalProvider(fs::path workdir, RemotePath remote_home,
                             Clock clock)
    : workdir_(fs::absolute(std::move(workdir))),
      remote_home_(std::move(remote_home)),
      clock_(std::move(clock)) {}

fs::path LocalProvider::instance_root(const InstanceId& id) const {
  return workdir_ / "instances" / id.str();
}

fs::path LocalProvider::volume_root(const VolumeId& id) const {
  return workdir_ / "volumes" / id.str();
}

fs::path LocalProvider::snapshot_root(const SnapshotId& id) const {
  return workdir_ / "snapshots" / id.str();
}

template <typename Fn>
auto LocalProvider::with_metadata(bool exclusive, Fn&& fn) {
  const auto meta_path = workdir_ / "provider.json";
  FileLock lock(workdir_ / "provider.lock",
                exclusive ? FileLock::Mode::exclusive : FileLock::Mode::shared);
  Metadata meta;
  if (fs::exists(meta_path)) {
    try {
      meta = parse(read_file(meta_path));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::corrupt_state,
           "provider metadata " + meta_path.string() + ": " + e.what());
    }
  }
  using Result = std::invoke_result_t<Fn, Metadata&>;
  if constexpr (std::is_void_v<Result>) {
    fn(meta);
    if (exclusive) atomic_write(meta_path, serialize(meta));
  } else {
    Result result = fn(meta);
    if (exclusive) atomic_write(meta_path, serialize(meta));
    return result;
  }
}

namespace {

InstanceHandle& find_instance(LocalProvider::Metadata& m, const InstanceId& id) {
  auto it = m.instances.find(id);
  if (it == m.instances.end()) {
    fail(ErrorCode::instance_not_found, "no instance '" + id.str() + "'");
  }
  return it->second;
}

InstanceHandle& running_instance(LocalProvider::Metadata& m,
                                 const InstanceId& id) {
  auto& h = find_instance(m, id);
  if (h.state != InstanceState::running) {
    fail(ErrorCode::instance_not_running,
         "instance '" + id.str() + "' is " + std::string(to_string(h.state)));
  }
  return h;
}

VolumeRecord& find_volume(LocalProvider::Metadata& m, const VolumeId& id) {
  auto it = m.volumes.find(id);
  if (it == m.volumes.end()) {
    fail(ErrorCode::volume_not_found, "no volume '" + id.str() + "'");
  }
  return it->second;
}

}  // namespace

SnapshotId LocalProvider::register_snapshot(const fs::path& template_tree) {
  if (!fs::is_directory(template_tree)) {
    fail(ErrorCode::path_not_found,
         "snapshot template is not a directory: " + template_tree.string());
  }
  const auto snapshots = workdir_ / "snapshots";
  fs::create_directories(snapshots);
  const auto staging = unique_temp(snapshots);
  copy_tree(template_tree, staging);
  return with_metadata(true, [&](Metadata& m) {
    SnapshotId id{make_id("snap", m.next_snapshot++)};
    fs::rename(staging, snapshot_root(id));
    m.snapshots.insert(id);
    return id;
  });
}

VolumeRecord LocalProvider::create_volume(const SnapshotId& snapshot) {
  const bool is_default = snapshot.str() == kDefaultSnapshot;
  const bool known = with_metadata(false, [&](Metadata& m) {
    return m.snapshots.contains(snapshot);
  });
  if (!known && !is_default) {
    fail(ErrorCode::snapshot_not_found, "no snapshot '" + snapshot.str() + "'");
  }
  if (!known) {
    with_metadata(true, [&](Metadata& m) {
      if (m.snapshots.contains(snapshot)) return;
      fs::create_directories(snapshot_root(snapshot));
      m.snapshots.insert(snapshot);
    });
  }

  const auto volumes = workdir_ / "volumes";
  fs::create_directories(volumes);
  const auto staging = unique_temp(volumes);
  copy_tree(snapshot_root(snapshot), staging);
  return with_metadata(true, [&](Metadata& m) {
    VolumeRecord v;
    v.id = VolumeId{make_id("vol", m.next_volume++)};
    v.source_snapshot = snapshot;
    fs::rename(staging, volume_root(v.id));
    m.volumes.emplace(v.id, v);
    return v;
  });
}

void LocalProvider::delete_volume(const VolumeId& volume) {
  with_metadata(true, [&](Metadata& m) {
    auto& v = find_volume(m, volume);
    if (v.deleted) {
      fail(ErrorCode::volume_deleted,
           "volume '" + volume.str() + "' was already deleted");
    }
    if (v.attached_to) {
      auto it = m.instances.find(*v.attached_to);
      if (it != m.instances.end() &&
          it->second.state != InstanceState::terminated) {
        fail(ErrorCode::volume_in_use, "volume '" + volume.str() +
                                           "' is attached to running instance '" +
                                           v.attached_to->str() + "'");
      }
      v.attached_to.reset();
    }
    v.deleted = true;
  });
  std::error_code ec;
  fs::remove_all(volume_root(volume), ec);
}

std::vector<InstanceHandle> LocalProvider::provision(int count,
                                                     const std::string& type_name,
                                                     const VolumePlan& plan) {
  if (count < 1) {
    fail(ErrorCode::invalid_argument,
         "instance count must be at least 1, got " + std::to_string(count));
  }
  if (find_instance_type(type_name) == nullptr) {
    fail(ErrorCode::unknown_instance_type,
         "'" + type_name + "' is not in the instance-type catalog");
  }
  if (const auto* attach = std::get_if<AttachVolume>(&plan)) {
    if (count != 1) {
      fail(ErrorCode::invalid_argument,
           "an existing volume can only be attached to a single instance");
    }
    with_metadata(false, [&](Metadata& m) {
      auto& v = find_volume(m, attach->volume);
      if (v.deleted) {
        fail(ErrorCode::volume_deleted,
             "volume '" + v.id.str() + "' was deleted");
      }
      if (v.attached_to) {
        auto it = m.instances.find(*v.attached_to);
        if (it != m.instances.end() &&
            it->second.state != InstanceState::terminated) {
          fail(ErrorCode::volume_in_use,
               "volume '" + v.id.str() + "' is attached to '" +
                   v.attached_to->str() + "'");
        }
      }
    });
  }
  if (const auto* snap = std::get_if<VolumeFromSnapshot>(&plan)) {
    const bool known = with_metadata(false, [&](Metadata& m) {
      return m.snapshots.contains(snap->snapshot);
    });
    if (!known && snap->snapshot.str() != kDefaultSnapshot) {
      fail(ErrorCode::snapshot_not_found,
           "no snapshot '" + snap->snapshot.str() + "'");
    }
  }

  // Allocate handles in state pending.
  auto handles = with_metadata(true, [&](Metadata& m) {
    std::vector<InstanceHandle> out;
    const auto now = clock_();
    for (int i = 0; i < count; ++i) {
      InstanceHandle h;
      h.id = InstanceId{make_id("i", m.next_instance++)};
      h.type_name = type_name;
      h.state = InstanceState::pending;
      h.sandbox_root = instance_root(h.id).string();
      h.launched_at = now;
      h.history.push_back(InstanceState::pending);
      m.instances.emplace(h.id, h);
      out.push_back(std::move(h));
    }
    return out;
  });

  std::vector<std::pair<InstanceId, VolumeId>> attachments;
  try {
    for (const auto& h : handles) {
      const auto root = instance_root(h.id);
      fs::create_directories(root / remote_home_.relative());
      fs::create_directories(root / "tmp");
      std::optional<VolumeId> vol;
      if (const auto* snap = std::get_if<VolumeFromSnapshot>(&plan)) {
        vol = create_volume(snap->snapshot).id;
      } else if (const auto* attach = std::get_if<AttachVolume>(&plan)) {
        vol = attach->volume;
      }
      if (vol) {
        fs::create_symlink(fs::path("..") / ".." / "volumes" / vol->str(),
                           root / "data");
        attachments.emplace_back(h.id, *vol);
      }
    }
  } catch (...) {
    for (const auto& h : handles) terminate(h.id);
    throw;
  }

  return with_metadata(true, [&](Metadata& m) {
    const auto now = clock_();
    std::vector<InstanceHandle> out;
    for (const auto& h : handles) {
      auto& stored = m.instances.at(h.id);
      stored.state = InstanceState::running;
      stored.history.push_back(InstanceState::running);
      m.ledger.push_back({h.id, type_name, now, std::nullopt});
      out.push_back(stored);
    }
    for (const auto& [inst, vol] : attachments) {
      find_volume(m, vol).attached_to = inst;
    }
    return out;
  });
}

void LocalProvider::terminate(const InstanceId& instance) {
  const bool changed = with_metadata(true, [&](Metadata& m) {
    auto& h = find_instance(m, instance);
    if (h.state == InstanceState::terminated) return false;
    const auto now = clock_();
    h.state = InstanceState::terminated;
    h.terminated_at = now;
    h.history.push_back(InstanceState::terminated);
    for (auto& e : m.ledger) {
      if (e.instance == instance && !e.stop) e.stop = std::max(now, e.start);
    }
    for (auto& [id, v] : m.volumes) {
      if (v.attached_to == instance) v.attached_to.reset();
    }
    return true;
  });
  if (changed) {
    std::error_code ec;
    fs::remove_all(instance_root(instance), ec);
  }
}

ExecResult LocalProvider::exec_command(const InstanceId& instance,
                                       const ExecRequest& request) {
  with_metadata(false, [&](Metadata& m) { (void)running_instance(m, instance); });

  const auto root = instance_root(instance);
  const auto cwd = root / request.cwd.relative();
  if (!fs::is_directory(cwd)) {
    fail(ErrorCode::path_not_found, "remote directory " + request.cwd.str() +
                                        " does not exist on " + instance.str());
  }
  const RemotePath log_dir = request.log_dir.value_or(request.cwd);
  fs::create_directories(root / log_dir.relative());

  ExecResult result;
  result.stdout_log = log_dir / "stdout.log";
  result.stderr_log = log_dir / "stderr.log";

  ProcessSpec spec;
  spec.argv = request.argv;
  if (const char* path = std::getenv("PATH")) spec.env["PATH"] = path;
  if (const char* lang = std::getenv("LANG")) spec.env["LANG"] = lang;
  spec.env["HOME"] = (root / remote_home_.relative()).string();
  spec.env["TMPDIR"] = (root / "tmp").string();
  for (const auto& [k, v] : request.env) spec.env[k] = v;
  spec.cwd = cwd;
  spec.stdout_path = root / result.stdout_log.relative();
  spec.stderr_path = root / result.stderr_log.relative();

  Stopwatch watch;
  result.exit_code = run_process(spec);
  result.wall_seconds = watch.seconds();
  return result;
}

RemoteTree LocalProvider::open_remote_tree(const InstanceId& instance) {
  with_metadata(false, [&](Metadata& m) { (void)running_instance(m, instance); });
  RemoteTree tree{instance, remote_home_,
                  instance_root(instance) / remote_home_.relative()};
  fs::create_directories(tree.host_root);
  return tree;
}

double LocalProvider::accrued_seconds(const InstanceId& instance) {
  return with_metadata(false, [&](Metadata& m) {
    (void)find_instance(m, instance);
    const auto now = clock_();
    double total = 0.0;
    for (const auto& e : m.ledger) {
      if (e.instance != instance) continue;
      total += std::max(0.0, seconds_between(e.start, e.stop.value_or(now)));
    }
    return total;
  });
}

InstanceHandle LocalProvider::describe_instance(const InstanceId& instance) {
  return with_metadata(false,
                       [&](Metadata& m) { return find_instance(m, instance); });
}

VolumeRecord LocalProvider::describe_volume(const VolumeId& volume) {
  return with_metadata(false, [&](Metadata& m) { return find_volume(m, volume); });
}

std::vector<InstanceHandle> LocalProvider::instances() {
  return with_metadata(false, [&](Metadata& m) {
    std::vector<InstanceHandle> out;
    for (const auto& [id, h] : m.instances) out.push_back(h);
    return out;
  });
}

std::vector<VolumeRecord> LocalProvider::volumes() {
  return with_metadata(false, [&](Metadata& m) {
    std::vector<VolumeRecord> out;
    for (const auto& [id, v] : m.volumes) out.push_back(v);
    return out;
  });
}

std::vector<LedgerEntry> LocalProvider::ledger() {
  return with_metadata(false, [&](Metadata& m) { return m.ledger; });
}

std::unique_ptr<Provider> make_provider(const Config& config, Clock clock) {
  if (config.provider == "local") {
    return std::make_unique<LocalProvider>(
        config.provider_workdir, RemotePath{config.effective_remote_home()},
        std::move(clock));
  }
  if (config.provider == "ec2") return std::make_unique<Ec2Provider>();
  fail(ErrorCode::malformed_config,
       "unknown provider '" + config.provider + "' (expected local or ec2)");
}

}  // namespace rbc
