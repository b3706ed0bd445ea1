#include "rbc/state_store.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "rbc/error.hpp"
#include "rbc/file_lock.hpp"

namespace rbc {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

template <typename Enum, std::size_t N>
Enum enum_from(const std::string& text, const Enum (&values)[N]) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw std::invalid_argument("unknown enum value '" + text + "'");
}

constexpr ResourceState kResourceStates[] = {
    ResourceState::active, ResourceState::busy, ResourceState::terminated};
constexpr RunStatus kRunStatuses[] = {RunStatus::pending, RunStatus::running,
                                      RunStatus::succeeded, RunStatus::failed};

json opt_time(const std::optional<Timestamp>& t) {
  return t ? json(to_nanos(*t)) : json(nullptr);
}

std::optional<Timestamp> get_opt_time(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return from_nanos(j.at(key).get<std::int64_t>());
}

json resource_to_json(const ResourceRecord& r) {
  json instances = json::array();
  for (const auto& id : r.instances) instances.push_back(id.str());
  json volumes = json::array();
  for (const auto& id : r.volumes) volumes.push_back(id.str());
  return {
      {"name", r.name},
      {"description", r.description},
      {"size", r.size},
      {"instances", instances},
      {"master", r.master.str()},
      {"volumes", volumes},
      {"instance_type", r.instance_type},
      {"state", to_string(r.state)},
      {"created_at", to_nanos(r.created_at)},
      {"terminated_at", opt_time(r.terminated_at)},
      {"busy_run", r.busy_run ? json(*r.busy_run) : json(nullptr)},
      {"busy_pid", r.busy_pid},
      {"gather_seconds", r.gather_seconds},
      {"submit_seconds", r.submit_seconds},
  };
}

ResourceRecord resource_from_json(const json& j) {
  ResourceRecord r;
  r.name = j.at("name").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.size = j.at("size").get<int>();
  for (const auto& id : j.at("instances")) {
    r.instances.emplace_back(id.get<std::string>());
  }
  r.master = InstanceId{j.at("master").get<std::string>()};
  for (const auto& id : j.at("volumes")) {
    r.volumes.emplace_back(id.get<std::string>());
  }
  r.instance_type = j.at("instance_type").get<std::string>();
  r.state = enum_from(j.at("state").get<std::string>(), kResourceStates);
  r.created_at = from_nanos(j.at("created_at").get<std::int64_t>());
  r.terminated_at = get_opt_time(j, "terminated_at");
  if (!j.at("busy_run").is_null()) r.busy_run = j.at("busy_run").get<std::string>();
  r.busy_pid = j.at("busy_pid").get<int>();
  r.gather_seconds = j.at("gather_seconds").get<double>();
  r.submit_seconds =
      j.at("submit_seconds").get<std::map<std::string, double>>();
  return r;
}

json run_to_json(const RunRecord& r) {
  json timings = json::object();
  for (const auto& [phase, seconds] : r.phase_timings) {
    timings[std::string(to_string(phase))] = seconds;
  }
  return {
      {"run_name", r.run_name},
      {"resource", r.resource},
      {"job", r.job},
      {"script", r.script},
      {"status", to_string(r.status)},
      {"exit_code", r.exit_code ? json(*r.exit_code) : json(nullptr)},
      {"started_at", opt_time(r.started_at)},
      {"finished_at", opt_time(r.finished_at)},
      {"phase_timings", timings},
      {"retrieved_to", r.retrieved_to ? json(*r.retrieved_to) : json(nullptr)},
  };
}

RunRecord run_from_json(const json& j) {
  RunRecord r;
  r.run_name = j.at("run_name").get<std::string>();
  r.resource = j.at("resource").get<std::string>();
  r.job = j.at("job").get<std::string>();
  r.script = j.at("script").get<std::string>();
  r.status = enum_from(j.at("status").get<std::string>(), kRunStatuses);
  if (!j.at("exit_code").is_null()) r.exit_code = j.at("exit_code").get<int>();
  r.started_at = get_opt_time(j, "started_at");
  r.finished_at = get_opt_time(j, "finished_at");
  for (const auto& [key, value] : j.at("phase_timings").items()) {
    auto phase = parse_phase(key);
    if (!phase) throw std::invalid_argument("unknown phase '" + key + "'");
    r.phase_timings[*phase] = value.get<double>();
  }
  if (!j.at("retrieved_to").is_null()) {
    r.retrieved_to = j.at("retrieved_to").get<std::string>();
  }
  return r;
}

}  // namespace

const ResourceRecord& StateDocument::resource(const std::string& name) const {
  auto it = resources.find(name);
  if (it == resources.end()) {
    fail(ErrorCode::resource_not_found, "no resource named '" + name + "'");
  }
  return it->second;
}

ResourceRecord& StateDocument::resource(const std::string& name) {
  return const_cast<ResourceRecord&>(
      static_cast<const StateDocument&>(*this).resource(name));
}

const RunRecord& StateDocument::run(const RunKey& key) const {
  auto it = runs.find(key);
  if (it == runs.end()) {
    fail(ErrorCode::run_not_found, "no run '" + key.run_name + "' of job '" +
                                       key.job + "' on resource '" +
                                       key.resource + "'");
  }
  return it->second;
}

RunRecord& StateDocument::run(const RunKey& key) {
  return const_cast<RunRecord&>(static_cast<const StateDocument&>(*this).run(key));
}

std::string serialize_state(const StateDocument& doc) {
  json resources = json::array();
  for (const auto& [name, r] : doc.resources) {
    resources.push_back(resource_to_json(r));
  }
  json runs = json::array();
  for (const auto& [key, r] : doc.runs) runs.push_back(run_to_json(r));
  json root = {{"schema", kSchemaVersion},
               {"version", doc.version},
               {"resources", resources},
               {"runs", runs}};
  return root.dump(2) + "\n";
}

StateDocument parse_state(std::string_view text) {
  try {
    const json root = json::parse(text);
    if (root.at("schema").get<int>() != kSchemaVersion) {
      fail(ErrorCode::corrupt_state, "unsupported schema version");
    }
    StateDocument doc;
    doc.version = root.at("version").get<std::uint64_t>();
    for (const auto& j : root.at("resources")) {
      auto r = resource_from_json(j);
      auto name = r.name;
      if (!doc.resources.emplace(name, std::move(r)).second) {
        fail(ErrorCode::corrupt_state, "duplicate resource '" + name + "'");
      }
    }
    for (const auto& j : root.at("runs")) {
      auto r = run_from_json(j);
      auto key = r.key();
      if (!doc.runs.emplace(key, std::move(r)).second) {
        fail(ErrorCode::corrupt_state, "duplicate run '" + key.run_name + "'");
      }
    }
    return doc;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::corrupt_state, e.what());
  }
}

StateStore::StateStore(fs::path path) : path_(std::move(path)) {}

StateStore StateStore::open(const Config& config) {
  StateStore store(config.state_path);
  // Surface corruption at open time, never reset it.
  (void)store.read();
  return store;
}

fs::path StateStore::lock_path() const {
  auto p = path_;
  p += ".lock";
  return p;
}

StateDocument StateStore::load_unlocked() const {
  if (!fs::exists(path_)) return {};
  std::string text;
  try {
    text = read_file(path_);
  } catch (const Error& e) {
    fail(ErrorCode::corrupt_state, e.what());
  }
  auto doc = parse_state(text);
  return doc;
}

StateDocument StateStore::read() const {
  FileLock lock(lock_path(), FileLock::Mode::shared);
  return load_unlocked();
}

StateDocument StateStore::mutate(const std::function<void(StateDocument&)>& fn) {
  FileLock lock(lock_path(), FileLock::Mode::exclusive);
  StateDocument doc = load_unlocked();
  const auto before = doc.version;
  fn(doc);
  doc.version = before + 1;
  atomic_write(path_, serialize_state(doc));
  return doc;
}

void StateStore::register_resource(const ResourceRecord& record) {
  mutate([&](StateDocument& doc) {
    if (doc.resources.contains(record.name)) {
      fail(ErrorCode::duplicate_resource_name,
           "multiple resources cannot share the name '" + record.name + "'");
    }
    doc.resources.emplace(record.name, record);
  });
}

void StateStore::register_run(const RunRecord& run) {
  mutate([&](StateDocument& doc) {
    if (doc.runs.contains(run.key())) {
      fail(ErrorCode::duplicate_run_name,
           "run '" + run.run_name + "' already exists for job '" + run.job +
               "' on '" + run.resource + "'");
    }
    doc.runs.emplace(run.key(), run);
  });
}

void StateStore::remove_resource(const std::string& name) {
  mutate([&](StateDocument& doc) {
    (void)doc.resource(name);
    doc.resources.erase(name);
  });
}

ResourceRecord StateStore::lookup_resource(const std::string& name) const {
  return read().resource(name);
}

RunRecord StateStore::lookup_run(const RunKey& key) const {
  return read().run(key);
}

std::vector<RunRecord> StateStore::runs_for(const std::string& resource,
                                            const std::string& job) const {
  const auto doc = read();
  std::vector<RunRecord> out;
  for (const auto& [key, run] : doc.runs) {
    if (key.resource == resource && key.job == job) out.push_back(run);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RunRecord& a, const RunRecord& b) {
                     const auto ta = a.started_at.value_or(Timestamp::max());
                     const auto tb = b.started_at.value_or(Timestamp::max());
                     return ta < tb;
                   });
  return out;
}

}  // namespace rbc
