#include "cli.hpp"

#include <unistd.h>

#include <charconv>
#include <iostream>

#include "rbc/error.hpp"
#include "rbc/executor.hpp"
#include "rbc/job_dir.hpp"
#include "rbc/provider.hpp"
#include "rbc/retrieval.hpp"
#include "rbc/state_store.hpp"
#include "rbc/version.hpp"

namespace rbc::cli {
namespace fs = std::filesystem;

namespace {

const FlagSpec kGatherFlags[] = {
    {"rname", true}, {"rsize", true}, {"ebsvol", true}, {"snap", true},
    {"type", true},  {"desc", true},  {"report", true},
};
const FlagSpec kSubmitFlags[] = {
    {"rname", true},  {"toallnodes", false}, {"tomaster", false},
    {"jobdir", true}, {"data", true},        {"report", true},
};
const FlagSpec kExecuteFlags[] = {
    {"rname", true},   {"jobdir", true}, {"rscript", true},
    {"runname", true}, {"report", true},
};
const FlagSpec kResultsFlags[] = {
    {"rname", true},  {"frommaster", false}, {"fromall", false},
    {"jobdir", true}, {"runname", true},     {"report", true},
};
const FlagSpec kTerminateFlags[] = {
    {"rname", true}, {"deletevol", false}, {"report", true}};

[[noreturn]] void usage_error(const std::string& message) {
  throw Error(ErrorCode::usage, message);
}

void exclusive(const ParsedFlags& flags, const char* a, const char* b) {
  if (flags.has(a) && flags.has(b)) {
    usage_error(std::string("-") + a + " and -" + b +
                " cannot be specified at the same time");
  }
}

TimingFormat report_format(const ParsedFlags& flags) {
  const auto value = flags.value("report").value_or("text");
  if (value == "text") return TimingFormat::text;
  if (value == "tsv") return TimingFormat::tsv;
  usage_error("-report expects 'text' or 'tsv', got '" + value + "'");
}

int parse_size(const std::string& text) {
  int size = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, size);
  if (ec != std::errc{} || ptr != end || size < 1) {
    usage_error("-rsize expects a positive integer, got '" + text + "'");
  }
  return size;
}

// Everything an operational command needs, built only after parsing
// succeeded so usage errors never touch state.
struct Session {
  Config config;
  StateStore store;
  std::unique_ptr<Provider> provider;
  Executor executor;

  explicit Session(const Context& ctx)
      : config(load_config(std::nullopt, ctx.env)),
        store(StateStore::open(config)),
        provider(make_provider(config)),
        executor(config, store, *provider) {}
};

std::string resource_name(const ParsedFlags& flags, const Config& config) {
  return flags.value("rname").value_or(config.default_resource_name);
}

std::optional<fs::path> jobdir_flag(const ParsedFlags& flags) {
  if (auto v = flags.value("jobdir")) return fs::path(*v);
  return std::nullopt;
}

void print_timing(Context& ctx, const PhaseTiming& timing, TimingFormat format) {
  ctx.out << format_timing(timing, format) << "\n";
}

int cmd_gather(const ParsedFlags& flags, Context& ctx) {
  exclusive(flags, "ebsvol", "snap");
  const auto format = report_format(flags);
  GatherRequest request;
  if (auto size = flags.value("rsize")) request.size = parse_size(*size);

  Session session(ctx);
  request.name = resource_name(flags, session.config);
  request.instance_type = flags.value("type");
  request.description = flags.value("desc").value_or("");
  request.ebs = EbsSpec::from_flags(flags.value("ebsvol"), flags.value("snap"));

  const auto record = session.executor.gather_resource(request);
  ctx.out << "Gathered resource " << record.name << ": " << record.size
          << " x " << record.instance_type
          << (record.size > 1 ? " (cluster)" : " (instance)") << "\n";
  if (!record.description.empty()) {
    ctx.out << "  description: " << record.description << "\n";
  }
  for (const auto& id : record.instances) {
    ctx.out << "  instance " << id << (id == record.master ? "  master" : "  worker")
            << "\n";
  }
  for (const auto& vol : record.volumes) ctx.out << "  volume " << vol << "\n";
  print_timing(ctx, {Phase::gather, record.gather_seconds, record.name, {}},
               format);
  return kExitOk;
}

int cmd_submit(const ParsedFlags& flags, Context& ctx) {
  exclusive(flags, "toallnodes", "tomaster");
  exclusive(flags, "data", "jobdir");
  const auto format = report_format(flags);
  const auto target = flags.has("toallnodes") ? SubmitTarget::all_nodes
                                              : SubmitTarget::master;

  Session session(ctx);
  const auto resource = resource_name(flags, session.config);
  Stopwatch watch;
  PerInstanceStats stats;
  if (auto data = flags.value("data")) {
    fs::path path(*data);
    if (path.is_relative()) path = ctx.cwd / path;
    stats = session.executor.submit_data(resource, path, target);
    ctx.out << "Synchronised data folder " << path.filename().string()
            << " to " << resource << "\n";
  } else {
    const auto jobdir = resolve_job_dir(jobdir_flag(flags), ctx.cwd);
    stats = session.executor.submit_job(resource, jobdir, target);
    ctx.out << "Submitted job " << jobdir.name << " to " << resource << "\n";
  }
  for (const auto& [id, s] : stats) {
    ctx.out << "  " << id << ": " << s.files_copied << " copied, "
            << s.files_deleted << " deleted, " << s.bytes_copied << " bytes\n";
  }
  print_timing(ctx, {Phase::submit, watch.seconds(), resource, {}}, format);
  return kExitOk;
}

int cmd_execute(const ParsedFlags& flags, Context& ctx) {
  const auto run_name = flags.value("runname");
  if (!run_name || run_name->empty()) {
    usage_error("the argument -runname is mandatory");
  }
  const auto format = report_format(flags);

  Session session(ctx);
  const auto resource = resource_name(flags, session.config);
  const auto jobdir = resolve_job_dir(jobdir_flag(flags), ctx.cwd);
  std::string script;
  if (auto given = flags.value("rscript")) {
    script = *given;
  } else {
    script = prompt_for_script(jobdir, ctx.in, ctx.err, ctx.interactive);
  }

  RunRecord run;
  try {
    run = session.executor.execute_job(resource, jobdir, script, *run_name);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::execution_failed) throw;
    const auto failed =
        session.store.lookup_run({resource, jobdir.name, *run_name});
    ctx.err << alias_name(Command::execute) << ": " << e.what() << "\n";
    print_timing(ctx,
                 {Phase::execute,
                  failed.phase_timings.contains(Phase::execute)
                      ? failed.phase_timings.at(Phase::execute)
                      : 0.0,
                  resource, *run_name},
                 format);
    return kExitFailure;
  }
  ctx.out << "Run " << run.run_name << " of " << run.script << " on "
          << resource << " " << to_string(run.status) << " (exit "
          << run.exit_code.value_or(-1) << ")\n";
  print_timing(ctx,
               {Phase::execute, run.phase_timings.at(Phase::execute), resource,
                run.run_name},
               format);
  return kExitOk;
}

int cmd_results(const ParsedFlags& flags, Context& ctx) {
  exclusive(flags, "frommaster", "fromall");
  const auto run_name = flags.value("runname");
  if (!run_name || run_name->empty()) {
    usage_error("the argument -runname is mandatory");
  }
  const auto format = report_format(flags);
  const auto source =
      flags.has("fromall") ? ResultSource::all : ResultSource::master;

  Session session(ctx);
  const auto resource = resource_name(flags, session.config);
  const auto jobdir = resolve_job_dir(jobdir_flag(flags), ctx.cwd);
  const auto report = get_results(session.store, *session.provider, resource,
                                  jobdir, *run_name, source);
  ctx.out << (format == TimingFormat::tsv ? format_report_tsv(report)
                                          : format_report_text(report));
  print_timing(ctx, {Phase::retrieve, report.seconds, resource, *run_name},
               format);
  return kExitOk;
}

int cmd_terminate(const ParsedFlags& flags, Context& ctx) {
  const auto format = report_format(flags);
  Session session(ctx);
  const auto resource = resource_name(flags, session.config);
  const auto summary =
      session.executor.terminate_resource(resource, flags.has("deletevol"));
  ctx.out << "Terminated " << resource << ": "
          << summary.instances_terminated.size() << " instance(s)";
  if (flags.has("deletevol")) {
    ctx.out << ", " << summary.volumes_deleted.size() << " volume(s) deleted";
  }
  ctx.out << "\n";
  for (const auto& run : summary.unretrieved_runs) {
    ctx.err << alias_name(Command::terminate) << ": warning: results of run "
            << run << " were never retrieved and are now gone\n";
  }
  print_timing(ctx, {Phase::terminate, summary.seconds, resource, {}}, format);
  return kExitOk;
}

}  // namespace

std::optional<std::string> ParsedFlags::value(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

std::optional<Command> command_from_name(std::string_view name) {
  for (Command c : {Command::gather, Command::submit, Command::execute,
                    Command::results, Command::terminate}) {
    if (name == subcommand_name(c) || name == alias_name(c)) return c;
  }
  return std::nullopt;
}

std::string_view subcommand_name(Command command) {
  switch (command) {
    case Command::gather: return "gather";
    case Command::submit: return "submit";
    case Command::execute: return "execute";
    case Command::results: return "results";
    case Command::terminate: return "terminate";
  }
  return "?";
}

std::string_view alias_name(Command command) {
  switch (command) {
    case Command::gather: return "RBC_GatherResource";
    case Command::submit: return "RBC_SubmitJob";
    case Command::execute: return "RBC_ExecuteJob";
    case Command::results: return "RBC_GetResults";
    case Command::terminate: return "RBC_TerminateResource";
  }
  return "?";
}

std::span<const FlagSpec> flag_spec(Command command) {
  switch (command) {
    case Command::gather: return kGatherFlags;
    case Command::submit: return kSubmitFlags;
    case Command::execute: return kExecuteFlags;
    case Command::results: return kResultsFlags;
    case Command::terminate: return kTerminateFlags;
  }
  return {};
}

ParsedFlags parse_flags(std::span<const std::string> args,
                        std::span<const FlagSpec> spec) {
  ParsedFlags out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& arg = args[i];
    if (arg.size() < 2 || arg[0] != '-' || arg[1] == '-') {
      usage_error("unexpected argument '" + arg + "'");
    }
    const std::string name = arg.substr(1);
    const FlagSpec* flag = nullptr;
    for (const auto& f : spec) {
      if (f.name == name) flag = &f;
    }
    if (flag == nullptr) usage_error("unrecognized argument '" + arg + "'");
    if (out.has(name)) usage_error("argument '" + arg + "' given twice");
    if (!flag->takes_value) {
      out.switches.insert(name);
      continue;
    }
    if (i + 1 >= args.size()) usage_error("argument '" + arg + "' expects a value");
    out.values.emplace(name, args[++i]);
  }
  return out;
}

std::string usage(Command command) {
  std::string synopsis;
  std::string details;
  switch (command) {
    case Command::gather:
      synopsis =
          "[-h] [-v] [-rname RESOURCE_NAME] [-rsize RESOURCE_SIZE] "
          "[-ebsvol EBS_VOLUME | -snap EBS_SNAP] [-type INSTANCE_TYPE] "
          "[-desc RESOURCE_DESCRIPTION]";
      details =
          "Provision an instance (size 1) or a cluster (size > 1).\n"
          "  -rname    name of the resource (default from configuration)\n"
          "  -rsize    number of instances (default 1)\n"
          "  -ebsvol   attach an existing volume (single instance only)\n"
          "  -snap     create one fresh volume per instance from a snapshot\n"
          "  -type     instance type (default from configuration)\n"
          "  -desc     free-text description\n";
      break;
    case Command::submit:
      synopsis =
          "[-h] [-v] [-rname RESOURCE_NAME [-toallnodes | -tomaster]] "
          "[-jobdir JOB_DIRECTORY] [-data DATA_FOLDER]";
      details =
          "Synchronise the job directory (without RunResults/) to the remote\n"
          "home directory.\n"
          "  -tomaster    submit to the master node only (default)\n"
          "  -toallnodes  submit to every node of the cluster\n"
          "  -jobdir      job directory (default: current directory)\n"
          "  -data        synchronise an arbitrary folder instead of a job\n";
      break;
    case Command::execute:
      synopsis =
          "[-h] [-v] [-rname RESOURCE_NAME] [-jobdir JOB_DIRECTORY] "
          "[-rscript R_SCRIPT] [-runname RUN_NAME]";
      details =
          "Execute a script of a submitted job, locking the resource until it\n"
          "completes.\n"
          "  -rscript  script to run (prompted for when omitted)\n"
          "  -runname  mandatory name distinguishing this run\n";
      break;
    case Command::results:
      synopsis =
          "[-h] [-v] [-rname RESOURCE_NAME [-frommaster | -fromall]] "
          "[-jobdir JOB_DIRECTORY] [-runname RUN_NAME]";
      details =
          "Retrieve the results of a run into RunResults/<run name>/.\n"
          "  -frommaster  results aggregated on the master (default)\n"
          "  -fromall     results of every node, one sub-directory per node\n"
          "  -runname     mandatory name of the run\n";
      break;
    case Command::terminate:
      synopsis = "[-h] [-v] [-rname RESOURCE_NAME] [-deletevol]";
      details =
          "Release all instances of the resource.\n"
          "  -deletevol  also delete the attached volumes\n";
      break;
  }
  return "usage: " + std::string(alias_name(command)) + " " + synopsis +
         "\n\n" + details +
         "  -report     timing/report format: text (default) or tsv\n"
         "  -h          show this help and exit\n"
         "  -v          show the version and exit\n";
}

int run(Command command, std::span<const std::string> args, Context& ctx) {
  const auto name = alias_name(command);
  for (const auto& arg : args) {
    if (arg == "-h") {
      ctx.out << usage(command);
      return kExitOk;
    }
    if (arg == "-v") {
      ctx.out << name << " " << kVersion << "\n";
      return kExitOk;
    }
  }
  try {
    const auto flags = parse_flags(args, flag_spec(command));
    switch (command) {
      case Command::gather: return cmd_gather(flags, ctx);
      case Command::submit: return cmd_submit(flags, ctx);
      case Command::execute: return cmd_execute(flags, ctx);
      case Command::results: return cmd_results(flags, ctx);
      case Command::terminate: return cmd_terminate(flags, ctx);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::usage ||
        e.code() == ErrorCode::volume_spec_conflict) {
      ctx.err << name << ": error: " << e.what() << "\n"
              << "usage: " << name << " -h for help\n";
      return kExitUsage;
    }
    ctx.err << name << ": error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    ctx.err << name << ": error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto self = fs::path(argc > 0 ? argv[0] : "rbc").filename().string();

  Context ctx{std::cin, std::cout, std::cerr};
  ctx.interactive = ::isatty(STDIN_FILENO) != 0;

  if (auto command = command_from_name(self)) return run(*command, args, ctx);

  const std::string general =
      "usage: rbc <command> [flags]\n\n"
      "commands (each also installed as its own program):\n"
      "  gather     RBC_GatherResource     gather resources\n"
      "  submit     RBC_SubmitJob          submit a job\n"
      "  execute    RBC_ExecuteJob         execute a job\n"
      "  results    RBC_GetResults         retrieve results\n"
      "  terminate  RBC_TerminateResource  terminate resources\n\n"
      "Run 'rbc <command> -h' for the flags of a command.\n";
  if (args.empty()) {
    std::cerr << general;
    return kExitUsage;
  }
  if (args.front() == "-h") {
    std::cout << general;
    return kExitOk;
  }
  if (args.front() == "-v") {
    std::cout << "rbc " << kVersion << "\n";
    return kExitOk;
  }
  auto command = command_from_name(args.front());
  if (!command) {
    std::cerr << "rbc: unknown command '" << args.front() << "'\n" << general;
    return kExitUsage;
  }
  args.erase(args.begin());
  return run(*command, args, ctx);
}

}  // namespace rbc::cli
