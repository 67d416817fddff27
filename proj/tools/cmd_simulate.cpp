#include <iostream>
#include <memory>

#include "casad/byte_series.hpp"
#include "casad/errors.hpp"
#include "casad/frame.hpp"
#include "casad/schedule_io.hpp"
#include "casad/simulator.hpp"
#include "common.hpp"

namespace casadcli {

namespace {

struct SimulateArgs {
  std::string schedule_file;
  std::string config_file;
  std::string out = "bus.candump";
  std::string annotations = "annotations.csv";
  std::string emit_schedule;
  double duration = -1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  std::string attack_kind;
  double attack_start = 20.0;
  double attack_duration = 20.0;
  bool open_ended = false;
  std::string target_ecu;
  std::string target_id = "0x05";
  std::string injector = "A";
  double rate_multiplier = 2.0;
  std::string mutate;
  bool unconstrained = false;
};

casad::AttackSchedule flag_attack(const SimulateArgs& args) {
  using casad::AttackKind;
  casad::AttackSchedule a;
  const auto kind = casad::attack_kind_from_name(args.attack_kind);
  if (!kind) {
    throw casad::InvalidConfig("unknown attack kind: " + args.attack_kind);
  }
  a.kind = *kind;
  a.start_s = args.attack_start;
  if (!args.open_ended) a.duration_s = args.attack_duration;
  a.target_id = static_cast<std::uint32_t>(
      std::stoul(args.target_id, nullptr, 0));
  a.target_ecu = args.target_ecu;
  if (a.kind == AttackKind::Suspension && a.target_ecu.empty()) {
    a.target_ecu = "B";
  }
  a.injector_ecu = args.injector;
  a.rate_multiplier = args.rate_multiplier;
  a.constrained_to_observed_range = !args.unconstrained;

  // Per-kind reference mutations when none is given: forged frames differ
  // in the last payload byte; conquest rewrites the last two bytes from
  // the observed value pool.
  std::string mutate = args.mutate;
  if (mutate.empty()) {
    switch (a.kind) {
      case AttackKind::Fabrication:
      case AttackKind::Masquerade:
        mutate = "set:7=FF";
        break;
      case AttackKind::Conquest:
        mutate = "pool:6 pool:7";
        break;
      case AttackKind::Suspension:
        break;
    }
  }
  if (!mutate.empty()) {
    try {
      a.mutations = casad::parse_mutation_list(mutate);
    } catch (const casad::Error& e) {
      throw casad::InvalidConfig("bad --mutate value: " + std::string(e.what()));
    }
  }
  return a;
}

void run_simulate(const SimulateArgs& args, const CLI::App* cmd) {
  SimulateArgs a = args;
  if (!a.config_file.empty()) {
    const ConfigSection cfg = ConfigSection::load(a.config_file, "simulate");
    cfg.apply_string(cmd, "--schedule", "schedule", a.schedule_file);
    cfg.apply_string(cmd, "--out", "out", a.out);
    cfg.apply_string(cmd, "--annotations", "annotations", a.annotations);
    cfg.apply_double(cmd, "--duration", "duration_s", a.duration);
  }

  casad::BusSchedule schedule = a.schedule_file.empty()
                                    ? casad::default_prototype()
                                    : casad::parse_schedule_file(a.schedule_file);
  if (a.duration > 0.0) schedule.sim_duration_s = a.duration;
  if (a.seed_given) schedule.rng_seed = a.seed;
  if (!a.attack_kind.empty()) schedule.attacks.push_back(flag_attack(a));

  log_info("simulate: seed = " + std::to_string(schedule.rng_seed));
  const casad::FrameLog log = casad::run_simulation(schedule);
  casad::write_candump(log, a.out);
  casad::write_annotations(log.annotations, a.annotations);
  if (!a.emit_schedule.empty()) {
    std::ofstream out(a.emit_schedule);
    if (!out) {
      throw casad::EmptyResult("cannot open schedule output: " + a.emit_schedule);
    }
    out << casad::serialize_schedule(schedule);
  }

  std::size_t bytes = 0;
  for (const auto& f : log.frames) bytes += f.payload.size();
  std::cout << "frames: " << log.frames.size() << "\n"
            << "bytes: " << bytes << "\n"
            << "attacks: " << log.annotations.size() << "\n"
            << "log: " << a.out << "\n"
            << "annotations: " << a.annotations << "\n";
}

}  // namespace

void register_simulate(CLI::App& app) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand(
      "simulate", "Generate CAN traffic (optionally attacked) as candump text");
  cmd->add_option("--schedule", args->schedule_file,
                  "Schedule file (default: the built-in three-ECU prototype)");
  cmd->add_option("--config", args->config_file, "casad-config file");
  cmd->add_option("--out", args->out, "Output candump file")
      ->capture_default_str();
  cmd->add_option("--annotations", args->annotations,
                  "Output annotation CSV")
      ->capture_default_str();
  cmd->add_option("--emit-schedule", args->emit_schedule,
                  "Also write the effective schedule text here");
  cmd->add_option("--duration", args->duration, "Override duration (seconds)");
  cmd->add_option("--seed", args->seed, "Override the simulation seed")
      ->each([args](const std::string&) { args->seed_given = true; });

  cmd->add_option("--attack", args->attack_kind,
                  "Add an attack: suspension|fabrication|masquerade|conquest");
  cmd->add_option("--start", args->attack_start, "Attack onset (seconds)")
      ->capture_default_str();
  cmd->add_option("--attack-duration", args->attack_duration,
                  "Attack window length (seconds)")
      ->capture_default_str();
  cmd->add_flag("--open-ended", args->open_ended,
                "Attack runs to the end of the simulation");
  cmd->add_option("--target-ecu", args->target_ecu,
                  "Attack target ECU (default: owner of --target-id; B for "
                  "suspension)");
  cmd->add_option("--target-id", args->target_id, "Attack target frame id")
      ->capture_default_str();
  cmd->add_option("--injector", args->injector,
                  "Injecting ECU for fabrication/masquerade")
      ->capture_default_str();
  cmd->add_option("--rate-multiplier", args->rate_multiplier,
                  "Fabrication injection rate vs the original frequency")
      ->capture_default_str();
  cmd->add_option("--mutate", args->mutate,
                  "Mutations, e.g. 'set:7=FF add:0=3 pool:6'");
  cmd->add_flag("--unconstrained", args->unconstrained,
                "Pool mutations draw from the full byte range");

  cmd->callback([args, cmd] { run_simulate(*args, cmd); });
}

}  // namespace casadcli
