// latticewalk command-line front end: batch simulation, detection modeling
// and analysis of 2D discrete-time quantum walks. Talks to the core
// exclusively through the shared library's C API.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "latticewalk.h"

namespace fs = std::filesystem;

namespace {

// ---- C API plumbing ---------------------------------------------------

struct CApiError {
  int code;
  std::string message;
};

void check(int status) {
  if (status != LW_OK) throw CApiError{status, lw_error_message()};
}

struct ScheduleDeleter { void operator()(lw_schedule* p) const { lw_schedule_free(p); } };
struct StateDeleter { void operator()(lw_state* p) const { lw_state_free(p); } };
struct DistDeleter { void operator()(lw_dist* p) const { lw_dist_free(p); } };
struct PhaseDeleter { void operator()(lw_phase_model* p) const { lw_phase_model_free(p); } };
struct RecordsDeleter { void operator()(lw_records* p) const { lw_records_free(p); } };

using SchedulePtr = std::unique_ptr<lw_schedule, ScheduleDeleter>;
using StatePtr = std::unique_ptr<lw_state, StateDeleter>;
using DistPtr = std::unique_ptr<lw_dist, DistDeleter>;
using PhasePtr = std::unique_ptr<lw_phase_model, PhaseDeleter>;
using RecordsPtr = std::unique_ptr<lw_records, RecordsDeleter>;

int env_threads() {
  const char* raw = std::getenv("LATTICEWALK_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 0) {
    throw cli::ConfigError("LATTICEWALK_THREADS must be a nonnegative integer");
  }
  return static_cast<int>(value);
}

SchedulePtr make_schedule(const cli::RunConfig& config) {
  lw_schedule* raw = nullptr;
  if (config.coin == "angles") {
    int scope = LW_EOM_NONE;
    if (config.eom_scope == "everywhere") scope = LW_EOM_EVERYWHERE;
    if (config.eom_scope == "diagonal") scope = LW_EOM_DIAGONAL;
    check(lw_schedule_angles(config.theta, config.eom_phase,
                             config.eom_crosstalk, scope,
                             config.order == "staged" ? 1 : 0, &raw));
  } else {
    check(lw_schedule_named(config.coin.c_str(), &raw));
  }
  return SchedulePtr(raw);
}

StatePtr make_initial_state(const cli::RunConfig& config) {
  lw_state* raw = nullptr;
  check(lw_state_localized(config.initial_x1, config.initial_x2,
                           config.initial_c1, config.initial_c2, &raw));
  return StatePtr(raw);
}

// ---- formatting and file helpers --------------------------------------

std::string fmt12(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

std::string fmt17(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: stable newlines
  if (!out) throw CApiError{LW_ERR_IO, "cannot open " + path.string()};
  return out;
}

std::string step_tag(int step) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%02d", step);
  return buffer;
}

bool wants(const cli::RunConfig& config, const std::string& artifact) {
  for (const auto& a : config.artifacts) {
    if (a == artifact) return true;
  }
  return false;
}

// Writes the position table of a distribution with 12 significant digits.
void write_position_table(const fs::path& path, const lw_dist* dist) {
  auto out = open_output(path);
  out << "x1\tx2\tprobability\n";
  int64_t count = 0;
  check(lw_dist_entry_count(dist, &count));
  for (int64_t i = 0; i < count; ++i) {
    int x1 = 0, x2 = 0;
    double w = 0.0;
    check(lw_dist_entry(dist, i, &x1, &x2, &w));
    out << x1 << '\t' << x2 << '\t' << fmt12(w) << '\n';
  }
}

void write_coin_table(const fs::path& path, const lw_dist* dist) {
  auto out = open_output(path);
  out << "x1\tx2\tc1\tc2\tprobability\n";
  int64_t count = 0;
  check(lw_dist_coin_entry_count(dist, &count));
  for (int64_t i = 0; i < count; ++i) {
    int x1 = 0, x2 = 0, c1 = 0, c2 = 0;
    double w = 0.0;
    check(lw_dist_coin_entry(dist, i, &x1, &x2, &c1, &c2, &w));
    out << x1 << '\t' << x2 << '\t' << c1 << '\t' << c2 << '\t' << fmt12(w)
        << '\n';
  }
}

void write_state_table(const fs::path& path, const lw_state* state) {
  auto out = open_output(path);
  out << "x1\tx2\tc1\tc2\tre\tim\n";
  int64_t count = 0;
  check(lw_state_entry_count(state, &count));
  for (int64_t i = 0; i < count; ++i) {
    int x1, x2, c1, c2;
    double re, im;
    check(lw_state_entry(state, i, &x1, &x2, &c1, &c2, &re, &im));
    out << x1 << '\t' << x2 << '\t' << c1 << '\t' << c2 << '\t' << fmt17(re)
        << '\t' << fmt17(im) << '\n';
  }
}

void write_phase_table(const fs::path& path, const lw_state* state) {
  auto out = open_output(path);
  out << "x1\tx2\tc1\tc2\tphase\n";
  int64_t count = 0;
  check(lw_state_entry_count(state, &count));
  for (int64_t i = 0; i < count; ++i) {
    int x1, x2, c1, c2;
    double re, im;
    check(lw_state_entry(state, i, &x1, &x2, &c1, &c2, &re, &im));
    out << x1 << '\t' << x2 << '\t' << c1 << '\t' << c2 << '\t'
        << fmt17(std::atan2(im, re)) << '\n';
  }
}

// Rebuilds a distribution from its 12-digit text form, exactly as a later
// analyze run will see it, so reported metrics match byte for byte.
DistPtr canonical_position_dist(const lw_dist* dist) {
  lw_dist* raw = nullptr;
  check(lw_dist_new(0, &raw));
  DistPtr canonical(raw);
  int64_t count = 0;
  check(lw_dist_entry_count(dist, &count));
  for (int64_t i = 0; i < count; ++i) {
    int x1 = 0, x2 = 0;
    double w = 0.0;
    check(lw_dist_entry(dist, i, &x1, &x2, &w));
    check(lw_dist_add(canonical.get(), x1, x2, 0, 0,
                      std::strtod(fmt12(w).c_str(), nullptr)));
  }
  check(lw_dist_finalize(canonical.get(), 1));
  return canonical;
}

struct LoadedTable {
  DistPtr dist;       // set for probability tables
  StatePtr state;     // set for amplitude tables (not representable: kept null)
  PhasePtr phases;    // set for phase tables
  bool coin_resolved = false;
  std::string header;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream row(line);
  std::string token;
  while (row >> token) tokens.push_back(token);
  return tokens;
}

[[noreturn]] void bad_file(const fs::path& path, std::size_t line,
                           const std::string& message) {
  throw cli::ConfigError(path.string() + ":" + std::to_string(line) + ": " +
                         message);
}

// Reads a probability table (position or coin resolved) and normalizes it.
DistPtr read_distribution(const fs::path& path, bool* coin_resolved_out) {
  std::ifstream in(path);
  if (!in) throw cli::ConfigError(path.string() + ": cannot open");
  std::string header;
  if (!std::getline(in, header)) bad_file(path, 1, "empty file");
  bool coin_resolved = false;
  if (header == "x1\tx2\tc1\tc2\tprobability") {
    coin_resolved = true;
  } else if (header != "x1\tx2\tprobability") {
    if (header == "x1\tx2\tc1\tc2\tre\tim") {
      throw cli::ConfigError(
          path.string() +
          ": this is an amplitude table; pass it via --state instead");
    }
    bad_file(path, 1, "unrecognized header '" + header + "'");
  }

  lw_dist* raw = nullptr;
  check(lw_dist_new(coin_resolved ? 1 : 0, &raw));
  DistPtr dist(raw);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tokens = split_line(line);
    const std::size_t expected = coin_resolved ? 5 : 3;
    if (tokens.size() != expected) bad_file(path, line_no, "malformed row");
    try {
      const int x1 = std::stoi(tokens[0]);
      const int x2 = std::stoi(tokens[1]);
      const int c1 = coin_resolved ? std::stoi(tokens[2]) : 0;
      const int c2 = coin_resolved ? std::stoi(tokens[3]) : 0;
      const double w = std::stod(tokens.back());
      check(lw_dist_add(dist.get(), x1, x2, c1, c2, w));
    } catch (const CApiError&) {
      throw;
    } catch (const std::exception&) {
      bad_file(path, line_no, "malformed row");
    }
  }
  check(lw_dist_finalize(dist.get(), 1));
  if (coin_resolved_out) *coin_resolved_out = coin_resolved;
  return dist;
}

struct AmplitudeRow {
  int x1, x2, c1, c2;
  double re, im;
};

std::vector<AmplitudeRow> read_state_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cli::ConfigError(path.string() + ": cannot open");
  std::string header;
  if (!std::getline(in, header)) bad_file(path, 1, "empty file");
  if (header != "x1\tx2\tc1\tc2\tre\tim") {
    if (header == "x1\tx2\tprobability" ||
        header == "x1\tx2\tc1\tc2\tprobability") {
      throw cli::ConfigError(
          path.string() +
          ": probability tables carry no amplitudes, so the exact entropy "
          "is unavailable; use --probs FILE --phases FILE for the "
          "phase-minimized lower bound");
    }
    bad_file(path, 1, "unrecognized header '" + header + "'");
  }
  std::vector<AmplitudeRow> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tokens = split_line(line);
    if (tokens.size() != 6) bad_file(path, line_no, "malformed row");
    try {
      rows.push_back({std::stoi(tokens[0]), std::stoi(tokens[1]),
                      std::stoi(tokens[2]), std::stoi(tokens[3]),
                      std::stod(tokens[4]), std::stod(tokens[5])});
    } catch (const std::exception&) {
      bad_file(path, line_no, "malformed row");
    }
  }
  return rows;
}

PhasePtr read_phase_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cli::ConfigError(path.string() + ": cannot open");
  std::string header;
  if (!std::getline(in, header)) bad_file(path, 1, "empty file");
  if (header != "x1\tx2\tc1\tc2\tphase") {
    bad_file(path, 1, "unrecognized header '" + header + "'");
  }
  lw_phase_model* raw = nullptr;
  check(lw_phase_model_new(&raw));
  PhasePtr model(raw);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tokens = split_line(line);
    if (tokens.size() != 5) bad_file(path, line_no, "malformed row");
    try {
      check(lw_phase_model_add(model.get(), std::stoi(tokens[0]),
                               std::stoi(tokens[1]), std::stoi(tokens[2]),
                               std::stoi(tokens[3]), std::stod(tokens[4])));
    } catch (const CApiError&) {
      throw;
    } catch (const std::exception&) {
      bad_file(path, line_no, "malformed row");
    }
  }
  return model;
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CApiError{LW_ERR_IO, "cannot create " + dir.string()};
}

// ---- shared CLI options ------------------------------------------------

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<int> steps_override;
  std::optional<unsigned long long> seed_override;
};

void add_common(CLI::App* cmd, CommonOptions& options, bool config_required) {
  auto* config =
      cmd->add_option("--config", options.config_path, "run configuration file");
  if (config_required) config->required();
  cmd->add_option("--out", options.out_dir, "output directory");
  cmd->add_option("--steps", options.steps_override,
                  "override the configured step count");
  cmd->add_option("--seed", options.seed_override,
                  "override the configured seed");
}

cli::RunConfig resolve_config(const CommonOptions& options) {
  cli::RunConfig config = options.config_path.empty()
                              ? cli::RunConfig{}
                              : cli::load_config(options.config_path);
  if (options.config_path.empty()) {
    lw_timing_paper(&config.timing);
    lw_loss_paper(&config.loss);
  }
  if (options.steps_override) {
    if (*options.steps_override < 0) {
      throw cli::ConfigError("--steps must be >= 0");
    }
    config.steps = *options.steps_override;
  }
  if (options.seed_override) config.seed = *options.seed_override;
  return config;
}

double state_similarity_to(const lw_state* state, const lw_dist* other) {
  lw_dist* raw = nullptr;
  check(lw_state_position_dist(state, &raw));
  DistPtr ideal(raw);
  double s = 0.0;
  check(lw_similarity(ideal.get(), other, &s));
  return s;
}

// ---- subcommands -------------------------------------------------------

int run_simulate(const CommonOptions& options) {
  const cli::RunConfig config = resolve_config(options);
  ensure_out_dir(options.out_dir);
  const fs::path out_dir(options.out_dir);

  SchedulePtr schedule = make_schedule(config);
  StatePtr state = make_initial_state(config);
  const int order =
      config.order == "staged" ? LW_ORDER_STAGED : LW_ORDER_COMBINED;

  auto summary = open_output(out_dir / "summary.tsv");
  summary << "step\tnorm\tsupport\tdiagonal_confinement\t"
             "factorization_residual\n";

  for (int step = 0; step <= config.steps; ++step) {
    const std::string tag = step_tag(step);

    lw_dist* raw_positions = nullptr;
    check(lw_state_position_dist(state.get(), &raw_positions));
    DistPtr positions(raw_positions);

    if (wants(config, "distributions")) {
      write_position_table(out_dir / ("positions_step" + tag + ".tsv"),
                           positions.get());
      lw_dist* raw_coin = nullptr;
      check(lw_state_coin_dist(state.get(), &raw_coin));
      DistPtr coin(raw_coin);
      write_coin_table(out_dir / ("coinresolved_step" + tag + ".tsv"),
                       coin.get());
    }
    if (wants(config, "states")) {
      write_state_table(out_dir / ("state_step" + tag + ".tsv"), state.get());
    }
    if (wants(config, "phases")) {
      write_phase_table(out_dir / ("phases_step" + tag + ".tsv"), state.get());
    }

    // Metrics come from the rounded table values so that re-analyzing the
    // written files reproduces them identically.
    DistPtr canonical = canonical_position_dist(positions.get());
    double norm = 0.0, confinement = 0.0, residual = 0.0;
    int64_t support = 0;
    check(lw_state_norm(state.get(), &norm));
    check(lw_dist_entry_count(canonical.get(), &support));
    check(lw_confinement(canonical.get(), &confinement));
    check(lw_factorization_residual(canonical.get(), &residual));
    summary << step << '\t' << fmt12(norm) << '\t' << support << '\t'
            << fmt12(confinement) << '\t' << fmt12(residual) << '\n';

    if (step < config.steps) {
      check(lw_state_evolve(state.get(), schedule.get(), 1, order));
    }
  }
  std::cout << "simulate: wrote " << config.steps + 1 << " steps to "
            << out_dir.string() << "\n";
  return 0;
}

int run_detect(const CommonOptions& options) {
  const cli::RunConfig config = resolve_config(options);
  if (config.trials < 1) {
    throw cli::ConfigError("detect requires trials >= 1");
  }
  if (config.steps < 1) {
    throw cli::ConfigError("detect requires steps >= 1");
  }
  ensure_out_dir(options.out_dir);
  const fs::path out_dir(options.out_dir);

  // Physics gate: refuse timings whose bins collide before sampling.
  int ok = 0;
  lw_collision collision{};
  check(lw_check_overlap(&config.timing, config.steps, &ok, &collision));
  if (!ok) {
    std::ostringstream message;
    message << "timeline collision: step " << collision.step_a << " position ("
            << collision.x1_a << "," << collision.x2_a << ") at "
            << collision.time_a_ns << " ns conflicts with step "
            << collision.step_b << " position (" << collision.x1_b << ","
            << collision.x2_b << ") at " << collision.time_b_ns << " ns";
    std::cerr << message.str() << "\n";
    return 3;
  }

  SchedulePtr schedule = make_schedule(config);
  lw_records* raw_records = nullptr;
  check(lw_simulate(schedule.get(), &config.loss, &config.timing, config.steps,
                    config.trials, config.seed, env_threads(), &raw_records));
  RecordsPtr records(raw_records);

  check(lw_records_write(records.get(), (out_dir / "records.txt").c_str()));

  std::vector<double> expected(static_cast<std::size_t>(config.steps), 0.0);
  check(lw_expected_events(schedule.get(), &config.loss, config.steps,
                           config.trials, expected.data()));

  int64_t total = 0;
  check(lw_records_count(records.get(), &total));
  std::vector<int64_t> observed(static_cast<std::size_t>(config.steps), 0);
  for (int64_t i = 0; i < total; ++i) {
    int64_t trial;
    int step, coin;
    double time;
    check(lw_records_entry(records.get(), i, &trial, &step, &time, &coin));
    ++observed[static_cast<std::size_t>(step - 1)];
  }

  StatePtr ideal = make_initial_state(config);
  auto report = open_output(out_dir / "report.tsv");
  report << "step\texpected_events\tobserved\tassigned\tunassigned\t"
            "similarity\n";
  for (int step = 1; step <= config.steps; ++step) {
    check(lw_state_evolve(ideal.get(), schedule.get(), 1, LW_ORDER_COMBINED));
    int64_t assigned = 0, unassigned = 0;
    std::string similarity_text = "nan";
    if (observed[static_cast<std::size_t>(step - 1)] > 0) {
      lw_dist* raw_dist = nullptr;
      check(lw_reconstruct(records.get(), &config.timing, step,
                           config.loss.detection_efficiency, &raw_dist,
                           &unassigned));
      DistPtr reconstructed(raw_dist);
      assigned = observed[static_cast<std::size_t>(step - 1)] - unassigned;
      write_coin_table(
          out_dir / ("reconstructed_step" + step_tag(step) + ".tsv"),
          reconstructed.get());
      similarity_text =
          fmt12(state_similarity_to(ideal.get(), reconstructed.get()));
    }
    report << step << '\t' << fmt12(expected[static_cast<std::size_t>(step - 1)])
           << '\t' << observed[static_cast<std::size_t>(step - 1)] << '\t'
           << assigned << '\t' << unassigned << '\t' << similarity_text
           << '\n';
  }
  std::cout << "detect: " << total << " records over " << config.steps
            << " steps -> " << out_dir.string() << "\n";
  return 0;
}

int run_timeline_check(const CommonOptions& options) {
  const cli::RunConfig config = resolve_config(options);
  const int steps = config.steps > 0 ? config.steps : 12;
  int ok = 0;
  lw_collision collision{};
  check(lw_check_overlap(&config.timing, steps, &ok, &collision));
  if (ok) {
    std::cout << "timeline ok: " << steps
              << " steps resolve without temporal overlap (t_min "
              << config.timing.t_min_ns << " ns, dtau1 "
              << config.timing.dtau1_ns << " ns, dtau2 "
              << config.timing.dtau2_ns << " ns)\n";
    return 0;
  }
  std::cerr << "timeline collision: step " << collision.step_a << " position ("
            << collision.x1_a << "," << collision.x2_a << ") at "
            << collision.time_a_ns << " ns conflicts with step "
            << collision.step_b << " position (" << collision.x1_b << ","
            << collision.x2_b << ") at " << collision.time_b_ns << " ns\n";
  return 3;
}

struct AnalyzeOptions {
  CommonOptions common;
  std::string dist_a, dist_b;
  std::string state_file;
  std::string probs_file, phases_file;
  bool entropy_series = false;
  std::string series_coins = "hadamard,controlled_xz";
  int grid = 0;
};

int run_analyze(const AnalyzeOptions& options) {
  ensure_out_dir(options.common.out_dir);
  const fs::path out_dir(options.common.out_dir);
  auto report = open_output(out_dir / "report.tsv");
  report << "metric\tvalue\n";
  bool did_anything = false;

  DistPtr dist_a, dist_b;
  if (!options.dist_a.empty()) {
    did_anything = true;
    dist_a = read_distribution(options.dist_a, nullptr);
    double confinement = 0.0, residual = 0.0;
    check(lw_confinement(dist_a.get(), &confinement));
    check(lw_factorization_residual(dist_a.get(), &residual));
    int64_t support = 0;
    check(lw_dist_entry_count(dist_a.get(), &support));
    report << "support_a\t" << support << '\n';
    report << "diagonal_confinement_a\t" << fmt12(confinement) << '\n';
    report << "factorization_residual_a\t" << fmt12(residual) << '\n';
    for (int axis : {1, 2}) {
      auto table = open_output(
          out_dir / ("marginal" + std::to_string(axis) + "_a.tsv"));
      table << "x\tprobability\n";
      int64_t count = 0;
      check(lw_marginal_count(dist_a.get(), axis, &count));
      for (int64_t i = 0; i < count; ++i) {
        int x = 0;
        double w = 0.0;
        check(lw_marginal_entry(dist_a.get(), axis, i, &x, &w));
        table << x << '\t' << fmt12(w) << '\n';
      }
    }
  }
  if (!options.dist_b.empty()) {
    if (!dist_a) throw cli::ConfigError("--dist-b requires --dist-a");
    dist_b = read_distribution(options.dist_b, nullptr);
    double s = 0.0;
    check(lw_similarity(dist_a.get(), dist_b.get(), &s));
    report << "similarity\t" << fmt12(s) << '\n';
  }

  if (!options.state_file.empty()) {
    did_anything = true;
    const auto rows = read_state_rows(options.state_file);
    std::vector<int> x1s, x2s, c1s, c2s;
    std::vector<double> res, ims;
    for (const auto& row : rows) {
      x1s.push_back(row.x1);
      x2s.push_back(row.x2);
      c1s.push_back(row.c1);
      c2s.push_back(row.c2);
      res.push_back(row.re);
      ims.push_back(row.im);
    }
    lw_state* raw_state = nullptr;
    check(lw_state_from_entries(static_cast<int64_t>(rows.size()), x1s.data(),
                                x2s.data(), c1s.data(), c2s.data(), res.data(),
                                ims.data(), &raw_state));
    StatePtr state(raw_state);
    double bits = 0.0;
    check(lw_state_entropy(state.get(), &bits));
    report << "exact_entropy_bits\t" << fmt12(bits) << '\n';

    lw_dist* raw_positions = nullptr;
    check(lw_state_position_dist(state.get(), &raw_positions));
    DistPtr positions(raw_positions);
    double confinement = 0.0;
    check(lw_confinement(positions.get(), &confinement));
    report << "diagonal_confinement_state\t" << fmt12(confinement) << '\n';
  }

  if (!options.probs_file.empty() || !options.phases_file.empty()) {
    did_anything = true;
    if (options.probs_file.empty() || options.phases_file.empty()) {
      throw cli::ConfigError("--probs and --phases must be given together");
    }
    bool coin_resolved = false;
    DistPtr probs = read_distribution(options.probs_file, &coin_resolved);
    if (!coin_resolved) {
      throw cli::ConfigError(
          options.probs_file +
          ": the lower bound needs a coin-resolved table (header "
          "'x1 x2 c1 c2 probability')");
    }
    PhasePtr phases = read_phase_table(options.phases_file);
    double bits = 0.0;
    double sector_phases[3] = {0.0, 0.0, 0.0};
    check(lw_entropy_lower_bound(probs.get(), phases.get(), options.grid,
                                 env_threads(), &bits, sector_phases));
    report << "entropy_lower_bound_bits\t" << fmt12(bits) << '\n';
    report << "minimizing_phases\t" << fmt12(sector_phases[0]) << ' '
           << fmt12(sector_phases[1]) << ' ' << fmt12(sector_phases[2])
           << '\n';
  }

  if (options.entropy_series) {
    did_anything = true;
    const cli::RunConfig config = resolve_config(options.common);
    auto table = open_output(out_dir / "entropy_series.tsv");
    table << "coin\tstep\tentropy_bits\n";
    std::istringstream coins(options.series_coins);
    std::string name;
    while (std::getline(coins, name, ',')) {
      if (name.empty()) continue;
      lw_schedule* raw_schedule = nullptr;
      check(lw_schedule_named(name.c_str(), &raw_schedule));
      SchedulePtr schedule(raw_schedule);
      StatePtr state = make_initial_state(config);
      for (int step = 1; step <= config.steps; ++step) {
        check(lw_state_evolve(state.get(), schedule.get(), 1,
                              LW_ORDER_COMBINED));
        double bits = 0.0;
        check(lw_state_entropy(state.get(), &bits));
        table << name << '\t' << step << '\t' << fmt12(bits) << '\n';
      }
    }
  }

  if (!did_anything) {
    throw cli::ConfigError(
        "analyze: nothing to do (pass --dist-a, --state, --probs/--phases "
        "or --entropy-series)");
  }
  std::cout << "analyze: report written to "
            << (out_dir / "report.tsv").string() << "\n";
  return 0;
}

int run_oracle(const CommonOptions& options, const std::string& coin,
               int steps) {
  (void)options;
  lw_schedule* raw = nullptr;
  check(lw_schedule_named(coin.c_str(), &raw));
  SchedulePtr schedule(raw);
  double dense_diff = 0.0, iso_diff = 0.0;
  check(lw_oracle_dense_diff(schedule.get(), 0, 0, -1, -1, steps, &dense_diff));
  check(lw_oracle_isomorphism_diff(coin.c_str(), steps, &iso_diff));
  std::cout << "dense-vs-sparse max amplitude diff: " << fmt12(dense_diff)
            << "\n"
            << "two-walker coincidence max deviation: " << fmt12(iso_diff)
            << "\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{
      "latticewalk: 2D discrete-time quantum walk simulator, fiber-loop "
      "detection model and entanglement analysis"};
  app.require_subcommand(1);

  CommonOptions simulate_options, detect_options, timeline_options;
  AnalyzeOptions analyze_options;
  CommonOptions oracle_options;
  std::string oracle_coin = "hadamard";
  int oracle_steps = 6;

  auto* simulate = app.add_subcommand(
      "simulate", "evolve the walk and write per-step distribution tables");
  add_common(simulate, simulate_options, true);

  auto* detect = app.add_subcommand(
      "detect",
      "Monte-Carlo detector clicks, reconstruction and similarity report");
  add_common(detect, detect_options, true);

  auto* analyze = app.add_subcommand(
      "analyze", "metrics from distribution/state files or entropy series");
  add_common(analyze, analyze_options.common, false);
  analyze->add_option("--dist-a", analyze_options.dist_a,
                      "probability table (position or coin-resolved)");
  analyze->add_option("--dist-b", analyze_options.dist_b,
                      "second table for the similarity metric");
  analyze->add_option("--state", analyze_options.state_file,
                      "amplitude table for the exact entropy");
  analyze->add_option("--probs", analyze_options.probs_file,
                      "coin-resolved probabilities for the lower bound");
  analyze->add_option("--phases", analyze_options.phases_file,
                      "model phases for the lower bound");
  analyze->add_flag("--entropy-series", analyze_options.entropy_series,
                    "tabulate stepwise entropies for named coins");
  analyze->add_option("--coins", analyze_options.series_coins,
                      "comma-separated coin names for --entropy-series");
  analyze->add_option("--grid", analyze_options.grid,
                      "phase-grid points per axis (default 16)");

  auto* timeline = app.add_subcommand(
      "timeline-check", "verify the time-bin layout is collision free");
  add_common(timeline, timeline_options, true);

  auto* oracle = app.add_subcommand("oracle", "");
  oracle->group("");  // debugging helper, hidden from help
  add_common(oracle, oracle_options, false);
  oracle->add_option("--coin", oracle_coin, "named coin");
  oracle->add_option("--oracle-steps", oracle_steps, "steps (max 8)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) return run_simulate(simulate_options);
  if (detect->parsed()) return run_detect(detect_options);
  if (analyze->parsed()) return run_analyze(analyze_options);
  if (timeline->parsed()) return run_timeline_check(timeline_options);
  if (oracle->parsed()) {
    return run_oracle(oracle_options, oracle_coin, oracle_steps);
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CApiError& e) {
    std::cerr << "error: " << e.message << "\n";
    switch (e.code) {
      case LW_ERR_DOMAIN: return 2;
      case LW_ERR_PHYSICS: return 3;
      case LW_ERR_NUMERIC: return 4;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
