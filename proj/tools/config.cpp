#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cli {

namespace {

struct IniValue {
  std::string text;
  int line = 0;
};

using IniSection = std::map<std::string, IniValue>;

struct IniFile {
  std::string path;
  std::map<std::string, IniSection> sections;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& message) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + message);
}

IniFile parse_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");

  IniFile file;
  file.path = path;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(path, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(path, line_no, "empty section name");
      file.sections[section];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(path, line_no, "expected 'key = value'");
    }
    if (section.empty()) {
      fail(path, line_no, "key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, line_no, "empty key");
    auto [it, inserted] = file.sections[section].insert({key, {value, line_no}});
    if (!inserted) {
      fail(path, line_no, "duplicate key '" + key + "' in [" + section + "]");
    }
  }
  return file;
}

// Pulls typed values out of a section, tracking which keys were consumed
// so leftovers can be reported with their line numbers.
class SectionReader {
 public:
  SectionReader(const IniFile& file, const std::string& name)
      : file_(file), name_(name) {
    const auto it = file.sections.find(name);
    if (it != file.sections.end()) section_ = &it->second;
  }

  bool has(const std::string& key) const {
    return section_ && section_->count(key);
  }

  template <typename Parser>
  void get(const std::string& key, Parser&& parse) {
    if (!has(key)) return;
    const IniValue& value = section_->at(key);
    consumed_.push_back(key);
    try {
      parse(value.text);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(file_.path, value.line,
           "bad value for '" + key + "' in [" + name_ + "]: " + e.what());
    }
  }

  void get_double(const std::string& key, double& out) {
    get(key, [&](const std::string& text) {
      std::size_t used = 0;
      out = std::stod(text, &used);
      if (used != text.size()) throw std::runtime_error("not a number");
    });
  }

  void get_int(const std::string& key, long long& out) {
    get(key, [&](const std::string& text) {
      std::size_t used = 0;
      out = std::stoll(text, &used);
      if (used != text.size()) throw std::runtime_error("not an integer");
    });
  }

  void get_bool(const std::string& key, bool& out) {
    get(key, [&](const std::string& text) {
      if (text == "true" || text == "1") out = true;
      else if (text == "false" || text == "0") out = false;
      else throw std::runtime_error("expected true/false");
    });
  }

  void get_string(const std::string& key, std::string& out) {
    get(key, [&](const std::string& text) { out = text; });
  }

  // Every key in the section must have been consumed.
  void finish() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (std::find(consumed_.begin(), consumed_.end(), key) ==
          consumed_.end()) {
        fail(file_.path, value.line,
             "unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

  void require(const std::string& key) const {
    if (!has(key)) {
      throw ConfigError(file_.path + ": missing required key '" + key +
                        "' in [" + name_ + "]");
    }
  }

  int line_of(const std::string& key) const {
    return section_ && section_->count(key) ? section_->at(key).line : 0;
  }

 private:
  const IniFile& file_;
  std::string name_;
  const IniSection* section_ = nullptr;
  std::vector<std::string> consumed_;
};

void check_unit_interval(const IniFile& file, const SectionReader& reader,
                         const std::string& key, double value) {
  if (value < 0.0 || value > 1.0 || !std::isfinite(value)) {
    fail(file.path, reader.line_of(key), key + " must lie in [0, 1]");
  }
}

}  // namespace

const std::vector<std::string>& known_coin_names() {
  static const std::vector<std::string> names{
      "hadamard", "controlled_xz", "controlled_hadamard_23",
      "controlled_hadamard_24", "nonlinear_cz_diagonal"};
  return names;
}

RunConfig load_config(const std::string& path) {
  const IniFile file = parse_ini(path);

  for (const auto& [section, keys] : file.sections) {
    if (section != "run" && section != "coin" && section != "timing" &&
        section != "loss" && section != "outputs") {
      const int line = keys.empty() ? 0 : keys.begin()->second.line;
      fail(path, line, "unknown section [" + section + "]");
    }
  }

  RunConfig config;
  lw_timing_paper(&config.timing);
  lw_loss_paper(&config.loss);

  {
    SectionReader run(file, "run");
    run.get_string("coin", config.coin);
    long long steps = config.steps;
    run.get_int("steps", steps);
    if (steps < 0 || steps > 1000000) {
      fail(path, run.line_of("steps"), "steps must be in [0, 1000000]");
    }
    config.steps = static_cast<int>(steps);
    long long trials = config.trials;
    run.get_int("trials", trials);
    if (trials < 0) fail(path, run.line_of("trials"), "trials must be >= 0");
    config.trials = trials;
    long long seed = static_cast<long long>(config.seed);
    run.get_int("seed", seed);
    config.seed = static_cast<unsigned long long>(seed);
    run.get("initial", [&](const std::string& text) {
      std::istringstream row(text);
      if (!(row >> config.initial_x1 >> config.initial_x2 >>
            config.initial_c1 >> config.initial_c2)) {
        throw std::runtime_error("expected four integers 'x1 x2 c1 c2'");
      }
      std::string rest;
      if (row >> rest) throw std::runtime_error("trailing tokens");
      for (int c : {config.initial_c1, config.initial_c2}) {
        if (c != -1 && c != 1) {
          throw std::runtime_error("coin values must be -1 or +1");
        }
      }
    });
    run.get_string("order", config.order);
    if (config.order != "combined" && config.order != "staged") {
      fail(path, run.line_of("order"), "order must be combined or staged");
    }

    const auto& names = known_coin_names();
    const bool named =
        std::find(names.begin(), names.end(), config.coin) != names.end();
    if (!named && config.coin != "angles") {
      fail(path, run.line_of("coin"),
           "unknown coin '" + config.coin +
               "' (expected a named coin or 'angles')");
    }
    if (config.order == "staged" && config.coin != "angles") {
      fail(path, run.line_of("order"),
           "staged order requires an angle-defined coin");
    }
    run.finish();
  }

  {
    SectionReader coin(file, "coin");
    if (config.coin == "angles") {
      for (const char* key : {"theta1", "theta2", "theta3", "theta4"}) {
        coin.require(key);
      }
    } else if (file.sections.count("coin") &&
               !file.sections.at("coin").empty()) {
      fail(path, file.sections.at("coin").begin()->second.line,
           "[coin] section is only used when coin = angles");
    }
    coin.get_double("theta1", config.theta[0]);
    coin.get_double("theta2", config.theta[1]);
    coin.get_double("theta3", config.theta[2]);
    coin.get_double("theta4", config.theta[3]);
    coin.get_double("eom_phase", config.eom_phase);
    coin.get_double("eom_crosstalk", config.eom_crosstalk);
    coin.get_string("eom_scope", config.eom_scope);
    if (config.eom_scope != "none" && config.eom_scope != "everywhere" &&
        config.eom_scope != "diagonal") {
      fail(path, coin.line_of("eom_scope"),
           "eom_scope must be none, everywhere or diagonal");
    }
    if (config.eom_crosstalk < 0.0) {
      fail(path, coin.line_of("eom_crosstalk"),
           "eom_crosstalk must be >= 0");
    }
    coin.finish();
  }

  {
    SectionReader timing(file, "timing");
    timing.get_double("t_min", config.timing.t_min_ns);
    timing.get_double("dtau1", config.timing.dtau1_ns);
    timing.get_double("dtau2", config.timing.dtau2_ns);
    timing.get_double("pulse_width", config.timing.pulse_width_ns);
    timing.get_double("eom_delay", config.timing.eom_delay_ns);
    bool swap = config.timing.axis_swap != 0;
    timing.get_bool("axis_swap", swap);
    config.timing.axis_swap = swap ? 1 : 0;
    for (const char* key : {"t_min", "dtau1", "dtau2", "pulse_width"}) {
      const double value = key == std::string("t_min") ? config.timing.t_min_ns
                           : key == std::string("dtau1") ? config.timing.dtau1_ns
                           : key == std::string("dtau2") ? config.timing.dtau2_ns
                                            : config.timing.pulse_width_ns;
      if (value <= 0.0 || !std::isfinite(value)) {
        fail(path, timing.line_of(key),
             std::string(key) + " must be strictly positive");
      }
    }
    if (config.timing.eom_delay_ns < 0.0) {
      fail(path, timing.line_of("eom_delay"), "eom_delay must be >= 0");
    }
    timing.finish();
  }

  {
    SectionReader loss(file, "loss");
    loss.get_double("input_coupling", config.loss.input_coupling);
    loss.get_double("outcouple_minus", config.loss.outcouple_minus);
    loss.get_double("outcouple_plus", config.loss.outcouple_plus);
    loss.get_double("step_survival", config.loss.step_survival);
    loss.get("detection_efficiency", [&](const std::string& text) {
      std::istringstream row(text);
      for (int i = 0; i < 4; ++i) {
        if (!(row >> config.loss.detection_efficiency[i])) {
          throw std::runtime_error("expected four efficiencies");
        }
      }
      std::string rest;
      if (row >> rest) throw std::runtime_error("trailing tokens");
    });
    const IniFile& f = file;
    check_unit_interval(f, loss, "input_coupling", config.loss.input_coupling);
    check_unit_interval(f, loss, "outcouple_minus", config.loss.outcouple_minus);
    check_unit_interval(f, loss, "outcouple_plus", config.loss.outcouple_plus);
    check_unit_interval(f, loss, "step_survival", config.loss.step_survival);
    for (double e : config.loss.detection_efficiency) {
      check_unit_interval(f, loss, "detection_efficiency", e);
    }
    loss.finish();
  }

  {
    SectionReader outputs(file, "outputs");
    outputs.get("artifacts", [&](const std::string& text) {
      config.artifacts.clear();
      std::istringstream row(text);
      std::string token;
      while (row >> token) {
        if (token != "distributions" && token != "summary" &&
            token != "states" && token != "phases" && token != "records") {
          throw std::runtime_error("unknown artifact '" + token + "'");
        }
        config.artifacts.push_back(token);
      }
      if (config.artifacts.empty()) {
        throw std::runtime_error("artifact list is empty");
      }
    });
    outputs.finish();
  }

  return config;
}

}  // namespace cli
