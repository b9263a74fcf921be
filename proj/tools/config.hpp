#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "latticewalk.h"

namespace cli {

// Configuration problems carry "path:line: message" text and map to the
// config-error exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parsed run configuration with every value defaulted to the published
// experiment, so a minimal file only names the coin and step count.
struct RunConfig {
  // [run]
  std::string coin = "hadamard";  // named coin, or "angles"
  int steps = 10;
  long long trials = 100000;
  unsigned long long seed = 1;
  int initial_x1 = 0, initial_x2 = 0, initial_c1 = -1, initial_c2 = -1;
  std::string order = "combined";  // or "staged" (angle coins only)

  // [coin] — used when coin = angles
  double theta[4] = {0.0, 0.0, 0.0, 0.0};
  double eom_phase = 0.0;
  double eom_crosstalk = 0.0;
  std::string eom_scope = "none";  // none | everywhere | diagonal

  lw_timing timing{};  // [timing]
  lw_loss loss{};      // [loss]

  // [outputs]
  std::vector<std::string> artifacts = {"distributions", "summary"};
};

RunConfig load_config(const std::string& path);

// Valid values for RunConfig::coin besides "angles".
const std::vector<std::string>& known_coin_names();

}  // namespace cli
