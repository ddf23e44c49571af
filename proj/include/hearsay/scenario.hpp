#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hearsay/netsim.hpp"

namespace hearsay {

/// A scenario file: one simulation configuration plus the seeds to run it
/// with and the per-message cost used for utility accounting.
struct Scenario {
  SimConfig config;
  std::vector<std::uint64_t> seeds;  // never empty; config.seed == seeds.front()
  double msg_cost_c{0.01};
};

/// Parses and validates a scenario document. Throws ConfigError on malformed
/// input or a violated configuration invariant.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Accepts "a..b" or a single number.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

/// Accepts a decimal number or a fraction "p/q".
double parse_cost(const std::string& text);

}  // namespace hearsay
