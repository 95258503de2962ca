#pragma once

#include <filesystem>
#include <stdexcept>

#include "packcool/env.hpp"
#include "packcool/ppo.hpp"

namespace packcool {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies a flat key=value file on top of the given defaults. Blank lines
/// and lines starting with '#' are skipped; keys cover every EnvConfig and
/// TrainConfig field (seeds as a comma-separated list). Unknown keys and
/// malformed values raise ConfigError with the offending line number.
void apply_config_file(const std::filesystem::path& path, EnvConfig& env, TrainConfig& train);

}  // namespace packcool
