#include "packcool/config_file.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace packcool {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view v, const std::filesystem::path& path, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(path, line, "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

long parse_long(std::string_view v, const std::filesystem::path& path, int line) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(path, line, "expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

int parse_int(std::string_view v, const std::filesystem::path& path, int line) {
  return static_cast<int>(parse_long(v, path, line));
}

bool parse_bool(std::string_view v, const std::filesystem::path& path, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(path, line, "expected true/false/1/0, got '" + std::string(v) + "'");
}

std::vector<long> parse_seed_list(std::string_view v, const std::filesystem::path& path,
                                  int line) {
  std::vector<long> seeds;
  while (!v.empty()) {
    const std::size_t comma = v.find(',');
    const std::string_view item = trim(v.substr(0, comma));
    if (item.empty()) fail(path, line, "empty entry in seed list");
    seeds.push_back(parse_long(item, path, line));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (seeds.empty()) fail(path, line, "empty seed list");
  return seeds;
}

}  // namespace

void apply_config_file(const std::filesystem::path& path, EnvConfig& env, TrainConfig& train) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(path, line_no, "expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view val = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, line_no, "empty key");
    if (val.empty()) fail(path, line_no, "empty value for key '" + std::string(key) + "'");

    if (key == "n_x") {
      env.n_x = parse_int(val, path, line_no);
    } else if (key == "dx") {
      env.dx = parse_double(val, path, line_no);
    } else if (key == "dt") {
      env.dt = parse_double(val, path, line_no);
    } else if (key == "diffusivity") {
      env.diffusivity = parse_double(val, path, line_no);
    } else if (key == "resistance") {
      env.resistance = parse_double(val, path, line_no);
    } else if (key == "inflow_temp") {
      env.inflow_temp = parse_double(val, path, line_no);
    } else if (key == "n_fourier") {
      env.n_fourier = parse_int(val, path, line_no);
    } else if (key == "coeff_low") {
      env.coeff_low = parse_double(val, path, line_no);
    } else if (key == "coeff_high") {
      env.coeff_high = parse_double(val, path, line_no);
    } else if (key == "horizon_time") {
      env.horizon_time = parse_double(val, path, line_no);
    } else if (key == "newton_iters") {
      env.newton_iters = parse_int(val, path, line_no);
    } else if (key == "diffusion_mode") {
      if (val == "stabilizing") {
        env.diffusion_mode = DiffusionMode::kStabilizing;
      } else if (val == "antidiffusive") {
        env.diffusion_mode = DiffusionMode::kAntidiffusive;
      } else {
        fail(path, line_no, "diffusion_mode must be stabilizing or antidiffusive");
      }
    } else if (key == "seed") {
      env.seed = static_cast<std::uint64_t>(parse_long(val, path, line_no));
    } else if (key == "enable_source") {
      env.enable_source = parse_bool(val, path, line_no);
    } else if (key == "enable_coupling") {
      env.enable_coupling = parse_bool(val, path, line_no);
    } else if (key == "horizon") {
      train.horizon = parse_int(val, path, line_no);
    } else if (key == "actor_lr") {
      train.actor_lr = parse_double(val, path, line_no);
    } else if (key == "critic_lr") {
      train.critic_lr = parse_double(val, path, line_no);
    } else if (key == "epochs") {
      train.epochs = parse_int(val, path, line_no);
    } else if (key == "minibatch") {
      train.minibatch = parse_int(val, path, line_no);
    } else if (key == "gamma") {
      train.gamma = parse_double(val, path, line_no);
    } else if (key == "gae_lambda") {
      train.gae_lambda = parse_double(val, path, line_no);
    } else if (key == "clip_eps") {
      train.clip_eps = parse_double(val, path, line_no);
    } else if (key == "entropy_coef") {
      train.entropy_coef = parse_double(val, path, line_no);
    } else if (key == "total_steps") {
      train.total_steps = parse_long(val, path, line_no);
    } else if (key == "hidden") {
      train.hidden = parse_int(val, path, line_no);
    } else if (key == "checkpoint_every") {
      train.checkpoint_every = parse_int(val, path, line_no);
    } else if (key == "seeds") {
      train.seeds = parse_seed_list(val, path, line_no);
    } else {
      fail(path, line_no, "unknown config key '" + std::string(key) + "'");
    }
  }
}

}  // namespace packcool
