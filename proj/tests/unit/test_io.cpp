#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "packcool/checkpoint.hpp"
#include "packcool/config_file.hpp"
#include "packcool/csv.hpp"
#include "packcool/env.hpp"
#include "packcool/mlp.hpp"
#include "packcool/rng.hpp"
#include "packcool/svg.hpp"

using namespace packcool;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "packcool_io_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

double reparse(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(res.ec == std::errc{});
  REQUIRE(res.ptr == s.data() + s.size());
  return v;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string what_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("doubles print in their shortest round-tripping form") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "-0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(42.0) == "42");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(-2.5) == "-2.5");

  const double cases[] = {0.1,    1.0 / 3.0, 1e-300, 1e300,        -0.0,     6.02e23,
                          -1e-17, 3.5,       2.0,    0.4307975019, 1.0 / 7.0};
  for (const double v : cases) {
    CAPTURE(v);
    CHECK(reparse(format_double(v)) == v);
  }

  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const double v = (rng.unit() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    CAPTURE(v);
    CHECK(reparse(format_double(v)) == v);
  }
}

TEST_CASE("csv files round-trip exactly and use bare LF line endings") {
  const fs::path dir = fresh_dir("csv_roundtrip");
  const fs::path file = dir / "table.csv";

  Rng rng(7);
  std::vector<std::vector<double>> rows(13, std::vector<double>(4));
  for (auto& row : rows) {
    for (double& v : row) v = rng.normal(0.0, 1.0) * std::pow(10.0, rng.uniform(-6.0, 6.0));
  }
  write_csv(file, {"a", "b", "c", "d"}, rows);

  const CsvTable table = read_csv(file);
  REQUIRE(table.header == std::vector<std::string>{"a", "b", "c", "d"});
  REQUIRE(table.cols() == 4);
  REQUIRE(table.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(table.rows[i][j] == rows[i][j]);
    }
  }

  const std::string bytes = slurp(file);
  CHECK(bytes.find('\r') == std::string::npos);
  REQUIRE(!bytes.empty());
  CHECK(bytes.back() == '\n');

  write_csv(dir / "again.csv", {"a", "b", "c", "d"}, rows);
  CHECK(slurp(dir / "again.csv") == bytes);
}

TEST_CASE("csv reader tolerates CRLF and blank lines") {
  const fs::path dir = fresh_dir("csv_crlf");
  const fs::path file = dir / "dos.csv";
  spit(file, "t,x\r\n\r\n0.5,-1.25\r\n\n1,3e-2\r\n");

  const CsvTable table = read_csv(file);
  CHECK(table.header == std::vector<std::string>{"t", "x"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == 0.5);
  CHECK(table.rows[0][1] == -1.25);
  CHECK(table.rows[1][0] == 1.0);
  CHECK(table.rows[1][1] == 0.03);
}

TEST_CASE("csv errors carry the file and line that caused them") {
  const fs::path dir = fresh_dir("csv_errors");

  const fs::path ragged = dir / "ragged.csv";
  spit(ragged, "a,b\n1,2\n3\n");
  const std::string ragged_msg = what_of([&] { (void)read_csv(ragged); });
  CHECK(ragged_msg.find("ragged row") != std::string::npos);
  CHECK(ragged_msg.find(":3:") != std::string::npos);
  CHECK(ragged_msg.find(ragged.string()) != std::string::npos);

  const fs::path garbled = dir / "garbled.csv";
  spit(garbled, "a,b\n1,two\n");
  const std::string garbled_msg = what_of([&] { (void)read_csv(garbled); });
  CHECK(garbled_msg.find("unparseable numeric cell 'two'") != std::string::npos);
  CHECK(garbled_msg.find(":2:") != std::string::npos);

  const fs::path partial = dir / "partial.csv";
  spit(partial, "a\n1.5x\n");
  CHECK_THROWS_AS((void)read_csv(partial), std::runtime_error);

  CHECK_THROWS_AS((void)read_csv(dir / "missing.csv"), std::runtime_error);

  const fs::path empty = dir / "empty.csv";
  spit(empty, "");
  CHECK_THROWS_AS((void)read_csv(empty), std::runtime_error);

  CHECK_THROWS_AS(write_csv(dir / "bad.csv", {"a", "b"}, {{1.0, 2.0}, {3.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_csv(dir, {"a"}, {{1.0}}), std::runtime_error);
}

TEST_CASE("checkpoints survive a save, load, save cycle byte for byte") {
  const fs::path dir = fresh_dir("ckpt_roundtrip");
  const fs::path file = dir / "nets" / "deep" / "ckpt.txt";

  Rng rng(31);
  const std::vector<int> value_sizes{8, 5, 1};
  const std::vector<int> policy_sizes{4, 5, 1};
  const MlpParams value = init_params(value_sizes, OutputActivation::kIdentity, rng);
  const MlpParams policy = init_params(policy_sizes, OutputActivation::kTanh, rng);

  save_checkpoint(value, policy, file);
  REQUIRE(fs::exists(file));

  const auto [value2, policy2] = load_checkpoint(file);
  CHECK(value2.out_act == OutputActivation::kIdentity);
  CHECK(policy2.out_act == OutputActivation::kTanh);
  REQUIRE(value2.W.size() == value.W.size());
  REQUIRE(policy2.W.size() == policy.W.size());
  for (std::size_t l = 0; l < value.W.size(); ++l) {
    REQUIRE(value2.W[l].rows == value.W[l].rows);
    REQUIRE(value2.W[l].cols == value.W[l].cols);
    for (int r = 0; r < value.W[l].rows; ++r) {
      for (int c = 0; c < value.W[l].cols; ++c) CHECK(value2.W[l].at(r, c) == value.W[l].at(r, c));
      CHECK(value2.b[l][static_cast<std::size_t>(r)] == value.b[l][static_cast<std::size_t>(r)]);
    }
  }

  const std::vector<double> obs{0.3, -0.7, 1.1, 0.05};
  CHECK(plain_forward(policy2, obs) == plain_forward(policy, obs));

  const fs::path file2 = dir / "ckpt_again.txt";
  save_checkpoint(value2, policy2, file2);
  CHECK(slurp(file2) == slurp(file));

  const std::string head = slurp(file).substr(0, 17);
  CHECK(head == "PACKCOOL-CKPT v1\n");
}

TEST_CASE("corrupt checkpoints are rejected with a typed error") {
  const fs::path dir = fresh_dir("ckpt_corrupt");

  Rng rng(5);
  const std::vector<int> sizes{3, 4, 1};
  const MlpParams value = init_params(sizes, OutputActivation::kIdentity, rng);
  const MlpParams policy = init_params(sizes, OutputActivation::kTanh, rng);
  const fs::path good = dir / "good.txt";
  save_checkpoint(value, policy, good);
  const std::string bytes = slurp(good);

  CHECK_THROWS_AS((void)load_checkpoint(dir / "missing.txt"), CheckpointError);

  spit(dir / "empty.txt", "");
  CHECK_THROWS_AS((void)load_checkpoint(dir / "empty.txt"), CheckpointError);

  spit(dir / "magic.txt", "PACKCOOL-CKPT v2\n" + bytes.substr(17));
  CHECK_THROWS_AS((void)load_checkpoint(dir / "magic.txt"), CheckpointError);

  spit(dir / "truncated.txt", bytes.substr(0, bytes.size() - 20));
  CHECK_THROWS_AS((void)load_checkpoint(dir / "truncated.txt"), CheckpointError);

  const std::size_t space = bytes.find(' ', 20);
  std::string infected = bytes;
  infected.replace(space + 1, 3, "nan");
  spit(dir / "nonfinite.txt", infected);
  CHECK_THROWS_AS((void)load_checkpoint(dir / "nonfinite.txt"), CheckpointError);

  spit(dir / "odd.txt", "PACKCOOL-CKPT v1\n1 2\n0.5 0.25\n");
  CHECK_THROWS_AS((void)load_checkpoint(dir / "odd.txt"), CheckpointError);

  spit(dir / "chain.txt",
       "PACKCOOL-CKPT v1\n"
       "2 2\n0 0\n0 0\n"
       "1 4\n0 0 0 0\n"
       "1 2\n0 0\n"
       "1 2\n0 0\n");
  const std::string chain_msg = what_of([&] { (void)load_checkpoint(dir / "chain.txt"); });
  CHECK(chain_msg.find("do not chain") != std::string::npos);

  spit(dir / "shape.txt", "PACKCOOL-CKPT v1\n0 2\n\n1 2\n0 0\n");
  CHECK_THROWS_AS((void)load_checkpoint(dir / "shape.txt"), CheckpointError);

  MlpParams shallow = value;
  shallow.W.pop_back();
  shallow.b.pop_back();
  CHECK_THROWS_AS(save_checkpoint(shallow, policy, dir / "depth.txt"), std::invalid_argument);
}

TEST_CASE("config files override every tunable and report bad lines") {
  const fs::path dir = fresh_dir("config");

  EnvConfig env;
  TrainConfig train;
  const EnvConfig env_defaults = env;
  const TrainConfig train_defaults = train;

  const fs::path noop = dir / "noop.cfg";
  spit(noop, "# nothing but commentary\n\n   \n# seed = 9\n");
  apply_config_file(noop, env, train);
  CHECK(env.n_x == env_defaults.n_x);
  CHECK(env.seed == env_defaults.seed);
  CHECK(train.horizon == train_defaults.horizon);
  CHECK(train.seeds == train_defaults.seeds);

  const fs::path full = dir / "full.cfg";
  spit(full,
       "n_x = 25\r\n"
       "dx = 0.04\n"
       "dt = 0.02\n"
       "diffusivity = 0.3\n"
       "resistance = 2.5\n"
       "inflow_temp = -4\n"
       "n_fourier = 6\n"
       "coeff_low = -1.5\n"
       "coeff_high = 1.5\n"
       "horizon_time = 2\n"
       "newton_iters = 12\n"
       "diffusion_mode = antidiffusive\n"
       "seed = 77\n"
       "enable_source = false\n"
       "enable_coupling = 1\n"
       "horizon = 128\n"
       "actor_lr = 0.0003\n"
       "critic_lr = 0.002\n"
       "epochs = 7\n"
       "minibatch = 16\n"
       "gamma = 0.97\n"
       "gae_lambda = 0.9\n"
       "clip_eps = 0.1\n"
       "entropy_coef = 0.01\n"
       "total_steps = 123456\n"
       "hidden = 48\n"
       "checkpoint_every = 5\n"
       "seeds = 3, 14 ,159\n");
  apply_config_file(full, env, train);
  CHECK(env.n_x == 25);
  CHECK(env.dx == 0.04);
  CHECK(env.dt == 0.02);
  CHECK(env.diffusivity == 0.3);
  CHECK(env.resistance == 2.5);
  CHECK(env.inflow_temp == -4.0);
  CHECK(env.n_fourier == 6);
  CHECK(env.coeff_low == -1.5);
  CHECK(env.coeff_high == 1.5);
  CHECK(env.horizon_time == 2.0);
  CHECK(env.newton_iters == 12);
  CHECK(env.diffusion_mode == DiffusionMode::kAntidiffusive);
  CHECK(env.seed == 77);
  CHECK(env.enable_source == false);
  CHECK(env.enable_coupling == true);
  CHECK(train.horizon == 128);
  CHECK(train.actor_lr == 0.0003);
  CHECK(train.critic_lr == 0.002);
  CHECK(train.epochs == 7);
  CHECK(train.minibatch == 16);
  CHECK(train.gamma == 0.97);
  CHECK(train.gae_lambda == 0.9);
  CHECK(train.clip_eps == 0.1);
  CHECK(train.entropy_coef == 0.01);
  CHECK(train.total_steps == 123456);
  CHECK(train.hidden == 48);
  CHECK(train.checkpoint_every == 5);
  CHECK(train.seeds == std::vector<long>{3, 14, 159});

  CHECK_NOTHROW(env.validate());

  const fs::path unknown = dir / "unknown.cfg";
  spit(unknown, "dx = 0.1\n\nrestiance = 2\n");
  const std::string unknown_msg = what_of([&] { apply_config_file(unknown, env, train); });
  CHECK(unknown_msg.find("unknown config key 'restiance'") != std::string::npos);
  CHECK(unknown_msg.find(":3:") != std::string::npos);

  const fs::path bad_num = dir / "bad_num.cfg";
  spit(bad_num, "dx = fast\n");
  const std::string num_msg = what_of([&] { apply_config_file(bad_num, env, train); });
  CHECK(num_msg.find("expected a number") != std::string::npos);

  const fs::path bad_int = dir / "bad_int.cfg";
  spit(bad_int, "n_x = 12.5\n");
  CHECK_THROWS_AS(apply_config_file(bad_int, env, train), ConfigError);

  const fs::path bad_bool = dir / "bad_bool.cfg";
  spit(bad_bool, "enable_source = yes\n");
  const std::string bool_msg = what_of([&] { apply_config_file(bad_bool, env, train); });
  CHECK(bool_msg.find("true/false/1/0") != std::string::npos);

  const fs::path bad_mode = dir / "bad_mode.cfg";
  spit(bad_mode, "diffusion_mode = upwind\n");
  CHECK_THROWS_AS(apply_config_file(bad_mode, env, train), ConfigError);

  const fs::path no_eq = dir / "no_eq.cfg";
  spit(no_eq, "dx 0.1\n");
  const std::string eq_msg = what_of([&] { apply_config_file(no_eq, env, train); });
  CHECK(eq_msg.find("expected key=value") != std::string::npos);

  const fs::path no_val = dir / "no_val.cfg";
  spit(no_val, "dx =\n");
  const std::string val_msg = what_of([&] { apply_config_file(no_val, env, train); });
  CHECK(val_msg.find("empty value for key 'dx'") != std::string::npos);

  const fs::path hole = dir / "hole.cfg";
  spit(hole, "seeds = 1,,2\n");
  const std::string hole_msg = what_of([&] { apply_config_file(hole, env, train); });
  CHECK(hole_msg.find("empty entry in seed list") != std::string::npos);

  CHECK_THROWS_AS(apply_config_file(dir / "missing.cfg", env, train), ConfigError);
}

TEST_CASE("line charts carry their series, bands, and legend") {
  const fs::path dir = fresh_dir("svg_line");

  SvgSeries solo;
  solo.label = "soloseries";
  solo.x = {0.0, 1.0, 2.0, 3.0};
  solo.y = {1.0, -0.5, 0.25, 2.0};
  write_line_svg(dir / "solo.svg", {solo}, {"a run", "t", "reward"});
  const std::string solo_svg = slurp(dir / "solo.svg");
  CHECK(solo_svg.find("<svg") != std::string::npos);
  CHECK(count_occurrences(solo_svg, "<polyline") == 1);
  CHECK(solo_svg.find("stroke-width=\"1.5\"") != std::string::npos);
  CHECK(solo_svg.find("fill-opacity") == std::string::npos);
  CHECK(solo_svg.find("a run") != std::string::npos);
  CHECK(solo_svg.find("reward") != std::string::npos);
  CHECK(solo_svg.find("soloseries") != std::string::npos);

  SvgSeries anon = solo;
  anon.label.clear();
  write_line_svg(dir / "anon.svg", {anon}, {"a run", "t", "reward"});
  const std::string anon_svg = slurp(dir / "anon.svg");
  CHECK(anon_svg.find("font-size=\"12\"") == std::string::npos);

  SvgSeries banded = solo;
  banded.label = "shaded";
  banded.color = "#b2182b";
  banded.band_low = {0.5, -1.0, -0.25, 1.5};
  banded.band_high = {1.5, 0.0, 0.75, 2.5};
  write_line_svg(dir / "pair.svg", {solo, banded}, {"two runs", "t", "reward"});
  const std::string pair_svg = slurp(dir / "pair.svg");
  CHECK(count_occurrences(pair_svg, "<polyline") == 2);
  CHECK(count_occurrences(pair_svg, "fill-opacity=\"0.22\"") == 1);
  CHECK(pair_svg.find("<polygon") != std::string::npos);
  CHECK(pair_svg.find("#b2182b") != std::string::npos);
  CHECK(pair_svg.find("soloseries") != std::string::npos);
  CHECK(pair_svg.find("shaded") != std::string::npos);

  write_line_svg(dir / "solo_again.svg", {solo}, {"a run", "t", "reward"});
  CHECK(slurp(dir / "solo_again.svg") == solo_svg);

  CHECK_THROWS_AS(write_line_svg(dir / "none.svg", {}, {"", "", ""}), std::invalid_argument);
  SvgSeries lopsided = solo;
  lopsided.y.pop_back();
  CHECK_THROWS_AS(write_line_svg(dir / "lop.svg", {lopsided}, {"", "", ""}),
                  std::invalid_argument);
  SvgSeries half_band = solo;
  half_band.band_low = {0.0, 0.0};
  half_band.band_high = {1.0, 1.0};
  CHECK_THROWS_AS(write_line_svg(dir / "half.svg", {half_band}, {"", "", ""}),
                  std::invalid_argument);
}

TEST_CASE("heatmaps paint one cell per entry plus a labeled color bar") {
  const fs::path dir = fresh_dir("svg_heat");

  const std::vector<std::vector<double>> grid{
      {0.0, 1.0, 2.0}, {3.0, 4.0, 5.0}, {6.0, 7.0, 8.0}, {9.0, 10.0, 11.0}};
  write_heatmap_svg(dir / "heat.svg", grid, {"field", "node", "step"});
  const std::string heat = slurp(dir / "heat.svg");
  CHECK(heat.find("<svg") != std::string::npos);
  CHECK(count_occurrences(heat, "<rect") >= 4 * 3 + 2);
  CHECK(heat.find("field") != std::string::npos);
  CHECK(heat.find(">0<") != std::string::npos);
  CHECK(heat.find(">11<") != std::string::npos);

  const std::vector<std::vector<double>> flat{{2.5, 2.5}, {2.5, 2.5}};
  write_heatmap_svg(dir / "flat.svg", flat, {"flat", "x", "y"});
  const std::string flat_svg = slurp(dir / "flat.svg");
  CHECK(flat_svg.find("<rect") != std::string::npos);
  CHECK(flat_svg.find("nan") == std::string::npos);

  write_heatmap_svg(dir / "heat_again.svg", grid, {"field", "node", "step"});
  CHECK(slurp(dir / "heat_again.svg") == heat);

  CHECK_THROWS_AS(write_heatmap_svg(dir / "none.svg", {}, {"", "", ""}), std::invalid_argument);
  CHECK_THROWS_AS(write_heatmap_svg(dir / "ragged.svg", {{1.0, 2.0}, {3.0}}, {"", "", ""}),
                  std::invalid_argument);
}

TEST_CASE("trajectory dumps write the full csv and svg set") {
  const fs::path dir = fresh_dir("dump");

  EnvConfig config;
  config.n_x = 8;
  config.dx = 0.125;
  config.dt = 0.05;
  config.horizon_time = 0.5;
  PackCoolingEnv env(config);
  env.reset(11);
  const std::vector<double> actions{-1.0, 1.0, 0.0, 0.5, -0.5, 1.0, -1.0, 0.25, 0.75, -0.25};
  for (const double a : actions) env.step(a);

  const fs::path out = dir / "run1";
  dump_trajectory(env.trajectory(), out);
  for (const char* name : {"sigma.csv", "u.csv", "w.csv", "sigma.svg", "u.svg", "w.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }

  const CsvTable sigma = read_csv(out / "sigma.csv");
  CHECK(sigma.header == std::vector<std::string>{"t", "sigma"});
  REQUIRE(sigma.rows.size() == actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CHECK(sigma.rows[i][0] == env.trajectory().times[i]);
    CHECK(sigma.rows[i][1] == env.trajectory().sigmas[i]);
  }

  const CsvTable u = read_csv(out / "u.csv");
  REQUIRE(u.cols() == 8);
  CHECK(u.header.front() == "u_1");
  CHECK(u.header.back() == "u_8");
  REQUIRE(u.rows.size() == actions.size());
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(u.rows.back()[j] == env.trajectory().u_history.back()[j]);
  }

  const CsvTable w = read_csv(out / "w.csv");
  CHECK(w.header.front() == "w_1");
  REQUIRE(w.rows.size() == actions.size());

  const fs::path out2 = dir / "run2";
  dump_trajectory(env.trajectory(), out2);
  for (const char* name : {"sigma.csv", "u.csv", "w.csv", "sigma.svg", "u.svg", "w.svg"}) {
    CAPTURE(name);
    CHECK(slurp(out2 / name) == slurp(out / name));
  }

  TrajectoryBuffer empty;
  CHECK_THROWS_AS(dump_trajectory(empty, dir / "never"), std::invalid_argument);
}
