#include <doctest.h>

#include "s3flow/cli_io.hpp"
#include "s3flow/curvature.hpp"
#include "s3flow/errors.hpp"
#include "s3flow/verify.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace s3flow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("s3flow_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_CASE("parse_config examples") {
  RunConfig c = parse_config({"flow", "--f", "const2", "--K", "16", "--dt", "1e-3"});
  CHECK(c.mode == Mode::Flow);
  CHECK(c.f_spec == "const2");
  CHECK(c.flow.K == 16);
  CHECK(c.flow.dt == 1e-3);

  c = parse_config({"morse", "--data", "points.json"});
  CHECK(c.mode == Mode::Morse);
  CHECK(c.data_path == "points.json");

  CHECK_THROWS_AS(parse_config({"flow", "--K", "-4"}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--K", "abc"}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--bogus", "1"}), UsageError);
  CHECK_THROWS_AS(parse_config({"frobnicate"}), UsageError);
  CHECK_THROWS_AS(parse_config({}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--sigma", "huge"}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--f", "axial:3"}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--only", "spectrum"}), UsageError);
  CHECK_THROWS_AS(parse_config({"morse", "--data", "x.json", "--f", "axial:0.3"}), UsageError);
  CHECK_THROWS_AS(parse_config({"bubble", "--eps", "1.5"}), UsageError);
  CHECK_THROWS_AS(parse_config({"bubble", "--p", "0,0,0,0"}), UsageError);

  c = parse_config({"verify", "--only", "spectrum,morse", "--inject_fault"});
  CHECK(c.only == std::vector<std::string>{"spectrum", "morse"});
  CHECK(c.inject_fault);

  c = parse_config({"bubble", "--p", "0,0,3,4", "--eps", "0.25", "--sigma", "max", "--frame", "comoving"});
  CHECK(c.p.isApprox(Vec4(0, 0, 0.6, 0.8)));
  CHECK(c.eps == 0.25);
  CHECK(c.flow.sigma_mode == SigmaMode::MaxGrid);
  CHECK(c.flow.frame == FrameMode::CoMoving);

  c = parse_config({"flow", "--help"});
  CHECK(c.help);
  CHECK(c.help_text.find("--dt") != std::string::npos);
}

TEST_CASE("config file and flag precedence") {
  const fs::path d = scratch_dir("cfg");
  {
    std::ofstream out(d / "run.cfg");
    out << "# comment\nK = 8\ndt=2e-3\nf = axial:0.2  # trailing\nformats=csv\n";
  }
  RunConfig c = parse_config({"flow", "--config", (d / "run.cfg").string(), "--K", "12"});
  CHECK(c.flow.K == 12);
  CHECK(c.flow.dt == 2e-3);
  CHECK(c.f_spec == "axial:0.2");
  CHECK(c.csv);
  CHECK_FALSE(c.json);

  {
    std::ofstream out(d / "bad.cfg");
    out << "K = 8\ncolour = blue\n";
  }
  try {
    parse_config({"flow", "--config", (d / "bad.cfg").string()});
    CHECK(false);
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
  {
    std::ofstream out(d / "neg.cfg");
    out << "dt = -1\n";
  }
  CHECK_THROWS_AS(parse_config({"flow", "--config", (d / "neg.cfg").string()}), UsageError);
  CHECK_THROWS_AS(parse_config({"flow", "--config", (d / "missing.cfg").string()}), UsageError);
}

TEST_CASE("f presets") {
  CHECK(parse_f_spec("const2") == SpectralField::constant(2.0));
  CHECK(parse_f_spec("const:3").mean() == doctest::Approx(3.0));
  CHECK_THROWS_AS(parse_f_spec("const:-1"), UsageError);
  const SpectralField ax = parse_f_spec("axial:0.3");
  CHECK(evaluate_at(ax, Vec4(0, 0, 0, 1)) == doctest::Approx(2.3));
  const SpectralField q = parse_f_spec("quadric:0.1");
  CHECK(evaluate_at(q, Vec4(0, 0, 1, 0)) == doctest::Approx(2.3));
  const SpectralField h = parse_f_spec("harmonics:1:1:0.1,2:3:0.05");
  CHECK(h.band_limit() == 2);
  CHECK(h.at({1, 1}) == 0.1);
  CHECK(h.at({2, 3}) == 0.05);
  CHECK_THROWS_AS(parse_f_spec("harmonics:1:9:0.1"), UsageError);
  CHECK(parse_f_spec("coeffs:9,0,0,0,1").band_limit() == 1);
  CHECK_THROWS_AS(parse_f_spec("coeffs:1,2,3"), UsageError);
  CHECK_THROWS_AS(parse_f_spec("axial"), UsageError);
  CHECK_THROWS_AS(parse_f_spec("wobbly:1"), UsageError);
}

TEST_CASE("diagnostics CSV") {
  CHECK(diagnostics_csv({}) == std::string(kCsvHeader) + "\n");

  FlowConfig cfg;
  cfg.K = 4;
  const FlowState s{0.0, SpectralField(4), MobiusMap::identity()};
  const DiagnosticsRecord r = diagnose(s, SpectralField::constant(2.0), cfg, false);
  const std::string csv = diagnostics_csv({r});
  std::stringstream ss(csv);
  std::string header, row;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header == kCsvHeader);
  const auto cells = split_csv(row);
  REQUIRE(cells.size() == 21);
  CHECK(std::stod(cells[1]) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::stod(cells[4]) == doctest::Approx(kVolS3).epsilon(1e-13));
  CHECK(std::abs(std::stod(cells[5])) < 1e-25);
  for (int i = 15; i < 20; ++i) CHECK(cells[std::size_t(i)].empty());
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(kPi)) == kPi);

  const fs::path d = scratch_dir("csv");
  write_diagnostics_csv(d / "sub" / "a.csv", {r});
  CHECK(slurp(d / "sub" / "a.csv") == csv);
  CHECK_FALSE(fs::exists(d / "sub" / "a.csv.tmp"));
}

TEST_CASE("snapshot round trip is bit exact") {
  RunConfig cfg;
  cfg.flow.K = 6;
  FlowState s;
  s.t = 0.123456789012345678;
  s.w = random_field(6, 0.3, 0.7, 42);
  s.w[0] = 1.0 / 3.0;
  s.frame = MobiusMap::rotation(Eigen::Matrix4d::Identity()) * MobiusMap::dilation(Vec4(0.5, 0.5, 0.5, 0.5), 0.37);
  const Snapshot snap = make_snapshot(s, cfg);
  CHECK(snap.grid_resolution == 12);
  CHECK(snap.config_hash.size() == 16);

  const fs::path d = scratch_dir("snap");
  save_snapshot(d / "s.json", snap);
  const Snapshot back = load_snapshot(d / "s.json");
  CHECK(back.band_limit == 6);
  CHECK(back.t == s.t);
  CHECK(back.w == s.w);
  CHECK(back.frame.matrix() == s.frame.matrix());
  CHECK(back.config_hash == snap.config_hash);
  CHECK(back.version == kToolVersion);

  // the reloaded state continues identically
  FlowConfig fc;
  fc.K = 6;
  const SpectralField f = parse_f_spec("axial:0.3");
  const FlowState a = step(s, f, 1e-3, fc), b = step(back.state(), f, 1e-3, fc);
  CHECK(diagnostics_csv({diagnose(a, f, fc, true)}) == diagnostics_csv({diagnose(b, f, fc, true)}));

  nlohmann::json j = to_json(snap);
  j["coefficients"].push_back({9, 1, 0.0});
  CHECK_THROWS_AS(snapshot_from_json(j), ParameterError);
}

TEST_CASE("config hash and output directory") {
  RunConfig a = parse_config({"flow", "--K", "8"});
  RunConfig b = parse_config({"flow", "--K", "8", "--output_dir", "elsewhere"});
  RunConfig c = parse_config({"flow", "--K", "9"});
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));

  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir(a) == fs::path("."));
  ::setenv(kOutputDirEnv, "/tmp/s3flow_env_out", 1);
  CHECK(resolve_output_dir(a) == fs::path("/tmp/s3flow_env_out"));
  CHECK(resolve_output_dir(b) == fs::path("elsewhere"));
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("identical configuration gives identical CSV") {
  RunConfig cfg = parse_config({"flow", "--K", "6", "--dt", "1e-3", "--t_max", "0.02", "--f", "axial:0.3",
                                "--init", "random:0.05", "--seed", "9"});
  auto once = [&] {
    const FlowState init = initial_state(parse_init_spec(cfg).w, cfg.flow);
    return diagnostics_csv(run(init, parse_f_spec(cfg.f_spec), cfg.flow).trajectory);
  };
  const std::string a = once(), b = once();
  CHECK(a == b);
  CHECK(std::count(a.begin(), a.end(), '\n') == 22);
}

TEST_CASE("verify subset and negative control") {
  const auto items = verify_suite({.only = {"spectrum"}});
  REQUIRE(items.size() == 1);
  CHECK(items[0].passed);
  CHECK(items[0].detail.find("4896") != std::string::npos);
  const VerifyItem bad = run_verify_item("spectrum", {.inject_fault = true});
  CHECK_FALSE(bad.passed);
  CHECK(run_verify_item("morse").passed);
  CHECK_THROWS_AS(verify_suite({.only = {"nonsense"}}), UsageError);
}

TEST_CASE("command line tool") {
  const fs::path d = scratch_dir("tool");
  const std::string tool = S3FLOW_TOOL_PATH;
  auto sh = [&](const std::string& args) {
    const std::string cmd = tool + " " + args + " > " + (d / "out.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(sh("spectrum --K 4") == 0);
  CHECK(slurp(d / "out.txt").find("120") != std::string::npos);
  CHECK(sh("flow --K -4") == 2);
  CHECK(sh("morse --f const2") == 3);
  CHECK(sh("morse --f axial:0.3 --output_dir " + d.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(d / "run_morse.json"))["m"] == nlohmann::json({1, 0, 0, 0}));
  {
    std::ofstream out(d / "points.json");
    out << R"([{"index": 3, "laplacian_sign": -1, "value": 2.3}, {"index": 3, "laplacian_sign": -1, "value": 2.1}])";
  }
  CHECK(sh("morse --data " + (d / "points.json").string() + " --formats csv") == 0);
  CHECK(slurp(d / "out.txt").find("\"theorem_existence\": true") != std::string::npos);
  CHECK(sh("flow --K 4 --t_max 0.01 --f axial:0.3 --init random:0.02 --prefix r --output_dir " + d.string()) == 0);
  CHECK(fs::exists(d / "r_diagnostics.csv"));
  CHECK(load_snapshot(d / "r_final.json").band_limit == 4);
  CHECK(sh("flow --K 4 --t_max 0.02 --f axial:0.3 --init snapshot:" + (d / "r_final.json").string() +
           " --prefix r2 --output_dir " + d.string()) == 0);
  CHECK(sh("bubble --K 8 --eps 0.6 --output_dir " + d.string()) == 0);
  CHECK(sh("shadow --f axial:0.3 --p 1,0,0,1 --eps 0.2 --horizon 1 --output_dir " + d.string()) == 0);
  CHECK(sh("verify --only spectrum") == 0);
  CHECK(sh("verify --only spectrum --inject_fault") == 1);
}
