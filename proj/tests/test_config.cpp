#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "driftlab/config.hpp"

using namespace driftlab;

namespace {

std::string parse_error(const std::string& text, std::vector<Override> overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::map<std::string, std::string> entries(const RunConfig& c) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : effective_entries(c)) out[k] = v;
  return out;
}

}  // namespace

TEST_CASE("minimal classify config is filled with defaults") {
  const RunConfig c = parse_config("command=classify, field=critical_lamperti{c=0.5}");
  CHECK(c.command == Command::Classify);
  CHECK(c.field == DriftField::critical_lamperti(0.5));
  CHECK(c.x0 == 2.0);
  CHECK(c.x_max == 1e4);
  CHECK(c.grid == 512);
  CHECK_FALSE(c.seed.has_value());
  const auto e = entries(c);
  CHECK(e.at("x0") == "2");
  CHECK(e.at("x_max") == "10000");
  CHECK(e.at("grid") == "512");
  CHECK(e.at("field") == "critical_lamperti{c=0.5}");
  CHECK(e.at("limit_time") == "1e+08");
}

TEST_CASE("unknown command is rejected with its line and key") {
  const std::string msg = parse_error("c=0.5\ncommand=unknown_cmd\n");
  CHECK(msg.find("line 1") != std::string::npos);
  CHECK(msg.find("'c'") != std::string::npos);
  const std::string cmd = parse_error("field=zero\ncommand=unknown_cmd\n");
  CHECK(cmd.find("line 2") != std::string::npos);
  CHECK(cmd.find("unknown_cmd") != std::string::npos);
}

TEST_CASE("diagnostics name the line and key") {
  CHECK(parse_error("command=classify, field=zero, bogus=1").find("line 1: key 'bogus'") != std::string::npos);
  CHECK(parse_error("command=classify\nfield=zero\nfield=zero").find("line 3: key 'field': duplicate") !=
        std::string::npos);
  CHECK(parse_error("command=classify, field=zero, grid=abc").find("key 'grid'") != std::string::npos);
  CHECK(parse_error("command=classify, field=zero\nx0=5, x_max=3").find("line 2: key 'x_max'") !=
        std::string::npos);
  CHECK(parse_error("command=classify").find("'field'") != std::string::npos);
  CHECK(parse_error("field=zero").find("'command'") != std::string::npos);
  CHECK(parse_error("command=classify, field=power_law{rho=0.1}").find("beta") != std::string::npos);
  CHECK(parse_error("command=classify, field=zero{c=1}").find("line 1") != std::string::npos);
  CHECK(parse_error("command=classify, field=critical_lamperti{c=-1}").find("field") != std::string::npos);
  CHECK(parse_error("command=classify, field=zero\nnot a pair\n").find("line 2") != std::string::npos);
  CHECK(parse_error("command=experiment, field=zero, L=1, a=2").find("'L'") != std::string::npos);
  CHECK(parse_error("command=experiment, field=zero, n_paths=0").find("n_paths") != std::string::npos);
  CHECK(parse_error("command=classify, field=zero, strict=maybe").find("strict") != std::string::npos);
  CHECK(parse_error("command=classify, field=zero, up=gamma{k=0}").find("'up'") != std::string::npos);
  CHECK(parse_error("command=classify, field=mean_reverting{kappa=1}").find("field") != std::string::npos);
}

TEST_CASE("comments and blank lines are ignored") {
  const RunConfig c = parse_config("# header\n\ncommand = classify   # trailing\n  field = zero\n");
  CHECK(c.command == Command::Classify);
  CHECK(c.field == DriftField::zero());
}

TEST_CASE("families and nested parameters") {
  const RunConfig c = parse_config(
      "command=simulate\n"
      "field=power_law{rho=0.5, beta=0.75}\n"
      "up=gamma{k=2}\n"
      "down=uniform{d=0.25}\n"
      "horizon=10\n");
  CHECK(c.field == DriftField::power_law(0.5, 0.5, 0.75));
  CHECK(c.up == JumpLaw::gamma(2.0));
  CHECK(c.down == JumpLaw::uniform(0.25));
  const RunConfig x = parse_config("command=classify, field=power_law{rho=0.5, alpha=0.1, beta=0.75}");
  CHECK(x.field == DriftField::power_law(0.5, 0.1, 0.75));
  const RunConfig e = parse_config("command=classify, field=critical_lamperti{c=1}, x_floor=3, up=exponential");
  CHECK(e.field == DriftField{drift::CriticalLamperti{1.0}, 3.0});
  CHECK(e.up == JumpLaw::exponential());
}

TEST_CASE("bd-oracle can run on the ratio family without a field") {
  const RunConfig c = parse_config("command=bd-oracle, chain=ratio{c=2}");
  REQUIRE(c.chain_c.has_value());
  CHECK(*c.chain_c == 2.0);
  CHECK(parse_error("command=bd-oracle, chain=field").find("'field'") != std::string::npos);
}

TEST_CASE("tabulated fields load from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "driftlab_tab_test.csv";
  {
    std::ofstream out(path);
    out << "abs_x,t,phi\n0,0,0.4\n0,10,0.2\n5,0,0.1\n5,10,0.0\n";
  }
  const RunConfig c = parse_config("command=classify, field=tabulated{file=" + path.string() + "}");
  const auto& tab = std::get<drift::Tabulated>(c.field.family());
  CHECK(tab.abs_x == std::vector<double>{0.0, 5.0});
  CHECK(tab.t == std::vector<double>{0.0, 10.0});
  CHECK(tab.values == std::vector<double>{0.4, 0.2, 0.1, 0.0});
  CHECK(parse_config(to_config_text(c)) == c);
  {
    std::ofstream out(path);
    out << "x,t,phi\n";
  }
  CHECK(parse_error("command=classify, field=tabulated{file=" + path.string() + "}").find("header") !=
        std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("overrides win and report their origin") {
  const std::vector<Override> o = {{"x0", "4"}, {"seed", "99"}, {"field", "critical_lamperti{c=3}"}};
  const RunConfig c = parse_config("command=classify, field=zero, x0=3", o);
  CHECK(c.x0 == 4.0);
  CHECK(c.seed == 99u);
  CHECK(c.field == DriftField::critical_lamperti(3.0));
  CHECK(parse_error("command=classify, field=zero", {{"grid", "5"}}).find("override 'grid'") !=
        std::string::npos);
  CHECK(parse_error("command=classify, field=zero", {{"nokey", "5"}}).find("override 'nokey'") !=
        std::string::npos);
}

TEST_CASE("config text round-trips") {
  const std::vector<std::string> texts = {
      "command=classify, field=critical_lamperti{c=0.5}",
      "command=classify, field=power_law{rho=0.1, beta=0.75}, method=mv_critical, grid=1000",
      "command=bd-oracle, chain=ratio{c=2}, n_max=5000, tail_extension=0",
      "command=bd-oracle, field=critical_lamperti{c=3}, quadrature_points=64, n0=3",
      "command=experiment, field=zero, horizon=20000, n_paths=10, L=50, a=1, seed=18446744073709551615",
      "command=experiment, kind=occupancy, field=mean_reverting{kappa=0.2}, total_time=1e6, "
      "occ_min=-5, occ_max=5, up=exponential, down=gamma{k=3}",
      "command=check, field=critical_lamperti{c=0.1}, sigma=2.5, horizon=7, n_paths=200, strict=true",
      "command=simulate, field=zero, horizon=0.1, output=out.csv, format=csv, workers=3, x_floor=0.3",
      "command=classify, field=critical_lamperti{c=0.1}, limit_time=12345.678, up=uniform{d=0.3333333333333333}",
  };
  for (const auto& text : texts) {
    CAPTURE(text);
    const RunConfig c = parse_config(text);
    const std::string canonical = to_config_text(c);
    const RunConfig again = parse_config(canonical);
    CHECK(again == c);
    CHECK(to_config_text(again) == canonical);
  }
}
