#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "porous/app/config.hpp"
#include "porous/app/io.hpp"
#include "porous/app/run.hpp"
#include "porous/pore/pack.hpp"

using namespace porous;
using namespace porous::app;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("porous-unit-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("every default config round-trips") {
  for (int k = 0; k <= static_cast<int>(ExperimentKind::pore_pdf); ++k) {
    ExperimentConfig c = ExperimentConfig::defaults(static_cast<ExperimentKind>(k));
    c.output_dir = "out/x";
    c.seed = 0xFFFFFFFFFFFFFFFFull;
    const json j = config_to_json(c);
    const ExperimentConfig back = config_from_json(j);
    CHECK(back == c);
    CHECK(config_to_json(back) == j);
    CHECK(parse_config(j.dump()) == c);
  }
}

TEST_CASE("non-default values survive a round trip") {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::ident);
  auto& p = std::get<IdentParams>(c.params);
  p.observation = "points";
  p.points = {{0.1, 0.2}, {0.3, 0.7}};
  p.upper = 10.0;
  p.reference = std::vector<double>(32, 7.0 / 3.0);
  p.quantities = {true, false, true};
  p.alpha = 1e-7;
  CHECK(parse_config(config_to_json(c).dump()) == c);

  ExperimentConfig d = ExperimentConfig::defaults(ExperimentKind::pore_pdf);
  std::get<PorePdfParams>(d.params).bins = std::array<double, 3>{-0.5, 0.1, 30};
  std::get<PorePdfParams>(d.params).domain_sizes = {4.0, 4.5};
  CHECK(parse_config(config_to_json(d).dump()) == d);
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep","extra":1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep","params":{"points":10,"pointz":3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pore-solve","params":{"flow":{"viscosity":1,"mu":2}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep","params":{"points":"10"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep","params":{"points":10.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep","seed":-1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"nonsense"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"params":{}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pfem-sweep")"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"ident","params":{"mesh":{"nx":63}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"pore-pdf","params":{"pack":{"arrangement":"hexagonal"}}})"), ConfigError);
  CHECK_NOTHROW(parse_config(R"({"kind":"pfem-solve","params":{"degrees":[2,4]}})"));
}

TEST_CASE("sha256 of known inputs") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("derived seeds are deterministic and distinct") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 2.322185354626085, -1e-300, 6.02e23}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("pack files round-trip") {
  const pore::SpherePack p = pore::random_pack({8e-3, 8e-3, 8e-3}, 2e-3, 11);
  const pore::SpherePack q = pack_from_json(json::parse(pack_to_json(p).dump()));
  CHECK(q.centers == p.centers);
  CHECK(q.box == p.box);
  CHECK(q.seed == p.seed);
  json bad = pack_to_json(p);
  bad["colour"] = "red";
  CHECK_THROWS_AS(pack_from_json(bad), InvalidArgument);
}

TEST_CASE("run writes a manifest covering every artifact") {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::pfem_solve);
  c.output_dir = scratch("solve").string();
  const RunResult r = run(c);
  CHECK(fs::exists(r.output_dir / "manifest.json"));
  const json m = json::parse(slurp(r.output_dir / "manifest.json"));
  CHECK(sha256_hex(slurp(r.output_dir / "manifest.json")) == r.manifest_sha256);
  CHECK(m["kind"] == "pfem-solve");
  CHECK(!m.contains("output_dir"));
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(r.output_dir)) {
    files += e.is_regular_file() ? 1 : 0;
  }
  CHECK(m["artifacts"].size() == files - 1);
  for (const auto& a : m["artifacts"]) {
    CHECK(sha256_file(r.output_dir / a["path"].get<std::string>()) == a["sha256"]);
  }
  // Every CSV starts with a header row.
  const std::string nodal = slurp(r.output_dir / "nodal.csv");
  CHECK(nodal.rfind("p,x,c_h,c_exact\n", 0) == 0);
  // No staging directory is left behind.
  for (const auto& e : fs::directory_iterator(r.output_dir.parent_path())) {
    CHECK(e.path().filename().string().find("staging") == std::string::npos);
  }
}

TEST_CASE("identical configs give identical manifests regardless of threads") {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::pore_pdf);
  auto& p = std::get<PorePdfParams>(c.params);
  p.domain_sizes = {4.0};
  p.realizations = 3;
  p.flow.cells_per_diameter = 6;
  p.normalize = true;
  c.output_dir = scratch("pdf1").string();
  const RunResult a = run(c, {1});
  c.output_dir = scratch("pdf2").string();
  const RunResult b = run(c, {3});
  CHECK(a.manifest_sha256 == b.manifest_sha256);
  c.seed += 1;
  c.output_dir = scratch("pdf3").string();
  CHECK(run(c, {3}).manifest_sha256 != a.manifest_sha256);
}

TEST_CASE("failed runs leave no artifacts") {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::pore_solve);
  auto& p = std::get<PoreSolveParams>(c.params);
  p.pack_file = scratch("missing.json").string();
  c.output_dir = scratch("failed").string();
  CHECK_THROWS_AS(run(c), InvalidArgument);
  CHECK_FALSE(fs::exists(c.output_dir));
  for (const auto& e : fs::directory_iterator(fs::path(c.output_dir).parent_path())) {
    CHECK(e.path().filename().string().find("staging") == std::string::npos);
  }
}

TEST_CASE("figure ids") {
  for (const auto& id : figure_ids()) {
    CHECK_FALSE(figure_configs(id).empty());
  }
  CHECK(figure_configs("tab1-analog").size() == 2);
  CHECK_THROWS_AS(figure_configs("fig99"), UnknownFigure);
}
