#include "porous/app/config.hpp"

#include <cmath>
#include <set>

#include "porous/ident/problem.hpp"

namespace porous::app {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kKindNames{"darcy-forward", "ident",      "pfem-sweep", "pfem-solve",
                                                     "pore-pack",     "pore-solve", "pore-pdf"};

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      fail(path_, "expected an object");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      out = as_number(*v, at(key));
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      out = as_int(*v, at(key));
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) {
        fail(at(key), "expected a boolean");
      }
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) {
        fail(at(key), "expected a string");
      }
      out = v->get<std::string>();
    }
  }
  template <std::size_t N>
  void numbers(const std::string& key, std::array<double, N>& out) {
    if (const json* v = find(key)) {
      out = as_number_array<N>(*v, at(key));
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        fail(at(key), "unknown field");
      }
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      fail(path, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      fail(path, "expected a finite number");
    }
    return x;
  }
  static int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
      fail(path, "expected an integer");
    }
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      fail(path, "integer out of range");
    }
    return static_cast<int>(x);
  }
  template <std::size_t N>
  static std::array<double, N> as_number_array(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != N) {
      fail(path, "expected an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
  }
  static std::vector<double> as_number_list(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  static std::vector<int> as_int_list(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of integers");
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_int(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  static std::vector<std::array<double, 2>> as_pair_list(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of pairs");
    }
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number_array<2>(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read(Reader& r, const std::string& key, MeshSpec& m) {
  const json* v = r.find(key);
  if (v == nullptr) {
    return;
  }
  Reader s(*v, r.at(key));
  s.integer("nx", m.nx);
  s.integer("ny", m.ny);
  s.numbers("domain", m.domain);
  s.integer("px", m.px);
  s.integer("py", m.py);
  s.finish();
}

json write(const MeshSpec& m) {
  return {{"nx", m.nx}, {"ny", m.ny}, {"domain", m.domain}, {"px", m.px}, {"py", m.py}};
}

void read(Reader& r, const std::string& key, PackSpec& p) {
  const json* v = r.find(key);
  if (v == nullptr) {
    return;
  }
  Reader s(*v, r.at(key));
  s.string("arrangement", p.arrangement);
  s.number("diameter", p.diameter);
  s.numbers("box", p.box);
  s.number("target_porosity", p.target_porosity);
  s.finish();
}

json write(const PackSpec& p) {
  return {{"arrangement", p.arrangement},
          {"diameter", p.diameter},
          {"box", p.box},
          {"target_porosity", p.target_porosity}};
}

void read(Reader& r, const std::string& key, FlowSpec& f) {
  const json* v = r.find(key);
  if (v == nullptr) {
    return;
  }
  Reader s(*v, r.at(key));
  s.integer("cells_per_diameter", f.cells_per_diameter);
  s.number("viscosity", f.viscosity);
  s.number("gradient", f.gradient);
  s.number("tolerance", f.tolerance);
  s.integer("max_iterations", f.max_iterations);
  s.finish();
}

json write(const FlowSpec& f) {
  return {{"cells_per_diameter", f.cells_per_diameter},
          {"viscosity", f.viscosity},
          {"gradient", f.gradient},
          {"tolerance", f.tolerance},
          {"max_iterations", f.max_iterations}};
}

void read_params(Reader& r, DarcyForwardParams& p) {
  read(r, "mesh", p.mesh);
  if (const json* v = r.find("inverse_permeability")) {
    p.inverse_permeability = Reader::as_pair_list(*v, r.at("inverse_permeability"));
  }
  r.string("source", p.source);
  r.number("stabilization_velocity", p.stabilization_velocity);
  r.number("stabilization_pressure", p.stabilization_pressure);
}

json write_params(const DarcyForwardParams& p) {
  return {{"mesh", write(p.mesh)},
          {"inverse_permeability", p.inverse_permeability},
          {"source", p.source},
          {"stabilization_velocity", p.stabilization_velocity},
          {"stabilization_pressure", p.stabilization_pressure}};
}

void read_params(Reader& r, IdentParams& p) {
  read(r, "mesh", p.mesh);
  r.string("source", p.source);
  r.string("observation", p.observation);
  if (const json* v = r.find("lattice")) {
    const auto l = Reader::as_int_list(*v, r.at("lattice"));
    if (l.size() != 2) {
      Reader::fail(r.at("lattice"), "expected two integers");
    }
    p.lattice = {l[0], l[1]};
  }
  if (const json* v = r.find("points")) {
    p.points = Reader::as_pair_list(*v, r.at("points"));
  }
  if (const json* v = r.find("quantities")) {
    Reader s(*v, r.at("quantities"));
    s.boolean("ux", p.quantities[0]);
    s.boolean("uy", p.quantities[1]);
    s.boolean("p", p.quantities[2]);
    s.finish();
  }
  r.number("alpha", p.alpha);
  r.number("lower", p.lower);
  if (const json* v = r.find("upper")) {
    if (v->is_null()) {
      p.upper.reset();
    } else {
      p.upper = Reader::as_number(*v, r.at("upper"));
    }
  }
  r.number("noise", p.noise);
  if (const json* v = r.find("reference")) {
    if (v->is_null()) {
      p.reference.reset();
    } else {
      p.reference = Reader::as_number_list(*v, r.at("reference"));
    }
  }
  r.number("tolerance", p.tolerance);
  r.integer("max_outer", p.max_outer);
  r.integer("max_inner", p.max_inner);
}

json write_params(const IdentParams& p) {
  return {{"mesh", write(p.mesh)},
          {"source", p.source},
          {"observation", p.observation},
          {"lattice", p.lattice},
          {"points", p.points},
          {"quantities", {{"ux", p.quantities[0]}, {"uy", p.quantities[1]}, {"p", p.quantities[2]}}},
          {"alpha", p.alpha},
          {"lower", p.lower},
          {"upper", p.upper ? json(*p.upper) : json(nullptr)},
          {"noise", p.noise},
          {"reference", p.reference ? json(*p.reference) : json(nullptr)},
          {"tolerance", p.tolerance},
          {"max_outer", p.max_outer},
          {"max_inner", p.max_inner}};
}

void read_params(Reader& r, PfemSweepParams& p) {
  r.number("pe_min", p.pe_min);
  r.number("pe_max", p.pe_max);
  r.integer("points", p.points);
  if (const json* v = r.find("degrees")) {
    p.degrees = Reader::as_int_list(*v, r.at("degrees"));
  }
  r.integer("max_threshold_degree", p.max_threshold_degree);
}

json write_params(const PfemSweepParams& p) {
  return {{"pe_min", p.pe_min},
          {"pe_max", p.pe_max},
          {"points", p.points},
          {"degrees", p.degrees},
          {"max_threshold_degree", p.max_threshold_degree}};
}

void read_params(Reader& r, PfemSolveParams& p) {
  r.number("velocity", p.velocity);
  r.number("diffusivity", p.diffusivity);
  r.integer("elements", p.elements);
  if (const json* v = r.find("degrees")) {
    p.degrees = Reader::as_int_list(*v, r.at("degrees"));
  }
  r.string("source", p.source);
  r.integer("samples_per_element", p.samples_per_element);
}

json write_params(const PfemSolveParams& p) {
  return {{"velocity", p.velocity},
          {"diffusivity", p.diffusivity},
          {"elements", p.elements},
          {"degrees", p.degrees},
          {"source", p.source},
          {"samples_per_element", p.samples_per_element}};
}

void read_params(Reader& r, PorePackParams& p) { read(r, "pack", p.pack); }

json write_params(const PorePackParams& p) { return {{"pack", write(p.pack)}}; }

void read_params(Reader& r, PoreSolveParams& p) {
  read(r, "pack", p.pack);
  r.string("pack_file", p.pack_file);
  read(r, "flow", p.flow);
  r.boolean("write_field", p.write_field);
}

json write_params(const PoreSolveParams& p) {
  return {{"pack", write(p.pack)}, {"pack_file", p.pack_file}, {"flow", write(p.flow)}, {"write_field", p.write_field}};
}

void read_params(Reader& r, PorePdfParams& p) {
  read(r, "pack", p.pack);
  read(r, "flow", p.flow);
  if (const json* v = r.find("domain_sizes")) {
    p.domain_sizes = Reader::as_number_list(*v, r.at("domain_sizes"));
  }
  r.integer("realizations", p.realizations);
  r.boolean("normalize", p.normalize);
  if (const json* v = r.find("bins")) {
    if (v->is_null()) {
      p.bins.reset();
    } else {
      p.bins = Reader::as_number_array<3>(*v, r.at("bins"));
    }
  }
}

json write_params(const PorePdfParams& p) {
  return {{"pack", write(p.pack)},
          {"flow", write(p.flow)},
          {"domain_sizes", p.domain_sizes},
          {"realizations", p.realizations},
          {"normalize", p.normalize},
          {"bins", p.bins ? json(*p.bins) : json(nullptr)}};
}

ExperimentParams default_params(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::darcy_forward:
      return DarcyForwardParams{};
    case ExperimentKind::ident:
      return IdentParams{};
    case ExperimentKind::pfem_sweep:
      return PfemSweepParams{};
    case ExperimentKind::pfem_solve:
      return PfemSolveParams{};
    case ExperimentKind::pore_pack:
      return PorePackParams{};
    case ExperimentKind::pore_solve:
      return PoreSolveParams{};
    case ExperimentKind::pore_pdf:
      return PorePdfParams{};
  }
  throw ConfigError("config: unknown experiment kind");
}

void check(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError("config: " + what);
  }
}

void validate_mesh(const MeshSpec& m) {
  check(m.nx >= 2 && m.ny >= 2 && m.nx % 2 == 0 && m.ny % 2 == 0, "mesh.nx and mesh.ny must be even and >= 2");
  check(m.domain[2] > m.domain[0] && m.domain[3] > m.domain[1], "mesh.domain must have positive extent");
  check(m.px >= 1 && m.py >= 1, "mesh.px and mesh.py must be positive");
  check(m.nx % m.px == 0 && m.ny % m.py == 0, "the partition must align with mesh cells");
}

void validate_pack(const PackSpec& p) {
  check(p.arrangement == "hexagonal" || p.arrangement == "random", "pack.arrangement must be hexagonal or random");
  check(p.diameter > 0.0, "pack.diameter must be positive");
  for (double b : p.box) {
    check(b >= 4.0, "pack.box edges must be at least 4 diameters");
  }
  check(p.target_porosity > 0.26 && p.target_porosity < 1.0, "pack.target_porosity must lie in (0.26, 1)");
}

void validate_flow(const FlowSpec& f) {
  check(f.cells_per_diameter >= 4, "flow.cells_per_diameter must be at least 4");
  check(f.viscosity > 0.0, "flow.viscosity must be positive");
  check(f.gradient != 0.0, "flow.gradient must be non-zero");
  check(f.tolerance > 0.0, "flow.tolerance must be positive");
  check(f.max_iterations > 0, "flow.max_iterations must be positive");
}

struct Validator {
  void operator()(const DarcyForwardParams& p) const {
    validate_mesh(p.mesh);
    check(p.inverse_permeability.empty() ||
              p.inverse_permeability.size() == static_cast<std::size_t>(p.mesh.px * p.mesh.py),
          "inverse_permeability needs one pair per subdomain");
    for (const auto& e : p.inverse_permeability) {
      check(e[0] > 0.0 && e[1] > 0.0, "inverse_permeability entries must be positive");
    }
    check(p.source == "manufactured", "source must be \"manufactured\"");
    check(p.stabilization_velocity >= 0.0 && p.stabilization_pressure >= 0.0,
          "stabilization weights must be non-negative");
  }
  void operator()(const IdentParams& p) const {
    validate_mesh(p.mesh);
    check(p.source == "manufactured", "source must be \"manufactured\"");
    check(p.observation == "identity" || p.observation == "lattice" || p.observation == "points",
          "observation must be identity, lattice or points");
    check(p.lattice[0] >= 1 && p.lattice[1] >= 1, "lattice counts must be positive");
    check(p.observation != "points" || !p.points.empty(), "points observation needs a point list");
    check(p.quantities[0] || p.quantities[1] || p.quantities[2], "at least one quantity must be measured");
    check(p.alpha >= 0.0, "alpha must be non-negative");
    check(p.lower > 0.0, "lower must be positive");
    check(!p.upper || *p.upper > p.lower, "upper must exceed lower");
    check(p.noise >= 0.0, "noise must be non-negative");
    if (p.reference) {
      check(p.reference->size() == static_cast<std::size_t>(2 * p.mesh.px * p.mesh.py),
            "reference needs two entries per subdomain");
      for (double r : *p.reference) {
        check(r >= p.lower && (!p.upper || r <= *p.upper), "reference entries must satisfy the bounds");
      }
    }
    check(p.tolerance > 0.0, "tolerance must be positive");
    check(p.max_outer >= 1 && p.max_inner >= 1, "iteration caps must be positive");
  }
  void operator()(const PfemSweepParams& p) const {
    check(p.pe_min > 0.0 && p.pe_max > p.pe_min, "need 0 < pe_min < pe_max");
    check(p.points >= 2, "points must be at least 2");
    check(!p.degrees.empty(), "degrees must not be empty");
    for (int d : p.degrees) {
      check(d >= 1 && d <= 20, "degrees must lie in 1..20");
    }
    check(p.max_threshold_degree >= 1 && p.max_threshold_degree <= 21, "max_threshold_degree must lie in 1..21");
  }
  void operator()(const PfemSolveParams& p) const {
    check(p.velocity >= 0.0 && p.diffusivity > 0.0, "need velocity >= 0 and diffusivity > 0");
    check(p.elements >= 1, "elements must be positive");
    check(!p.degrees.empty(), "degrees must not be empty");
    for (int d : p.degrees) {
      check(d >= 1 && d <= 20, "degrees must lie in 1..20");
    }
    check(p.source == "zero" || p.source == "unit", "source must be zero or unit");
    check(p.samples_per_element >= 1, "samples_per_element must be positive");
  }
  void operator()(const PorePackParams& p) const { validate_pack(p.pack); }
  void operator()(const PoreSolveParams& p) const {
    if (p.pack_file.empty()) {
      validate_pack(p.pack);
    }
    validate_flow(p.flow);
  }
  void operator()(const PorePdfParams& p) const {
    validate_pack(p.pack);
    check(p.pack.arrangement == "random", "pore-pdf samples random packs only");
    validate_flow(p.flow);
    check(!p.domain_sizes.empty(), "domain_sizes must not be empty");
    for (double s : p.domain_sizes) {
      check(s >= 4.0, "domain_sizes must be at least 4 diameters");
    }
    check(p.realizations >= 1, "realizations must be positive");
    if (p.bins) {
      check((*p.bins)[1] > 0.0 && (*p.bins)[2] >= 1.0 && std::floor((*p.bins)[2]) == (*p.bins)[2],
            "bins must be [lower, width > 0, count >= 1]");
    }
  }
};

}  // namespace

std::string_view kind_name(ExperimentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

ExperimentKind parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) {
      return static_cast<ExperimentKind>(i);
    }
  }
  throw ConfigError("config: unknown experiment kind \"" + std::string(name) + "\"");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.params = default_params(kind);
  c.seed = ident::kDefaultReferenceSeed;
  return c;
}

void ExperimentConfig::validate() const {
  check(params.index() == static_cast<std::size_t>(kind), "parameter block does not match the experiment kind");
  std::visit(Validator{}, params);
}

ExperimentConfig config_from_json(const json& j) {
  Reader r(j, "");
  const json* kind = r.find("kind");
  if (kind == nullptr || !kind->is_string()) {
    Reader::fail("kind", "required string");
  }
  ExperimentConfig c = ExperimentConfig::defaults(parse_kind(kind->get<std::string>()));
  r.string("output_dir", c.output_dir);
  if (const json* s = r.find("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      Reader::fail("seed", "expected a non-negative integer");
    }
    c.seed = s->get<std::uint64_t>();
  }
  if (const json* p = r.find("params")) {
    Reader pr(*p, "params");
    std::visit([&](auto& block) { read_params(pr, block); }, c.params);
    pr.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

json params_to_json(const ExperimentConfig& config) {
  return std::visit([](const auto& block) { return write_params(block); }, config.params);
}

json config_to_json(const ExperimentConfig& config) {
  return {{"kind", kind_name(config.kind)},
          {"output_dir", config.output_dir},
          {"seed", config.seed},
          {"params", params_to_json(config)}};
}

}  // namespace porous::app
