#include "porous/app/run.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include <openssl/evp.h>

#include "porous/app/io.hpp"
#include "porous/darcy/fem.hpp"
#include "porous/ident/problem.hpp"
#include "porous/pfem/convection_diffusion.hpp"
#include "porous/pore/pack.hpp"
#include "porous/pore/pdf.hpp"
#include "porous/pore/stokes.hpp"
#include "porous/pore/voxel.hpp"

namespace porous::app {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Hasher {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  Hasher() {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw Error("sha256: digest initialization failed");
    }
  }
  ~Hasher() { EVP_MD_CTX_free(ctx); }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }
};

// Runs tasks 0..n-1 on up to `threads` workers. Results are stored by index,
// so the outcome does not depend on scheduling; the lowest-index failure is
// rethrown.
template <class T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& task) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string size_tag(double d) { return format_double(d) + "D"; }

darcy::Rectangle rectangle(const MeshSpec& m) { return {m.domain[0], m.domain[1], m.domain[2], m.domain[3]}; }

// ---------------------------------------------------------------- darcy

json run_darcy(const DarcyForwardParams& p, const fs::path& dir) {
  const darcy::Rectangle dom = rectangle(p.mesh);
  const darcy::StructuredQuadMesh mesh(p.mesh.nx, p.mesh.ny, dom);
  const darcy::Partition part = darcy::grid_partition(dom, p.mesh.px, p.mesh.py);
  const darcy::PermeabilityField perm =
      p.inverse_permeability.empty() ? darcy::PermeabilityField::uniform(part, 1.0, 1.0)
                                     : darcy::PermeabilityField(part, p.inverse_permeability);
  const darcy::DarcySystem sys = darcy::assemble_darcy(mesh, perm, darcy::manufactured_source,
                                                       {p.stabilization_velocity, p.stabilization_pressure});
  const darcy::FemState state = darcy::solve_state(sys);
  write_darcy_state(dir / "state.csv", mesh, state);
  json header = darcy_header(mesh, perm);
  header["stabilization"] = {{"velocity", p.stabilization_velocity}, {"pressure", p.stabilization_pressure}};
  write_json(dir / "state.json", header);
  const darcy::L2Errors err = darcy::l2_errors(mesh, state, darcy::manufactured_solution);
  json summary = {{"vertices", mesh.num_vertices()},
                  {"dofs", sys.discretization->num_dofs()},
                  {"l2_error_vs_manufactured", {{"velocity", err.velocity}, {"pressure", err.pressure}}}};
  write_json(dir / "result.json", summary);
  return summary;
}

// ---------------------------------------------------------------- ident

json run_ident(const IdentParams& p, std::uint64_t seed, const fs::path& dir) {
  const darcy::Rectangle dom = rectangle(p.mesh);
  const darcy::StructuredQuadMesh mesh(p.mesh.nx, p.mesh.ny, dom);
  const darcy::Partition part = darcy::grid_partition(dom, p.mesh.px, p.mesh.py);
  const std::size_t n = 2 * part.size();
  auto disc = std::make_shared<const darcy::DarcyDiscretization>(mesh, part, darcy::manufactured_source);

  const ident::MeasuredQuantities qty{p.quantities[0], p.quantities[1], p.quantities[2]};
  ident::ObservationOperator op = ident::ObservationOperator::identity();
  if (p.observation == "lattice") {
    op = ident::ObservationOperator::lattice(dom, p.lattice[0], p.lattice[1], qty);
  } else if (p.observation == "points") {
    std::vector<darcy::Point2> pts;
    for (const auto& x : p.points) {
      pts.push_back({x[0], x[1]});
    }
    op = ident::ObservationOperator::point_set(pts, qty);
  }

  ident::ConstraintSet cons;
  cons.lower = Eigen::VectorXd::Constant(n, p.lower);
  cons.upper = Eigen::VectorXd::Constant(n, p.upper ? *p.upper : std::numeric_limits<double>::infinity());
  const ident::ParameterVector ref =
      p.reference ? Eigen::Map<const Eigen::VectorXd>(p.reference->data(), n).eval()
                  : ident::default_reference_parameters(n, seed);
  if (!cons.is_feasible(ref)) {
    throw ConfigError("config: the reference parameters violate the bounds; pass params.reference explicitly");
  }

  const Eigen::VectorXd z = ident::generate_synthetic_data(*disc, op, ref, p.noise, derive_seed(seed, 1));
  ident::ReducedObjective obj(disc, op.matrix(mesh), z, p.alpha);
  ident::PdasOptions opts;
  opts.tolerance = p.tolerance;
  opts.max_outer_iterations = p.max_outer;
  opts.max_inner_iterations = p.max_inner;
  const ident::PdasResult res = ident::pdas_solve(obj, cons.project(Eigen::VectorXd::Ones(n)), cons, opts);
  const ident::RelativeErrors err = ident::relative_parameter_errors(res.q, ref);

  json history = json::array();
  for (const auto& h : res.history) {
    history.push_back({{"value", h.value},
                       {"projected_gradient_norm", h.projected_gradient_norm},
                       {"active_lower", h.active_lower},
                       {"active_upper", h.active_upper},
                       {"newton_steps", h.newton_steps},
                       {"cg_iterations", h.cg_iterations},
                       {"inner_values", h.inner_values}});
  }
  json summary = {{"observation", p.observation},
                  {"measurements", z.size()},
                  {"q", vector_json(res.q)},
                  {"reference", vector_json(ref)},
                  {"relative_errors", {{"a", err.a}, {"b", err.b}}},
                  {"value", res.value},
                  {"projected_gradient_norm", res.projected_gradient_norm},
                  {"outer_iterations", res.history.size()},
                  {"newton_steps", res.total_newton_steps},
                  {"history", history}};
  write_json(dir / "result.json", summary);

  CsvTable params{{"subdomain", "a", "b", "a_ref", "b_ref"}, {}};
  std::vector<std::array<double, 2>> entries;
  for (std::size_t i = 0; i < part.size(); ++i) {
    params.add({double(i), res.q[2 * i], res.q[2 * i + 1], ref[2 * i], ref[2 * i + 1]});
    entries.push_back({res.q[2 * i], res.q[2 * i + 1]});
  }
  params.write(dir / "parameters.csv");
  const darcy::FemState state = darcy::FemState::from_stacked(obj.state(res.q));
  write_darcy_state(dir / "state.csv", mesh, state);
  write_json(dir / "state.json", darcy_header(mesh, darcy::PermeabilityField(part, entries)));
  return summary;
}

// ---------------------------------------------------------------- pfem

json run_pfem_sweep(const PfemSweepParams& p, const fs::path& dir) {
  std::vector<double> pe(p.points);
  for (int i = 0; i < p.points; ++i) {
    pe[i] = p.pe_min + (p.pe_max - p.pe_min) * i / (p.points - 1);
  }
  CsvTable sweep{{"Pe", "p", "bar_gamma", "bar_gamma_p", "delta_gamma_p", "alpha_p"}, {}};
  for (int deg : p.degrees) {
    for (double x : pe) {
      const double bg = pfem::bar_gamma_p_numeric(deg, x, 1.0);
      sweep.add({x, double(deg), pfem::bar_gamma_exact(x, 1.0), bg, pfem::truncation_error(deg, x, 1.0),
                 pfem::alpha_p(deg, x)});
    }
  }
  sweep.write(dir / "sweep.csv");

  CsvTable thr{{"p", "max_stable_pe"}, {}};
  json thresholds = json::array();
  std::vector<double> px;
  std::vector<double> py;
  for (int deg = 1; deg <= p.max_threshold_degree; deg += 2) {
    const double t = pfem::max_stable_pe(deg);
    thr.add({double(deg), t});
    thresholds.push_back({{"p", deg}, {"max_stable_pe", t}});
    if (deg >= 3) {
      px.push_back(deg);
      py.push_back(t);
    }
  }
  thr.write(dir / "thresholds.csv");

  CsvTable mind{{"Pe", "min_degree"}, {}};
  for (double x : pe) {
    mind.add({x, double(pfem::min_degree_for_pe(x))});
  }
  mind.write(dir / "min_degree.csv");

  json summary = {{"thresholds", thresholds}};
  if (px.size() >= 2) {
    // Least-squares line through the odd-degree thresholds.
    const double m = double(px.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      sx += px[i];
      sy += py[i];
      sxx += px[i] * px[i];
      sxy += px[i] * py[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / m;
    double worst = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      worst = std::max(worst, std::abs(py[i] - (slope * px[i] + icpt)));
    }
    summary["threshold_fit"] = {{"slope", slope}, {"intercept", icpt}, {"max_residual", worst}};
  }
  write_json(dir / "result.json", summary);
  return summary;
}

json run_pfem_solve(const PfemSolveParams& p, const fs::path& dir) {
  pfem::ConvDiff1DProblem prob;
  prob.velocity = p.velocity;
  prob.diffusivity = p.diffusivity;
  prob.elements = p.elements;
  const bool unit = p.source == "unit";
  if (unit) {
    prob.source = [](double) { return 1.0; };
  } else {
    prob.right_value = 1.0;
  }
  const auto exact = [&](double x) {
    return unit ? pfem::analytic_solution_unit_source(p.velocity, p.diffusivity, x)
                : pfem::analytic_solution(p.velocity, p.diffusivity, x);
  };
  const double pe = prob.mesh_peclet();
  CsvTable nodal{{"p", "x", "c_h", "c_exact"}, {}};
  json runs = json::array();
  for (int deg : p.degrees) {
    const pfem::DiscreteSolution sol = pfem::solve_bvp(prob, deg);
    CsvTable prof{{"x", "c_h", "c_exact"}, {}};
    const int samples = p.elements * p.samples_per_element;
    double prof_err = 0.0;
    for (int s = 0; s <= samples; ++s) {
      const double x = double(s) / samples;
      const double c = sol.evaluate(x);
      prof.add({x, c, exact(x)});
      prof_err = std::max(prof_err, std::abs(c - exact(x)));
    }
    prof.write(dir / ("profile_p" + std::to_string(deg) + ".csv"));
    double nodal_err = 0.0;
    for (int j = 0; j <= p.elements; ++j) {
      const double x = sol.node(j);
      nodal.add({double(deg), x, sol.nodal()[j], exact(x)});
      nodal_err = std::max(nodal_err, std::abs(sol.nodal()[j] - exact(x)));
    }
    runs.push_back({{"p", deg},
                    {"alpha_p", pfem::alpha_p(deg, pe)},
                    {"oscillation_measure", pfem::oscillation_measure(sol.nodal())},
                    {"max_nodal_error", nodal_err},
                    {"max_profile_error", prof_err}});
  }
  nodal.write(dir / "nodal.csv");
  json summary = {{"peclet", pe}, {"degrees", runs}};
  write_json(dir / "result.json", summary);
  return summary;
}

// ---------------------------------------------------------------- pore

pore::SpherePack make_pack(const PackSpec& s, std::uint64_t seed) {
  if (s.arrangement == "hexagonal") {
    return pore::hexagonal_pack(s.diameter);
  }
  pore::RandomPackOptions o;
  o.target_porosity = s.target_porosity;
  const pore::Vec3 box{s.box[0] * s.diameter, s.box[1] * s.diameter, s.box[2] * s.diameter};
  return pore::random_pack(box, s.diameter, seed, o);
}

pore::StokesOptions stokes_options(const FlowSpec& f) {
  pore::StokesOptions o;
  o.viscosity = f.viscosity;
  o.gradient = f.gradient;
  o.tolerance = f.tolerance;
  o.max_iterations = f.max_iterations;
  return o;
}

json region_json(const pore::RegionFlow& r, double diameter) {
  return {{"cells", r.cells},
          {"porosity", r.porosity},
          {"superficial_velocity", r.superficial_velocity},
          {"intrinsic_velocity", r.intrinsic_velocity},
          {"permeability", r.permeability},
          {"blake_kozeny_150", pore::blake_kozeny(diameter, r.porosity, 150.0)},
          {"carman_kozeny_180", pore::blake_kozeny(diameter, r.porosity, 180.0)}};
}

json run_pore_pack(const PorePackParams& p, std::uint64_t seed, const fs::path& dir) {
  const pore::SpherePack pack = make_pack(p.pack, seed);
  write_json(dir / "pack.json", pack_to_json(pack));
  json summary = {{"spheres", pack.centers.size()}, {"porosity", pack.analytic_porosity()}, {"box", pack.box}};
  write_json(dir / "result.json", summary);
  return summary;
}

json run_pore_solve(const PoreSolveParams& p, std::uint64_t seed, const fs::path& dir) {
  const pore::SpherePack pack = p.pack_file.empty() ? make_pack(p.pack, seed) : pack_from_json(read_json(p.pack_file));
  write_json(dir / "pack.json", pack_to_json(pack));
  const pore::VoxelGrid grid = pore::voxelize(pack, p.flow.cells_per_diameter);
  const pore::StokesField f = pore::solve_stokes(grid, stokes_options(p.flow));
  if (p.write_field) {
    write_field(dir / "field.bin", f);
  }
  json summary = {{"dims", grid.n},
                  {"spheres", pack.centers.size()},
                  {"iterations", f.iterations},
                  {"momentum_residual", f.momentum_residual},
                  {"divergence", f.divergence},
                  {"total", region_json(pore::region_flow(f, grid, pack.diameter, pore::Region::total), pack.diameter)}};
  try {
    summary["inner"] = region_json(pore::region_flow(f, grid, pack.diameter, pore::Region::inner), pack.diameter);
  } catch (const InvalidArgument&) {
    summary["inner"] = nullptr;  // box too small for an inner region
  }
  write_json(dir / "result.json", summary);
  return summary;
}

struct Realization {
  std::uint64_t seed = 0;
  std::size_t spheres = 0;
  int iterations = 0;
  pore::RegionFlow total;
  pore::RegionFlow inner;
  pore::VelocityHistogram pdf_total;
  pore::VelocityHistogram pdf_inner;
};

json histogram_stats(const pore::VelocityHistogram& h) {
  return {{"samples", h.samples},
          {"mean", h.mean()},
          {"skewness", h.skewness()},
          {"mode", h.mode()},
          {"negative_mass", h.negative_mass()},
          {"mass_below", h.below},
          {"mass_above", h.above},
          {"support_max", h.support_max()},
          {"intrinsic_velocity", h.intrinsic_velocity}};
}

json run_pore_pdf(const PorePdfParams& p, std::uint64_t seed, const fs::path& dir, int threads) {
  pore::BinSpec spec = p.normalize ? pore::BinSpec::normalized() : pore::BinSpec::raw();
  if (p.bins) {
    spec = {(*p.bins)[0], (*p.bins)[1], static_cast<int>((*p.bins)[2])};
  }
  const int ns = static_cast<int>(p.domain_sizes.size());
  const int nr = p.realizations;
  const double d = p.pack.diameter;
  const std::function<Realization(int)> task = [&](int t) {
    const int s = t / nr;
    const int r = t % nr;
    PackSpec ps = p.pack;
    ps.box = {p.domain_sizes[s], p.domain_sizes[s], p.domain_sizes[s]};
    Realization out;
    out.seed = derive_seed(seed, 2 + static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(r));
    const pore::SpherePack pack = make_pack(ps, out.seed);
    const pore::VoxelGrid grid = pore::voxelize(pack, p.flow.cells_per_diameter);
    const pore::StokesField f = pore::solve_stokes(grid, stokes_options(p.flow));
    out.spheres = pack.centers.size();
    out.iterations = f.iterations;
    out.total = pore::region_flow(f, grid, d, pore::Region::total);
    out.inner = pore::region_flow(f, grid, d, pore::Region::inner);
    out.pdf_total = pore::velocity_pdf(f, grid, d, pore::Region::total, spec, p.normalize);
    out.pdf_inner = pore::velocity_pdf(f, grid, d, pore::Region::inner, spec, p.normalize);
    return out;
  };
  const std::vector<Realization> all = parallel_map<Realization>(ns * nr, threads, task);

  CsvTable perm{{"domain_d", "realization", "seed", "spheres", "porosity", "porosity_inner", "permeability",
                 "permeability_inner", "blake_kozeny_150", "carman_kozeny_180", "blake_kozeny_150_inner",
                 "carman_kozeny_180_inner", "intrinsic_velocity", "iterations"},
                {}};
  CsvTable by_size{{"domain_d", "permeability_mean", "permeability_inner_mean", "porosity_mean",
                    "porosity_inner_mean", "blake_kozeny_150", "carman_kozeny_180", "blake_kozeny_150_inner",
                    "carman_kozeny_180_inner"},
                   {}};
  json sizes = json::array();
  for (int s = 0; s < ns; ++s) {
    std::vector<pore::VelocityHistogram> ht;
    std::vector<pore::VelocityHistogram> hi;
    double k = 0, ki = 0, e = 0, ei = 0;
    json reals = json::array();
    for (int r = 0; r < nr; ++r) {
      const Realization& x = all[s * nr + r];
      perm.add_text({format_double(p.domain_sizes[s]), std::to_string(r), std::to_string(x.seed),
                     std::to_string(x.spheres), format_double(x.total.porosity), format_double(x.inner.porosity),
                     format_double(x.total.permeability), format_double(x.inner.permeability),
                     format_double(pore::blake_kozeny(d, x.total.porosity, 150.0)),
                     format_double(pore::blake_kozeny(d, x.total.porosity, 180.0)),
                     format_double(pore::blake_kozeny(d, x.inner.porosity, 150.0)),
                     format_double(pore::blake_kozeny(d, x.inner.porosity, 180.0)),
                     format_double(x.total.intrinsic_velocity), std::to_string(x.iterations)});
      ht.push_back(x.pdf_total);
      hi.push_back(x.pdf_inner);
      k += x.total.permeability / nr;
      ki += x.inner.permeability / nr;
      e += x.total.porosity / nr;
      ei += x.inner.porosity / nr;
      reals.push_back({{"seed", x.seed},
                       {"spheres", x.spheres},
                       {"iterations", x.iterations},
                       {"total", region_json(x.total, d)},
                       {"inner", region_json(x.inner, d)}});
    }
    const pore::VelocityHistogram at = pore::ensemble_average(ht);
    const pore::VelocityHistogram ai = pore::ensemble_average(hi);
    const std::string tag = size_tag(p.domain_sizes[s]);
    write_histogram(dir / ("pdf_total_" + tag + ".csv"), at);
    write_histogram(dir / ("pdf_inner_" + tag + ".csv"), ai);
    by_size.add({p.domain_sizes[s], k, ki, e, ei, pore::blake_kozeny(d, e, 150.0), pore::blake_kozeny(d, e, 180.0),
                 pore::blake_kozeny(d, ei, 150.0), pore::blake_kozeny(d, ei, 180.0)});
    sizes.push_back({{"domain_d", p.domain_sizes[s]},
                     {"permeability_mean", k},
                     {"permeability_inner_mean", ki},
                     {"porosity_mean", e},
                     {"porosity_inner_mean", ei},
                     {"pdf_total", histogram_stats(at)},
                     {"pdf_inner", histogram_stats(ai)},
                     {"realizations", reals}});
  }
  perm.write(dir / "permeability.csv");
  by_size.write(dir / "permeability_by_size.csv");
  json summary = {{"normalized", p.normalize},
                  {"bins", {{"lower", spec.lower}, {"width", spec.width}, {"count", spec.bins}}},
                  {"sizes", sizes}};
  write_json(dir / "result.json", summary);
  return summary;
}

json execute(const ExperimentConfig& c, const fs::path& dir, int threads) {
  switch (c.kind) {
    case ExperimentKind::darcy_forward:
      return run_darcy(std::get<DarcyForwardParams>(c.params), dir);
    case ExperimentKind::ident:
      return run_ident(std::get<IdentParams>(c.params), c.seed, dir);
    case ExperimentKind::pfem_sweep:
      return run_pfem_sweep(std::get<PfemSweepParams>(c.params), dir);
    case ExperimentKind::pfem_solve:
      return run_pfem_solve(std::get<PfemSolveParams>(c.params), dir);
    case ExperimentKind::pore_pack:
      return run_pore_pack(std::get<PorePackParams>(c.params), c.seed, dir);
    case ExperimentKind::pore_solve:
      return run_pore_solve(std::get<PoreSolveParams>(c.params), c.seed, dir);
    case ExperimentKind::pore_pdf:
      return run_pore_pdf(std::get<PorePdfParams>(c.params), c.seed, dir, threads);
  }
  throw ConfigError("config: unknown experiment kind");
}

// ---------------------------------------------------------------- staging

class Staging {
 public:
  explicit Staging(fs::path target) : target_(std::move(target)) {
    if (target_.filename().empty()) {
      target_ = target_.parent_path();
    }
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    dir_ = parent / ("." + target_.filename().string() + ".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_, ec);
    if (!fs::create_directories(dir_, ec) || ec) {
      throw InvalidArgument("cannot create output directory next to " + target_.string());
    }
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  const fs::path& dir() const { return dir_; }

  std::vector<Artifact> list() const {
    std::vector<Artifact> out;
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      if (e.is_regular_file()) {
        out.push_back({fs::relative(e.path(), dir_).generic_string(), sha256_file(e.path()), e.file_size()});
      }
    }
    std::sort(out.begin(), out.end(), [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    return out;
  }

  void commit() {
    std::error_code ec;
    if (!fs::exists(target_)) {
      fs::rename(dir_, target_, ec);
      if (!ec) {
        return;
      }
    }
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      if (!e.is_regular_file()) {
        continue;
      }
      const fs::path dest = target_ / fs::relative(e.path(), dir_);
      fs::create_directories(dest.parent_path());
      fs::rename(e.path(), dest);
    }
  }

 private:
  fs::path target_;
  fs::path dir_;
};

std::string finish(Staging& st, json manifest, std::vector<Artifact>& artifacts) {
  artifacts = st.list();
  json list = json::array();
  for (const auto& a : artifacts) {
    list.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  manifest["artifacts"] = list;
  const std::string text = manifest.dump(2) + "\n";
  write_text(st.dir() / "manifest.json", text);
  st.commit();
  return sha256_hex(text);
}

ExperimentConfig with(ExperimentKind kind, const std::function<void(ExperimentParams&)>& edit) {
  ExperimentConfig c = ExperimentConfig::defaults(kind);
  edit(c.params);
  c.validate();
  return c;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Hasher h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw InvalidArgument("cannot read " + path.string());
  }
  Hasher h;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(f.gcount()));
  }
  return h.hex();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, index};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

fs::path default_output_root() {
  const char* env = std::getenv("POROUS_OUTPUT_ROOT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("porous-output");
}

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path out = config.output_dir.empty()
                           ? default_output_root() /
                                 (std::string(kind_name(config.kind)) + "-" + std::to_string(config.seed))
                           : fs::path(config.output_dir);
  Staging st(out);
  RunResult r;
  r.output_dir = out;
  r.summary = execute(config, st.dir(), options.threads);
  json manifest = {{"tool", "porous"},
                   {"version", kVersion},
                   {"kind", kind_name(config.kind)},
                   {"seed", config.seed},
                   {"params", params_to_json(config)}};
  r.manifest_sha256 = finish(st, manifest, r.artifacts);
  return r;
}

std::vector<std::string> figure_ids() { return {"fig7", "fig8", "fig9", "fig10", "fig11", "fig3b", "fig4", "tab1-analog"}; }

std::vector<std::pair<std::string, ExperimentConfig>> figure_configs(std::string_view id) {
  using K = ExperimentKind;
  if (id == "fig7") {
    return {{"", with(K::pfem_sweep, [](auto& v) {
               auto& p = std::get<PfemSweepParams>(v);
               p.pe_min = 0.01;
               p.pe_max = 20.0;
               p.degrees = {1, 2, 3, 4, 5};
             })}};
  }
  if (id == "fig8") {
    return {{"", with(K::pfem_sweep, [](auto& v) {
               auto& p = std::get<PfemSweepParams>(v);
               p.pe_min = 0.01;
               p.pe_max = 20.0;
               p.degrees = {1, 2, 3, 4, 5, 6, 7, 8};
             })}};
  }
  if (id == "fig10") {
    return {{"", with(K::pfem_sweep, [](auto& v) {
               auto& p = std::get<PfemSweepParams>(v);
               p.pe_min = 0.01;
               p.pe_max = 7.6;
               p.degrees = {1, 3, 5, 7, 9, 11};
               p.max_threshold_degree = 11;
             })}};
  }
  if (id == "fig9") {
    // Pe = 2 * 0.1 / (2 * 0.005) = 20.
    return {{"", with(K::pfem_solve, [](auto& v) {
               auto& p = std::get<PfemSolveParams>(v);
               p.velocity = 2.0;
               p.diffusivity = 0.005;
               p.degrees = {1, 2, 3, 4};
             })}};
  }
  if (id == "fig11") {
    return {{"", with(K::pfem_solve, [](auto& v) {
               auto& p = std::get<PfemSolveParams>(v);
               p.velocity = 2.0;
               p.diffusivity = 0.02;
               p.degrees = {1, 3, 5, 7};
             })}};
  }
  if (id == "fig3b" || id == "fig4") {
    const bool norm = id == "fig4";
    return {{"", with(K::pore_pdf, [norm](auto& v) {
               auto& p = std::get<PorePdfParams>(v);
               p.domain_sizes = {4.0, 5.0, 6.0};
               p.realizations = 5;
               p.flow.cells_per_diameter = 14;
               p.normalize = norm;
             })}};
  }
  if (id == "tab1-analog") {
    return {{"identity", with(K::ident, [](auto& v) { std::get<IdentParams>(v).observation = "identity"; })},
            {"lattice", with(K::ident, [](auto& v) { std::get<IdentParams>(v).observation = "lattice"; })}};
  }
  std::string ids;
  for (const auto& f : figure_ids()) {
    ids += (ids.empty() ? "" : ", ") + f;
  }
  throw UnknownFigure("unknown figure id \"" + std::string(id) + "\"; available: " + ids);
}

RunResult reproduce(std::string_view id, const fs::path& output_dir, const RunOptions& options) {
  const auto configs = figure_configs(id);
  const fs::path out = output_dir.empty() ? default_output_root() / std::string(id) : output_dir;
  Staging st(out);
  RunResult r;
  r.output_dir = out;
  json runs = json::array();
  json summaries = json::object();
  for (const auto& [sub, c] : configs) {
    const fs::path dir = sub.empty() ? st.dir() : st.dir() / sub;
    fs::create_directories(dir);
    const json s = execute(c, dir, options.threads);
    summaries[sub.empty() ? std::string(kind_name(c.kind)) : sub] = s;
    runs.push_back({{"subdirectory", sub}, {"kind", kind_name(c.kind)}, {"seed", c.seed}, {"params", params_to_json(c)}});
  }
  if (id == "tab1-analog") {
    CsvTable t{{"observation", "measurements", "relative_error_a", "relative_error_b"}, {}};
    for (const auto& [sub, c] : configs) {
      const json& s = summaries[sub];
      t.add_text({sub, std::to_string(s["measurements"].get<long>()),
                  format_double(s["relative_errors"]["a"].get<double>()),
                  format_double(s["relative_errors"]["b"].get<double>())});
    }
    t.write(st.dir() / "table.csv");
    write_text(st.dir() / "NOTE.txt",
               "Synthetic analogue of the identification table. The reference parameters are the shipped\n"
               "log-uniform draw (seed " + std::to_string(ident::kDefaultReferenceSeed) +
                   "), not the unpublished original, so only the ordering\n"
                   "(full state beats point data) and the order of magnitude are comparable.\n");
  }
  r.summary = summaries;
  json manifest = {{"tool", "porous"}, {"version", kVersion}, {"figure", id}, {"runs", runs}};
  r.manifest_sha256 = finish(st, manifest, r.artifacts);
  return r;
}

}  // namespace porous::app
