// porous: batch driver for the flow and transport experiments.
//
//   porous <group> <command> [--config file.json] [flag overrides] [--output dir] [--seed n]
//   porous repro <figure-id> [--output dir]
//
// Flags override the config file. Exit codes: 0 success, 2 configuration
// error, 3 numerical failure. Errors are reported as one JSON object on stderr.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "porous/app/config.hpp"
#include "porous/app/run.hpp"

using nlohmann::json;
using namespace porous;
using namespace porous::app;

namespace {

int report(const std::string& type, const std::string& message, int code, json extra = json::object()) {
  json j = {{"status", "error"}, {"type", type}, {"message", message}, {"exit_code", code}};
  j.update(extra);
  std::cerr << j.dump() << "\n";
  return code;
}

// Flag overrides are collected as JSON pointers into the config and applied
// before strict parsing, so they are validated exactly like file contents.
struct Overrides {
  std::vector<std::pair<std::string, std::function<std::optional<json>()>>> items;

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& pointer, const std::string& help,
           std::shared_ptr<std::optional<T>> store) {
    app->add_option(flag, *store, help);
    items.emplace_back(pointer, [store]() -> std::optional<json> {
      if (!*store) {
        return std::nullopt;
      }
      return json(**store);
    });
  }
  void apply(json& j) const {
    for (const auto& [ptr, get] : items) {
      if (auto v = get()) {
        j[json::json_pointer(ptr)] = *v;
      }
    }
  }
};

template <class T>
std::shared_ptr<std::optional<T>> slot() {
  return std::make_shared<std::optional<T>>();
}

struct Command {
  ExperimentKind kind;
  CLI::App* app = nullptr;
  std::string config_file;
  bool print_config = false;
  Overrides overrides;
};

void common_options(Command& c) {
  c.app->add_option("--config", c.config_file, "JSON experiment configuration");
  c.app->add_flag("--print-config", c.print_config, "Print the normalized configuration and exit");
  c.overrides.add(c.app, "--output", "/output_dir", "Output directory", slot<std::string>());
  c.overrides.add(c.app, "--seed", "/seed", "Random seed", slot<std::uint64_t>());
}

json load(const Command& c) {
  json j = {{"kind", kind_name(c.kind)}};
  if (!c.config_file.empty()) {
    std::ifstream f(c.config_file);
    if (!f) {
      throw ConfigError("cannot read config file " + c.config_file);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind")) {
      throw ConfigError("config: kind is required");
    }
    if (j["kind"] != kind_name(c.kind)) {
      throw ConfigError("config: kind " + j["kind"].dump() + " does not match this command (" +
                        std::string(kind_name(c.kind)) + ")");
    }
  }
  c.overrides.apply(j);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Porous-media flow and transport experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for independent realizations")->check(CLI::PositiveNumber);

  std::vector<std::unique_ptr<Command>> commands;
  const auto make = [&](CLI::App* group, const std::string& name, ExperimentKind kind, const std::string& help) {
    auto c = std::make_unique<Command>();
    c->kind = kind;
    c->app = group->add_subcommand(name, help);
    common_options(*c);
    commands.push_back(std::move(c));
    return commands.back().get();
  };

  CLI::App* darcy = app.add_subcommand("darcy", "Stabilized Darcy forward solver")->require_subcommand(1);
  CLI::App* ident = app.add_subcommand("ident", "Permeability identification")->require_subcommand(1);
  CLI::App* pfem = app.add_subcommand("pfem", "High-order 1D convection-diffusion")->require_subcommand(1);
  CLI::App* pore = app.add_subcommand("pore", "Pore-scale Stokes flow in sphere packs")->require_subcommand(1);

  {
    Command* c = make(darcy, "solve", ExperimentKind::darcy_forward, "Solve the manufactured Darcy problem");
    c->overrides.add(c->app, "--nx", "/params/mesh/nx", "Cells along x", slot<int>());
    c->overrides.add(c->app, "--ny", "/params/mesh/ny", "Cells along y", slot<int>());
    c->overrides.add(c->app, "--px", "/params/mesh/px", "Subdomains along x", slot<int>());
    c->overrides.add(c->app, "--py", "/params/mesh/py", "Subdomains along y", slot<int>());
  }
  {
    Command* c = make(ident, "run", ExperimentKind::ident, "Identify the inverse permeability from synthetic data");
    c->overrides.add(c->app, "--nx", "/params/mesh/nx", "Cells along x", slot<int>());
    c->overrides.add(c->app, "--ny", "/params/mesh/ny", "Cells along y", slot<int>());
    c->overrides.add(c->app, "--px", "/params/mesh/px", "Subdomains along x", slot<int>());
    c->overrides.add(c->app, "--py", "/params/mesh/py", "Subdomains along y", slot<int>());
    c->overrides.add(c->app, "--observation", "/params/observation", "identity, lattice or points",
                     slot<std::string>());
    c->overrides.add(c->app, "--alpha", "/params/alpha", "Regularization weight", slot<double>());
    c->overrides.add(c->app, "--noise", "/params/noise", "Standard deviation of additive noise", slot<double>());
  }
  {
    Command* c = make(pfem, "sweep", ExperimentKind::pfem_sweep, "Tabulate numerical diffusivity and thresholds");
    c->overrides.add(c->app, "--pe-min", "/params/pe_min", "Smallest Peclet number", slot<double>());
    c->overrides.add(c->app, "--pe-max", "/params/pe_max", "Largest Peclet number", slot<double>());
    c->overrides.add(c->app, "--points", "/params/points", "Peclet grid points", slot<int>());
    c->overrides.add(c->app, "--degrees", "/params/degrees", "Polynomial degrees", slot<std::vector<int>>());
  }
  {
    Command* c = make(pfem, "solve", ExperimentKind::pfem_solve, "Solve the 1D boundary value problem");
    c->overrides.add(c->app, "--velocity", "/params/velocity", "Convection velocity", slot<double>());
    c->overrides.add(c->app, "--diffusivity", "/params/diffusivity", "Diffusivity", slot<double>());
    c->overrides.add(c->app, "--elements", "/params/elements", "Number of elements", slot<int>());
    c->overrides.add(c->app, "--degrees", "/params/degrees", "Polynomial degrees", slot<std::vector<int>>());
    c->overrides.add(c->app, "--source", "/params/source", "zero or unit", slot<std::string>());
  }
  {
    Command* c = make(pore, "pack", ExperimentKind::pore_pack, "Generate a sphere pack");
    c->overrides.add(c->app, "--arrangement", "/params/pack/arrangement", "random or hexagonal",
                     slot<std::string>());
    c->overrides.add(c->app, "--diameter", "/params/pack/diameter", "Sphere diameter in m", slot<double>());
    c->overrides.add(c->app, "--box", "/params/pack/box", "Box edges in diameters (3 values)",
                     slot<std::vector<double>>());
  }
  {
    Command* c = make(pore, "solve", ExperimentKind::pore_solve, "Stokes flow through one pack");
    c->overrides.add(c->app, "--arrangement", "/params/pack/arrangement", "random or hexagonal",
                     slot<std::string>());
    c->overrides.add(c->app, "--box", "/params/pack/box", "Box edges in diameters (3 values)",
                     slot<std::vector<double>>());
    c->overrides.add(c->app, "--pack-file", "/params/pack_file", "Pack JSON to load", slot<std::string>());
    c->overrides.add(c->app, "--cells-per-diameter", "/params/flow/cells_per_diameter", "Grid resolution",
                     slot<int>());
    c->overrides.add(c->app, "--write-field", "/params/write_field", "Dump the velocity/pressure field",
                     slot<bool>());
  }
  {
    Command* c = make(pore, "pdf", ExperimentKind::pore_pdf, "Velocity PDFs over random-pack realizations");
    c->overrides.add(c->app, "--sizes", "/params/domain_sizes", "Cubic box edges in diameters",
                     slot<std::vector<double>>());
    c->overrides.add(c->app, "--realizations", "/params/realizations", "Packs per size", slot<int>());
    c->overrides.add(c->app, "--cells-per-diameter", "/params/flow/cells_per_diameter", "Grid resolution",
                     slot<int>());
    c->overrides.add(c->app, "--normalize", "/params/normalize", "Bin u / U_i instead of u", slot<bool>());
  }

  CLI::App* repro = app.add_subcommand("repro", "Run the canonical experiment behind a figure or table");
  std::string figure;
  std::string repro_output;
  bool list = false;
  repro->add_option("figure", figure, "Figure id");
  repro->add_option("--output", repro_output, "Output directory");
  repro->add_flag("--list", list, "List the available ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 2);
  }

  try {
    RunOptions opts;
    opts.threads = threads;
    RunResult result;
    if (repro->parsed()) {
      if (list || figure.empty()) {
        for (const auto& id : figure_ids()) {
          std::cout << id << "\n";
        }
        return list ? 0 : report("config", "a figure id is required", 2, {{"available", figure_ids()}});
      }
      result = reproduce(figure, repro_output, opts);
    } else {
      const Command* cmd = nullptr;
      for (const auto& c : commands) {
        if (c->app->parsed()) {
          cmd = c.get();
        }
      }
      const ExperimentConfig config = config_from_json(load(*cmd));
      if (cmd->print_config) {
        std::cout << config_to_json(config).dump(2) << "\n";
        return 0;
      }
      result = run(config, opts);
    }
    std::cout << json{{"status", "ok"},
                      {"output_dir", result.output_dir.string()},
                      {"artifacts", result.artifacts.size()},
                      {"manifest_sha256", result.manifest_sha256}}
                     .dump()
              << "\n";
    return 0;
  } catch (const UnknownFigure& e) {
    return report("config", e.what(), 2, {{"available", figure_ids()}});
  } catch (const InvalidArgument& e) {
    return report("config", e.what(), 2);
  } catch (const NumericalError& e) {
    return report("numerical", e.what(), 3, {{"residual_history", e.residual_history()}});
  } catch (const std::exception& e) {
    return report("internal", e.what(), 1);
  }
}
