#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "porous/error.hpp"

namespace porous::app {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Rectangular Darcy domain with a structured mesh and a px x py partition.
struct MeshSpec {
  int nx = 32;
  int ny = 32;
  std::array<double, 4> domain{0.0, 0.0, 1.0, 1.0};  // x0, y0, x1, y1
  int px = 1;
  int py = 1;
  bool operator==(const MeshSpec&) const = default;
};

struct DarcyForwardParams {
  MeshSpec mesh;
  /// (a, b) per subdomain; empty means the identity tensor everywhere.
  std::vector<std::array<double, 2>> inverse_permeability;
  /// "manufactured" is the only built-in source; it integrates to zero on any rectangle
  /// whose sides are whole periods.
  std::string source = "manufactured";
  double stabilization_velocity = 1.0;
  double stabilization_pressure = 1.0;
  bool operator==(const DarcyForwardParams&) const = default;
};

struct IdentParams {
  MeshSpec mesh{64, 64, {0.0, 0.0, 1.0, 1.0}, 4, 4};
  std::string source = "manufactured";
  /// "identity", "lattice" or "points".
  std::string observation = "identity";
  std::array<int, 2> lattice{8, 4};
  std::vector<std::array<double, 2>> points;
  std::array<bool, 3> quantities{true, true, true};  // ux, uy, p
  double alpha = 0.0;
  double lower = 1.0;
  /// Unbounded when absent.
  std::optional<double> upper;
  double noise = 0.0;
  /// Drawn from the shipped seed when absent.
  std::optional<std::vector<double>> reference;
  double tolerance = 1e-8;
  int max_outer = 50;
  int max_inner = 50;
  bool operator==(const IdentParams&) const = default;
};

struct PfemSweepParams {
  double pe_min = 0.01;
  double pe_max = 20.0;
  int points = 400;
  std::vector<int> degrees{1, 2, 3, 4, 5};
  /// Odd degrees whose thresholds are tabulated.
  int max_threshold_degree = 11;
  bool operator==(const PfemSweepParams&) const = default;
};

struct PfemSolveParams {
  double velocity = 2.0;
  double diffusivity = 0.02;
  int elements = 10;
  std::vector<int> degrees{1, 3, 5, 7};
  /// "zero" (c(0) = 0, c(1) = 1) or "unit" (f = 1, c(0) = c(1) = 0).
  std::string source = "zero";
  int samples_per_element = 20;
  bool operator==(const PfemSolveParams&) const = default;
};

struct PackSpec {
  /// "hexagonal" or "random".
  std::string arrangement = "random";
  double diameter = 2e-3;
  /// Box edges in sphere diameters (random packs only).
  std::array<double, 3> box{6.0, 6.0, 6.0};
  double target_porosity = 0.40;
  bool operator==(const PackSpec&) const = default;
};

struct FlowSpec {
  int cells_per_diameter = 20;
  double viscosity = 1e-3;
  double gradient = 0.002;
  double tolerance = 1e-8;
  int max_iterations = 200000;
  bool operator==(const FlowSpec&) const = default;
};

struct PorePackParams {
  PackSpec pack;
  bool operator==(const PorePackParams&) const = default;
};

struct PoreSolveParams {
  PackSpec pack;
  /// Pack JSON file to load instead of generating one.
  std::string pack_file;
  FlowSpec flow;
  bool write_field = false;
  bool operator==(const PoreSolveParams&) const = default;
};

struct PorePdfParams {
  PackSpec pack;
  FlowSpec flow;
  /// Edge lengths (in D) of the cubic boxes to sample; overrides pack.box.
  std::vector<double> domain_sizes{6.0};
  int realizations = 5;
  /// Divide velocities by U_i before binning.
  bool normalize = false;
  /// Empty means the default bins of the chosen mode.
  std::optional<std::array<double, 3>> bins;  // lower, width, count
  bool operator==(const PorePdfParams&) const = default;
};

enum class ExperimentKind { darcy_forward, ident, pfem_sweep, pfem_solve, pore_pack, pore_solve, pore_pdf };

std::string_view kind_name(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_kind(std::string_view name);

using ExperimentParams = std::variant<DarcyForwardParams, IdentParams, PfemSweepParams, PfemSolveParams,
                                      PorePackParams, PoreSolveParams, PorePdfParams>;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::pfem_sweep;
  ExperimentParams params = PfemSweepParams{};
  std::string output_dir;
  std::uint64_t seed = 0;
  bool operator==(const ExperimentConfig&) const = default;

  /// Config of the given kind with all defaults.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Range and consistency checks; throws ConfigError.
  void validate() const;
};

/// Strict parse: every object must only hold known keys, types must match
/// exactly. Missing keys take their defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(std::string_view text);

/// Complete serialization with every default spelled out.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Parameter block alone, without output directory; used in manifests.
nlohmann::json params_to_json(const ExperimentConfig& config);

}  // namespace porous::app
