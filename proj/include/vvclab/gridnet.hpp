#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace vvclab::gridnet {

struct BusSpec {
  int id = 0;
  double p_load_mw = 0.0;
  double q_load_mvar = 0.0;
};

/// Impedances are in the units named by NetworkCase::units.
struct LineSpec {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
};

enum class DeviceKind { IbEr, Svc };

/// IB-ER uses s_rating_mva/p_max_mw; SVC uses q_min_mvar/q_max_mvar.
struct DeviceSpec {
  DeviceKind kind = DeviceKind::IbEr;
  int bus = 0;
  double s_rating_mva = 0.0;
  double p_max_mw = 0.0;
  double q_min_mvar = 0.0;
  double q_max_mvar = 0.0;
};

enum class ImpedanceUnits { Ohm, PerUnit };

struct NetworkCase {
  std::string name;
  double base_mva = 1.0;
  double base_kv = 1.0;
  ImpedanceUnits units = ImpedanceUnits::PerUnit;
  int slack_bus = 1;
  std::vector<BusSpec> buses;
  std::vector<LineSpec> lines;
  std::vector<DeviceSpec> devices;
  /// Optional bus groupings used by multi-agent runs.
  std::vector<std::vector<int>> subareas;
  /// Recorded checksum of the bus/line tables; empty when the file has none.
  std::string checksum;

  std::size_t num_buses() const { return buses.size(); }
  std::size_t num_devices() const { return devices.size(); }
  /// Position of bus `id` in `buses`. Throws ReferenceError when absent.
  std::size_t bus_index(int id) const;
  double max_bus_load_mva() const;
};

/// Parses and validates a case file. Throws ParseError, TopologyError,
/// ReferenceError or InvalidDeviceError.
NetworkCase load_case(const std::filesystem::path& path);
NetworkCase parse_case(const nlohmann::json& doc);
nlohmann::json case_to_json(const NetworkCase& c);

/// Structural checks: unique ids, positive impedances, radial tree rooted at
/// the slack bus, device references and ratings.
void validate_case(const NetworkCase& c);

/// FNV-1a over the canonical bus/line table text (see scripts/make_cases.py).
std::string compute_checksum(const NetworkCase& c);

struct Bound {
  double low = 0.0;
  double high = 0.0;
};

/// Reactive limits per device in MVar: IB-ER is symmetric
/// +-sqrt(S^2 - Pmax^2), SVC passes through.
std::vector<Bound> action_bounds(const NetworkCase& c);

struct PowerFlowOptions {
  double tol = 1e-8;
  int max_iter = 100;
  double slack_voltage = 1.0;
};

struct PowerFlowSolution {
  std::vector<double> v;      // p.u.
  std::vector<double> theta;  // rad
  std::vector<double> p_inj;  // MW, net injection (slack: supply into the feeder)
  std::vector<double> q_inj;  // MVar
  double total_loss_mw = 0.0;
  double slack_p_mw = 0.0;
  double slack_q_mvar = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nodal load and per-device injections for one power-flow call. Device
/// arrays are indexed like NetworkCase::devices; SVC active power is zero.
struct Injections {
  std::span<const double> p_load_mw;
  std::span<const double> q_load_mvar;
  std::span<const double> device_q_mvar;
  std::span<const double> device_p_mw;
};

/// A case compiled for repeated backward/forward sweeps. Immutable once
/// built, so one instance can serve concurrent callers.
class RadialFeeder {
 public:
  explicit RadialFeeder(const NetworkCase& c, PowerFlowOptions options = {});

  /// Current-summation backward/forward sweep. Throws DivergedError when the
  /// voltage update does not fall below tol within max_iter.
  PowerFlowSolution solve(const Injections& inj) const;

  const NetworkCase& network() const { return case_; }
  const PowerFlowOptions& options() const { return options_; }
  std::size_t slack_index() const { return slack_; }
  /// Bus indices in breadth-first order from the slack bus.
  const std::vector<std::size_t>& order() const { return order_; }
  /// Parent bus index for every non-slack bus.
  const std::vector<std::size_t>& parent() const { return parent_; }
  /// Series impedance (p.u.) of the line connecting a bus to its parent.
  const std::vector<std::complex<double>>& branch_impedance() const { return z_; }
  const std::vector<std::size_t>& device_bus_index() const { return device_bus_; }

 private:
  NetworkCase case_;
  PowerFlowOptions options_;
  std::size_t slack_ = 0;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> parent_;
  std::vector<std::complex<double>> z_;
  std::vector<std::size_t> device_bus_;
};

/// Convenience wrapper building a RadialFeeder for a single solve.
PowerFlowSolution solve_power_flow(const NetworkCase& c, const Injections& inj,
                                   PowerFlowOptions options = {});

}  // namespace vvclab::gridnet
