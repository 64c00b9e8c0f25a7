#pragma once

// Shared fixtures for the test programs: small hand-built feeders, the case
// file locations, and a full-AC Newton-Raphson power flow on the bus
// admittance matrix that serves as an independent reference.

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vvclab/gridnet.hpp"

namespace vvtest {

using vvclab::gridnet::BusSpec;
using vvclab::gridnet::DeviceKind;
using vvclab::gridnet::DeviceSpec;
using vvclab::gridnet::ImpedanceUnits;
using vvclab::gridnet::LineSpec;
using vvclab::gridnet::NetworkCase;

inline std::filesystem::path data_dir() { return VVCLAB_DATA_DIR; }
inline std::filesystem::path case33_path() { return data_dir() / "case33.json"; }
inline std::filesystem::path case69_path() { return data_dir() / "case69.json"; }

/// Slack bus 1 feeding bus 2 through r + jx (p.u. on 1 MVA, 1 kV).
inline NetworkCase two_bus(double r, double x, double p_mw, double q_mvar) {
  NetworkCase c;
  c.name = "two-bus";
  c.base_mva = 1.0;
  c.base_kv = 1.0;
  c.units = ImpedanceUnits::PerUnit;
  c.slack_bus = 1;
  c.buses = {{1, 0.0, 0.0}, {2, p_mw, q_mvar}};
  c.lines = {{1, 2, r, x}};
  return c;
}

inline DeviceSpec ib_er(int bus, double s, double p) {
  DeviceSpec d;
  d.kind = DeviceKind::IbEr;
  d.bus = bus;
  d.s_rating_mva = s;
  d.p_max_mw = p;
  return d;
}

inline DeviceSpec svc(int bus, double lo, double hi) {
  DeviceSpec d;
  d.kind = DeviceKind::Svc;
  d.bus = bus;
  d.q_min_mvar = lo;
  d.q_max_mvar = hi;
  return d;
}

/// Three-bus chain 1-2-3 with SVCs at buses 2 and 3.
inline NetworkCase three_bus_two_svc() {
  NetworkCase c;
  c.name = "three-bus";
  c.base_mva = 1.0;
  c.base_kv = 1.0;
  c.units = ImpedanceUnits::PerUnit;
  c.slack_bus = 1;
  c.buses = {{1, 0.0, 0.0}, {2, 0.3, 0.25}, {3, 0.4, 0.3}};
  c.lines = {{1, 2, 0.02, 0.04}, {2, 3, 0.03, 0.05}};
  c.devices = {svc(2, -1.0, 1.0), svc(3, -1.0, 1.0)};
  return c;
}

struct AcSolution {
  std::vector<double> v;
  std::vector<double> theta;
  double loss_mw = 0.0;
  int iterations = 0;
};

/// Polar Newton-Raphson with analytic Jacobian. Net injections (MW, MVar),
/// slack at index `slack` with |V| = 1, angle 0.
inline AcSolution newton_raphson(const NetworkCase& c, const std::vector<double>& p_inj_mw,
                                 const std::vector<double>& q_inj_mvar, double tol = 1e-12) {
  using cd = std::complex<double>;
  const auto n = static_cast<Eigen::Index>(c.buses.size());
  const double zbase = c.units == ImpedanceUnits::Ohm ? c.base_kv * c.base_kv / c.base_mva : 1.0;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& l : c.lines) {
    const auto i = static_cast<Eigen::Index>(c.bus_index(l.from_bus));
    const auto j = static_cast<Eigen::Index>(c.bus_index(l.to_bus));
    const cd g = 1.0 / cd(l.r / zbase, l.x / zbase);
    y(i, i) += g;
    y(j, j) += g;
    y(i, j) -= g;
    y(j, i) -= g;
  }
  const auto slack = static_cast<Eigen::Index>(c.bus_index(c.slack_bus));
  Eigen::VectorXcd s_spec(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s_spec(i) = cd(p_inj_mw[static_cast<std::size_t>(i)], q_inj_mvar[static_cast<std::size_t>(i)]) / c.base_mva;
  }
  std::vector<Eigen::Index> pq;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != slack) pq.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(pq.size());
  Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
  AcSolution out;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
    const Eigen::VectorXcd ibus = y * v;
    Eigen::VectorXcd mis(n);
    for (Eigen::Index i = 0; i < n; ++i) mis(i) = v(i) * std::conj(ibus(i)) - s_spec(i);
    Eigen::VectorXd f(2 * m);
    for (Eigen::Index k = 0; k < m; ++k) {
      f(k) = mis(pq[static_cast<std::size_t>(k)]).real();
      f(m + k) = mis(pq[static_cast<std::size_t>(k)]).imag();
    }
    out.iterations = it;
    if (f.cwiseAbs().maxCoeff() < tol) break;
    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    Eigen::MatrixXcd dva(n, n);
    Eigen::MatrixXcd dvm(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const cd diag_i = i == j ? ibus(i) : cd(0.0);
        dva(i, j) = cd(0.0, 1.0) * v(i) * std::conj(diag_i - y(i, j) * v(j));
        const cd vn = v(j) / std::abs(v(j));
        dvm(i, j) = v(i) * std::conj(y(i, j) * vn) + (i == j ? std::conj(ibus(i)) * vn : cd(0.0));
      }
    }
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        const auto i = pq[static_cast<std::size_t>(a)];
        const auto j = pq[static_cast<std::size_t>(b)];
        jac(a, b) = dva(i, j).real();
        jac(a, m + b) = dvm(i, j).real();
        jac(m + a, b) = dva(i, j).imag();
        jac(m + a, m + b) = dvm(i, j).imag();
      }
    }
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    for (Eigen::Index k = 0; k < m; ++k) {
      va(pq[static_cast<std::size_t>(k)]) += dx(k);
      vm(pq[static_cast<std::size_t>(k)]) += dx(m + k);
    }
  }
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
  const Eigen::VectorXcd ibus = y * v;
  cd total(0.0);
  for (Eigen::Index i = 0; i < n; ++i) total += v(i) * std::conj(ibus(i));
  out.loss_mw = total.real() * c.base_mva;
  out.v.assign(vm.data(), vm.data() + n);
  out.theta.assign(va.data(), va.data() + n);
  return out;
}

/// Nominal-load injections of a case with all devices idle.
inline void nominal_injections(const NetworkCase& c, std::vector<double>& p, std::vector<double>& q) {
  p.clear();
  q.clear();
  for (const auto& b : c.buses) {
    p.push_back(-b.p_load_mw);
    q.push_back(-b.q_load_mvar);
  }
}

}  // namespace vvtest
