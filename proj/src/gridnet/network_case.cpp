#include "vvclab/gridnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "vvclab/error.hpp"

namespace vvclab::gridnet {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* field, const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw ParseError(where + ": missing field '" + field + "'");
  }
  return obj.at(field);
}

double number(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_number()) throw ParseError(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

double optional_number(const json& obj, const char* field, double fallback,
                       const std::string& where) {
  if (!obj.contains(field)) return fallback;
  return number(obj, field, where);
}

int integer(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_number_integer()) {
    throw ParseError(where + ": field '" + field + "' must be an integer");
  }
  return v.get<int>();
}

std::string text(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_array()) throw ParseError(where + ": field '" + field + "' must be an array");
  return v;
}

}  // namespace

std::size_t NetworkCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw ReferenceError("unknown bus id " + std::to_string(id));
}

double NetworkCase::max_bus_load_mva() const {
  double m = 0.0;
  for (const auto& b : buses) m = std::max(m, std::hypot(b.p_load_mw, b.q_load_mvar));
  return m;
}

NetworkCase parse_case(const json& doc) {
  if (!doc.is_object()) throw ParseError("case: document must be a JSON object");
  NetworkCase c;
  c.name = doc.contains("name") ? text(doc, "name", "case") : std::string{};
  c.base_mva = number(doc, "base_mva", "case");
  c.base_kv = number(doc, "base_kv", "case");
  const std::string units = text(doc, "units", "case");
  if (units == "ohm") {
    c.units = ImpedanceUnits::Ohm;
  } else if (units == "pu") {
    c.units = ImpedanceUnits::PerUnit;
  } else {
    throw ParseError("case: field 'units' must be \"ohm\" or \"pu\", got \"" + units + "\"");
  }
  if (!(c.base_mva > 0.0)) throw ParseError("case: field 'base_mva' must be positive");
  if (!(c.base_kv > 0.0)) throw ParseError("case: field 'base_kv' must be positive");
  c.slack_bus = integer(doc, "slack_bus", "case");

  const json& buses = array(doc, "buses", "case");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string where = "case.buses[" + std::to_string(i) + "]";
    BusSpec b;
    b.id = integer(buses[i], "id", where);
    b.p_load_mw = number(buses[i], "p_load_mw", where);
    b.q_load_mvar = number(buses[i], "q_load_mvar", where);
    c.buses.push_back(b);
  }
  const json& lines = array(doc, "lines", "case");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "case.lines[" + std::to_string(i) + "]";
    LineSpec l;
    l.from_bus = integer(lines[i], "from", where);
    l.to_bus = integer(lines[i], "to", where);
    l.r = number(lines[i], "r", where);
    l.x = number(lines[i], "x", where);
    c.lines.push_back(l);
  }
  if (doc.contains("devices")) {
    const json& devices = array(doc, "devices", "case");
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const std::string where = "case.devices[" + std::to_string(i) + "]";
      DeviceSpec d;
      const std::string kind = text(devices[i], "kind", where);
      d.bus = integer(devices[i], "bus", where);
      if (kind == "IB-ER") {
        d.kind = DeviceKind::IbEr;
        d.s_rating_mva = number(devices[i], "s_rating_mva", where);
        d.p_max_mw = optional_number(devices[i], "p_max_mw", 0.0, where);
      } else if (kind == "SVC") {
        d.kind = DeviceKind::Svc;
        d.q_min_mvar = number(devices[i], "q_min_mvar", where);
        d.q_max_mvar = number(devices[i], "q_max_mvar", where);
      } else {
        throw ParseError(where + ": field 'kind' must be \"IB-ER\" or \"SVC\"");
      }
      c.devices.push_back(d);
    }
  }
  if (doc.contains("subareas")) {
    const json& areas = array(doc, "subareas", "case");
    for (std::size_t i = 0; i < areas.size(); ++i) {
      if (!areas[i].is_array()) {
        throw ParseError("case.subareas[" + std::to_string(i) + "] must be an array of bus ids");
      }
      std::vector<int> ids;
      for (const auto& id : areas[i]) {
        if (!id.is_number_integer()) {
          throw ParseError("case.subareas[" + std::to_string(i) + "] must hold integer bus ids");
        }
        ids.push_back(id.get<int>());
      }
      c.subareas.push_back(std::move(ids));
    }
  }
  if (doc.contains("checksum")) c.checksum = text(doc, "checksum", "case");

  validate_case(c);
  return c;
}

NetworkCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_case(doc);
}

json case_to_json(const NetworkCase& c) {
  json doc;
  doc["name"] = c.name;
  if (!c.checksum.empty()) doc["checksum"] = c.checksum;
  doc["base_mva"] = c.base_mva;
  doc["base_kv"] = c.base_kv;
  doc["units"] = c.units == ImpedanceUnits::Ohm ? "ohm" : "pu";
  doc["slack_bus"] = c.slack_bus;
  doc["buses"] = json::array();
  for (const auto& b : c.buses) {
    doc["buses"].push_back({{"id", b.id}, {"p_load_mw", b.p_load_mw}, {"q_load_mvar", b.q_load_mvar}});
  }
  doc["lines"] = json::array();
  for (const auto& l : c.lines) {
    doc["lines"].push_back({{"from", l.from_bus}, {"to", l.to_bus}, {"r", l.r}, {"x", l.x}});
  }
  doc["devices"] = json::array();
  for (const auto& d : c.devices) {
    if (d.kind == DeviceKind::IbEr) {
      doc["devices"].push_back({{"kind", "IB-ER"}, {"bus", d.bus},
                                {"s_rating_mva", d.s_rating_mva}, {"p_max_mw", d.p_max_mw}});
    } else {
      doc["devices"].push_back({{"kind", "SVC"}, {"bus", d.bus},
                                {"q_min_mvar", d.q_min_mvar}, {"q_max_mvar", d.q_max_mvar}});
    }
  }
  if (!c.subareas.empty()) doc["subareas"] = c.subareas;
  return doc;
}

void validate_case(const NetworkCase& c) {
  if (c.buses.empty()) throw TopologyError("case has no buses");
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& b = c.buses[i];
    if (!std::isfinite(b.p_load_mw) || !std::isfinite(b.q_load_mvar)) {
      throw ParseError("bus " + std::to_string(b.id) + ": non-finite load");
    }
    if (!index.emplace(b.id, i).second) {
      throw TopologyError("duplicate bus id " + std::to_string(b.id));
    }
  }
  if (!index.contains(c.slack_bus)) {
    throw ReferenceError("slack_bus " + std::to_string(c.slack_bus) + " is not a bus");
  }

  const std::size_t n = c.buses.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t k = 0; k < c.lines.size(); ++k) {
    const auto& l = c.lines[k];
    const std::string name = "line " + std::to_string(l.from_bus) + "-" + std::to_string(l.to_bus);
    const auto f = index.find(l.from_bus);
    const auto t = index.find(l.to_bus);
    if (f == index.end() || t == index.end()) {
      throw ReferenceError(name + " references an unknown bus");
    }
    if (f->second == t->second) throw TopologyError(name + " is a self loop");
    if (!(l.r > 0.0) || !(l.x > 0.0) || !std::isfinite(l.r) || !std::isfinite(l.x)) {
      throw ParseError(name + ": fields 'r' and 'x' must be positive");
    }
    adjacency[f->second].push_back(t->second);
    adjacency[t->second].push_back(f->second);
  }
  if (c.lines.size() != n - 1) {
    throw TopologyError("radial feeder needs " + std::to_string(n - 1) + " lines, got " +
                        std::to_string(c.lines.size()));
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(index.at(c.slack_bus));
  seen[frontier.front()] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t w : adjacency[u]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  if (reached != n) {
    throw TopologyError("feeder is not connected: " + std::to_string(n - reached) +
                        " buses unreachable from the slack bus");
  }

  for (std::size_t k = 0; k < c.devices.size(); ++k) {
    const auto& d = c.devices[k];
    const std::string name = "device " + std::to_string(k) + " at bus " + std::to_string(d.bus);
    if (!index.contains(d.bus)) throw ReferenceError(name + " references an unknown bus");
    if (d.kind == DeviceKind::IbEr) {
      if (!(d.p_max_mw >= 0.0) || !(d.s_rating_mva >= d.p_max_mw)) {
        throw InvalidDeviceError(name + ": IB-ER needs s_rating_mva >= p_max_mw >= 0");
      }
    } else if (!(d.q_min_mvar <= d.q_max_mvar)) {
      throw InvalidDeviceError(name + ": SVC needs q_min_mvar <= q_max_mvar");
    }
  }
  for (std::size_t a = 0; a < c.subareas.size(); ++a) {
    for (int id : c.subareas[a]) {
      if (!index.contains(id)) {
        throw ReferenceError("subarea " + std::to_string(a) + " references unknown bus " +
                             std::to_string(id));
      }
    }
  }
}

std::string compute_checksum(const NetworkCase& c) {
  std::string canonical;
  char row[160];
  for (const auto& b : c.buses) {
    std::snprintf(row, sizeof row, "B %d %.6f %.6f", b.id, b.p_load_mw, b.q_load_mvar);
    if (!canonical.empty()) canonical += '\n';
    canonical += row;
  }
  for (const auto& l : c.lines) {
    std::snprintf(row, sizeof row, "L %d %d %.6f %.6f", l.from_bus, l.to_bus, l.r, l.x);
    if (!canonical.empty()) canonical += '\n';
    canonical += row;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<Bound> action_bounds(const NetworkCase& c) {
  std::vector<Bound> out;
  out.reserve(c.devices.size());
  for (const auto& d : c.devices) {
    if (d.kind == DeviceKind::IbEr) {
      if (d.s_rating_mva < d.p_max_mw) {
        throw InvalidDeviceError("IB-ER at bus " + std::to_string(d.bus) +
                                 ": s_rating_mva < p_max_mw");
      }
      const double q = std::sqrt(d.s_rating_mva * d.s_rating_mva - d.p_max_mw * d.p_max_mw);
      out.push_back({-q, q});
    } else {
      out.push_back({d.q_min_mvar, d.q_max_mvar});
    }
  }
  return out;
}

}  // namespace vvclab::gridnet
