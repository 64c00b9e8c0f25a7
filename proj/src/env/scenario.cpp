#include <algorithm>
#include <cmath>
#include <fstream>

#include "vvclab/env.hpp"
#include "vvclab/error.hpp"

namespace vvclab::env {

DayProfile default_day_profile() {
  // Two Gaussian bumps (late morning, evening) over a night trough, rescaled
  // so the curve spans exactly [0.6, 1.1].
  std::vector<double> raw(kStepsPerDay);
  for (int k = 0; k < kStepsPerDay; ++k) {
    const double h = k / 4.0;
    const double morning = 0.85 * std::exp(-(h - 11.0) * (h - 11.0) / (2.0 * 2.5 * 2.5));
    const double evening = std::exp(-(h - 19.5) * (h - 19.5) / (2.0 * 2.0 * 2.0));
    raw[static_cast<std::size_t>(k)] = morning + evening;
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo;
  const double span = *hi - *lo;
  DayProfile p;
  p.ratio.reserve(raw.size());
  for (double g : raw) p.ratio.push_back(0.6 + 0.5 * (g - min) / span);
  return p;
}

void validate_profile(const DayProfile& profile) {
  if (profile.ratio.size() != static_cast<std::size_t>(kStepsPerDay)) {
    throw ParseError("profile must have exactly 96 entries, got " +
                     std::to_string(profile.ratio.size()));
  }
  for (std::size_t k = 0; k < profile.ratio.size(); ++k) {
    if (!(profile.ratio[k] > 0.0) || !std::isfinite(profile.ratio[k])) {
      throw ParseError("profile[" + std::to_string(k) + "] must be positive and finite");
    }
  }
}

DayProfile profile_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("profile must be a JSON array of 96 numbers");
  DayProfile p;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    if (!doc[k].is_number()) {
      throw ParseError("profile[" + std::to_string(k) + "] must be a number");
    }
    p.ratio.push_back(doc[k].get<double>());
  }
  validate_profile(p);
  return p;
}

DayProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return profile_from_json(doc);
}

Scenario sample_scenario(const DayProfile& profile, int step, std::size_t num_buses,
                         std::size_t num_devices, const NoiseConfig& noise, std::mt19937_64& rng) {
  if (step < 0 || step >= kStepsPerDay) {
    throw ContractViolation("scenario step must lie in 0..95, got " + std::to_string(step));
  }
  const double base = profile.ratio.at(static_cast<std::size_t>(step));
  const double gen_base = noise.gen_follows_profile ? base : 1.0;
  Scenario s;
  s.step_index = step;
  s.load_scale.resize(num_buses);
  s.gen_scale.resize(num_devices);
  if (noise.amplitude == 0.0) {
    std::fill(s.load_scale.begin(), s.load_scale.end(), base);
    std::fill(s.gen_scale.begin(), s.gen_scale.end(), gen_base);
    return s;
  }
  std::uniform_real_distribution<double> u(-noise.amplitude, noise.amplitude);
  if (noise.per_bus) {
    for (auto& x : s.load_scale) x = base * (1.0 + u(rng));
    for (auto& x : s.gen_scale) x = gen_base * (1.0 + u(rng));
  } else {
    const double load_draw = base * (1.0 + u(rng));
    const double gen_draw = gen_base * (1.0 + u(rng));
    std::fill(s.load_scale.begin(), s.load_scale.end(), load_draw);
    std::fill(s.gen_scale.begin(), s.gen_scale.end(), gen_draw);
  }
  return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a running combination
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

ScenarioStream::ScenarioStream(DayProfile profile, NoiseConfig noise, std::uint64_t seed,
                               std::size_t num_buses, std::size_t num_devices)
    : profile_(std::move(profile)),
      noise_(noise),
      seed_(seed),
      num_buses_(num_buses),
      num_devices_(num_devices) {
  validate_profile(profile_);
}

Scenario ScenarioStream::at(int day, int step) const {
  std::mt19937_64 rng(mix_seed(seed_, static_cast<std::uint64_t>(day),
                               static_cast<std::uint64_t>(step)));
  return sample_scenario(profile_, step, num_buses_, num_devices_, noise_, rng);
}

}  // namespace vvclab::env
