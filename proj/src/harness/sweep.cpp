#include "harness/sweep.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "common/errors.hpp"
#include "harness/suite.hpp"

namespace pedplan::harness {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void SweepSpec::validate() const {
  if (velocity_weight.empty() || longitudinal_action_penalty.empty() || p_appear.empty()) {
    throw ConfigError("sweep grids must be non-empty");
  }
  if (variants.empty()) throw ConfigError("sweep needs at least one variant");
  for (auto v : variants) {
    if (!sim::uses_planner(v)) throw ConfigError("sweep variants must use the POMDP planner");
  }
  for (double p : p_appear) {
    if (p < 0.0 || p > 1.0) throw ConfigError("sweep p_appear values must lie in [0, 1]");
  }
  for (double w : velocity_weight) {
    if (w < 0.0) throw ConfigError("sweep velocity_weight values must be non-negative");
  }
  for (double p : longitudinal_action_penalty) {
    if (p > 0.0) throw ConfigError("sweep longitudinal_action_penalty values must be non-positive");
  }
}

SweepSpec parse_sweep_spec(const json& j) {
  SweepSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "velocity_weight") {
        spec.velocity_weight = value.get<std::vector<double>>();
      } else if (key == "longitudinal_action_penalty") {
        spec.longitudinal_action_penalty = value.get<std::vector<double>>();
      } else if (key == "p_appear") {
        spec.p_appear = value.get<std::vector<double>>();
      } else if (key == "variants") {
        spec.variants.clear();
        for (const auto& name : value.get<std::vector<std::string>>()) spec.variants.push_back(sim::parse_variant(name));
      } else {
        throw ConfigError("unknown sweep key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open sweep spec '" + path + "'");
  try {
    return parse_sweep_spec(json::parse(f));
  } catch (const json::parse_error& e) {
    throw ConfigError("sweep spec '" + path + "': " + e.what());
  }
}

SweepResult run_sweep(const SweepSpec& spec, const HarnessConfig& config, const ProgressFn& progress) {
  spec.validate();
  SweepResult result;
  for (auto variant : spec.variants) {
    for (double w : spec.velocity_weight) {
      for (double lp : spec.longitudinal_action_penalty) {
        for (double pa : spec.p_appear) {
          HarnessConfig point = config;
          auto& profile = point.profiles[std::string(sim::to_string(variant))];
          profile.reward.velocity_weight = w;
          profile.reward.longitudinal_action_penalty = lp;
          profile.p_appear = pa;

          SweepPoint sp;
          sp.variant = variant;
          sp.velocity_weight = w;
          sp.longitudinal_action_penalty = lp;
          sp.p_appear = pa;
          const ped::ModelConfig model = point.model_for(variant);
          sp.hash = model_hash(model, point.solver);
          if (progress) {
            progress(std::string(sim::to_string(variant)) + " velocity_weight=" + fmt(w) + " lon_penalty=" + fmt(lp) +
                     " p_appear=" + fmt(pa));
          }
          sim::Policy policy;
          policy.model = std::make_shared<const ped::PedestrianPomdp>(model);
          policy.q = load_or_solve(model, point.solver, point.cache_dir, point.solve_if_missing, progress);
          sp.converged = policy.q->converged();
          if (sp.converged) sp.metrics = run_suite(point, variant, &policy).result.aggregate;
          result.points.push_back(sp);
        }
      }
    }
  }
  return result;
}

std::optional<std::size_t> select_best(const std::vector<SweepPoint>& points, sim::Variant variant) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.variant != variant || !p.metrics || p.metrics->collisions != 0) continue;
    if (!best || p.metrics->mean_velocity_kmh > points[*best].metrics->mean_velocity_kmh) best = i;
  }
  return best;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "variant,velocity_weight,longitudinal_action_penalty,p_appear,q_hash,converged,collisions,emergency_brakes,"
         "mean_velocity_kmh,mean_brake_accel,mean_collision_kmh,selected\n";
  std::vector<std::optional<std::size_t>> chosen;
  for (auto v : {sim::Variant::kPomdp, sim::Variant::kPomdpAeb}) chosen.push_back(select_best(result.points, v));
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    const bool selected = std::find(chosen.begin(), chosen.end(), std::optional<std::size_t>(i)) != chosen.end();
    out << sim::to_string(p.variant) << ',' << fmt(p.velocity_weight) << ',' << fmt(p.longitudinal_action_penalty)
        << ',' << fmt(p.p_appear) << ',' << p.hash << ',' << (p.converged ? 1 : 0) << ',';
    if (p.metrics) {
      out << p.metrics->collisions << ',' << p.metrics->emergency_brakes << ',' << fmt(p.metrics->mean_velocity_kmh)
          << ',' << fmt(p.metrics->mean_brake_accel) << ',' << fmt(p.metrics->mean_collision_kmh);
    } else {
      out << ",,,,";
    }
    out << ',' << (selected ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace pedplan::harness
