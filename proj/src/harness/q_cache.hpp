#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "harness/config.hpp"
#include "pomdp/discrete_pomdp.hpp"
#include "sim/pomdp_planner.hpp"

namespace pedplan::harness {

/// 64-bit FNV-1a of the canonical model description, as 16 hex digits.
std::string model_hash(const ped::ModelConfig& model, const SolverSettings& solver);

void write_q_table(const pomdp::QValueTable& q, const std::string& path);
pomdp::QValueTable read_q_table(const std::string& path);

using ProgressFn = std::function<void(const std::string&)>;

/// Cached Q table for `model`; solves and stores it when missing and allowed.
std::shared_ptr<const pomdp::QValueTable> load_or_solve(const ped::ModelConfig& model, const SolverSettings& solver,
                                                        const std::string& cache_dir, bool solve_if_missing,
                                                        const ProgressFn& progress = {});

/// Model plus cached/solved Q for a POMDP variant.
sim::Policy policy_for(const HarnessConfig& config, sim::Variant variant, const ProgressFn& progress = {});

}  // namespace pedplan::harness
