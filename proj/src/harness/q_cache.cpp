#include "harness/q_cache.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "common/errors.hpp"

namespace pedplan::harness {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'P', 'E', 'D', 'Q', 'T', 'B', 'L', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated Q table file");
  return v;
}

}  // namespace

std::string model_hash(const ped::ModelConfig& model, const SolverSettings& solver) {
  const std::string text = model_json(model, solver).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_q_table(const pomdp::QValueTable& q, const std::string& path) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(kMagic, sizeof kMagic);
    put<std::uint64_t>(out, q.state_count);
    put<std::uint64_t>(out, q.action_count);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(q.iterations));
    put<double>(out, q.residual);
    put<double>(out, q.tolerance);
    out.write(reinterpret_cast<const char*>(q.values.data()),
              static_cast<std::streamsize>(q.values.size() * sizeof(double)));
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

pomdp::QValueTable read_q_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) throw IoError("'" + path + "' is not a Q table file");
  pomdp::QValueTable q;
  q.state_count = take<std::uint64_t>(in);
  q.action_count = take<std::uint64_t>(in);
  q.iterations = static_cast<std::size_t>(take<std::uint64_t>(in));
  q.residual = take<double>(in);
  q.tolerance = take<double>(in);
  q.values.resize(q.state_count * q.action_count);
  in.read(reinterpret_cast<char*>(q.values.data()), static_cast<std::streamsize>(q.values.size() * sizeof(double)));
  if (!in) throw IoError("truncated Q table file '" + path + "'");
  return q;
}

std::shared_ptr<const pomdp::QValueTable> load_or_solve(const ped::ModelConfig& model, const SolverSettings& solver,
                                                        const std::string& cache_dir, bool solve_if_missing,
                                                        const ProgressFn& progress) {
  const std::string hash = model_hash(model, solver);
  const std::string path = (fs::path(cache_dir) / ("q_" + hash + ".bin")).string();
  if (fs::exists(path)) {
    if (progress) progress("loaded Q table " + path);
    return std::make_shared<const pomdp::QValueTable>(read_q_table(path));
  }
  if (!solve_if_missing) throw UsageError("no cached Q table at '" + path + "' and solving is disabled");
  const ped::PedestrianPomdp pomdp(model);
  if (progress) progress("solving " + std::to_string(pomdp.state_count()) + " states");
  pomdp::SolverOptions options;
  options.tolerance = solver.tolerance;
  options.max_iterations = static_cast<std::size_t>(solver.max_iterations);
  auto q = std::make_shared<const pomdp::QValueTable>(pomdp.solve(options));
  if (progress) {
    progress("solved in " + std::to_string(q->iterations) + " sweeps, residual " + std::to_string(q->residual));
  }
  write_q_table(*q, path);
  return q;
}

sim::Policy policy_for(const HarnessConfig& config, sim::Variant variant, const ProgressFn& progress) {
  const ped::ModelConfig model = config.model_for(variant);
  sim::Policy policy;
  policy.model = std::make_shared<const ped::PedestrianPomdp>(model);
  policy.q = load_or_solve(model, config.solver, config.cache_dir, config.solve_if_missing, progress);
  return policy;
}

}  // namespace pedplan::harness
