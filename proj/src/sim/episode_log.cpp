#include "sim/episode_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace pedplan::sim {

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

}  // namespace

std::vector<std::string> csv_header(std::size_t ped_count) {
  std::vector<std::string> cols{"time", "ego_s", "ego_t", "ego_v", "a_cmd", "a_applied"};
  for (std::size_t i = 0; i < ped_count; ++i) {
    const std::string p = "ped" + std::to_string(i) + "_";
    for (const char* c : {"s_true", "t_true", "v_true", "s_tracked", "t_tracked", "v_tracked"}) cols.push_back(p + c);
  }
  for (const char* c : {"p_c", "risk", "brake", "collision"}) cols.emplace_back(c);
  return cols;
}

void write_csv(const EpisodeLog& log, std::ostream& out) {
  const auto header = csv_header(log.ped_count);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const TickRecord& r : log.ticks) {
    put(out, r.time);
    for (double v : {r.ego_s, r.ego_t, r.ego_v, r.a_cmd, r.a_applied}) {
      out << ',';
      put(out, v);
    }
    for (const PedSample& p : r.peds) {
      for (double v : {p.s_true, p.t_true, p.v_true, p.s_tracked, p.t_tracked, p.v_tracked}) {
        out << ',';
        put(out, v);
      }
    }
    out << ',';
    put(out, r.p_c);
    out << ',';
    put(out, r.risk);
    out << ',' << (r.brake ? 1 : 0) << ',' << (r.collision ? 1 : 0) << '\n';
  }
}

std::string to_csv(const EpisodeLog& log) {
  std::ostringstream out;
  write_csv(log, out);
  return out.str();
}

void write_csv_file(const EpisodeLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_csv(log, f);
  if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace pedplan::sim
