#include "distbot/replay.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace distbot::engine {

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9).ptr;
  double r = 0.0;
  std::from_chars(buf, end, r);
  return r == 0.0 ? 0.0 : r;  // no negative zero in logs
}

nlohmann::json vec_record(const Vec2& v) {
  return nlohmann::json::array({round9(v.x()), round9(v.y())});
}

void write_line(std::ostream& out, const nlohmann::json& j) {
  out << j.dump() << '\n';
}

ReplayLog read_replay(std::istream& in) {
  ReplayLog log;
  std::string line;
  std::size_t lineno = 0;
  bool have_tick = false;
  std::uint64_t last_tick = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("replay line " + std::to_string(lineno) + ": " + e.what());
    }
    if (log.header.is_null()) {
      if (!j.is_object() || j.value("format", "") != kReplayFormat) {
        throw std::runtime_error("replay: missing header record");
      }
      log.header = std::move(j);
      continue;
    }
    const auto tick = j.at("tick").get<std::uint64_t>();
    if (have_tick && tick <= last_tick) {
      throw std::runtime_error("replay line " + std::to_string(lineno) +
                               ": tick sequence not increasing");
    }
    have_tick = true;
    last_tick = tick;
    log.records.push_back(std::move(j));
  }
  if (log.header.is_null()) throw std::runtime_error("replay: empty file");
  return log;
}

ReplayLog read_replay_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_replay(in);
}

}  // namespace distbot::engine
