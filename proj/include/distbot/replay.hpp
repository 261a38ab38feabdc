#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distbot/core.hpp"

namespace distbot::engine {

inline constexpr const char* kReplayFormat = "distbot-replay";
inline constexpr int kReplayVersion = 1;

/// Rounds to 9 significant digits, so a logged value reads back bit-exact.
double round9(double v);
nlohmann::json vec_record(const Vec2& v);  // [x, y], rounded

/// JSON-lines replay: one header object, then one object per tick.
struct ReplayLog {
  nlohmann::json header;
  std::vector<nlohmann::json> records;
};

void write_line(std::ostream& out, const nlohmann::json& j);

/// Throws std::runtime_error on a malformed file, a missing header, or a
/// non-monotone tick sequence.
ReplayLog read_replay(std::istream& in);
ReplayLog read_replay_file(const std::string& path);

}  // namespace distbot::engine
