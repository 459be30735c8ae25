#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace rsd {

// RSD_LOG: 0 silent (default), 1 info, 2 debug.
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("RSD_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[rsd] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[rsd] " << msg << "\n";
}

}  // namespace rsd
