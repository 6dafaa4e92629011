#pragma once

#include <stdexcept>
#include <string>

namespace npkry {

/// Hard error: dimension mismatches, malformed files, violated preconditions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace npkry
