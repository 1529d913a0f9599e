#pragma once

#include <stdexcept>
#include <string>

namespace cisim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Configuration / input-schema problems. CLI exit code 1. */
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg, std::string key = "", int line = 0)
      : Error(format(msg, key, line)), key(std::move(key)), line(line) {}

  std::string key;
  int line; /* 1-based; 0 when not tied to a line */

 private:
  static std::string format(const std::string& msg, const std::string& key, int line) {
    std::string s = msg;
    if (!key.empty()) s += " (key '" + key + "')";
    if (line > 0) s += " at line " + std::to_string(line);
    return s;
  }
};

/* Numerical failures at run time. CLI exit code 2. */
struct NumericalError : Error {
  using Error::Error;
};

/* A matrix was singular to working precision; carries the condition estimate. */
struct SingularSystemError : NumericalError {
  SingularSystemError(const std::string& msg, double condition)
      : NumericalError(msg + " (condition estimate " + std::to_string(condition) + ")"),
        condition(condition) {}

  double condition;
};

}
