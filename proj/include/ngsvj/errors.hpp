#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ngsvj {

/// A distribution or model parameter lies outside its admissible range.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Array lengths disagree or a series is too short.
class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Invalid ModelConfig / RunSpec combination, detected before sampling starts.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Non-finite state encountered mid-chain.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

}  // namespace ngsvj
