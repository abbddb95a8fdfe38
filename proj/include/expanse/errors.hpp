#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace expanse {

// Structurally malformed input: wrong space for a map, invalid point
// coordinates, bad atom indices, lookup-table misses.
class structural_error : public std::runtime_error {
 public:
  explicit structural_error(const std::string& what) : std::runtime_error(what) {}
};

// Numeric precondition failure: grids below the resolution floor,
// insufficient scale range, witness level not above the map estimate.
class precondition_error : public std::runtime_error {
 public:
  explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised while parsing or validating an experiment config; carries the
// offending config path when known.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what, std::string path = "")
      : std::runtime_error(path.empty() ? what : what + " (at " + path + ")"),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace expanse
