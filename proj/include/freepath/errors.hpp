#pragma once

#include <stdexcept>
#include <string>

namespace freepath {

// Work or memory beyond configured limits, and I/O failures.
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// A fit was requested on fewer usable points than the model needs.
class insufficient_data_error : public std::runtime_error {
 public:
  explicit insufficient_data_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace freepath
