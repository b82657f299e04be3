#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "robreg/core.hpp"

namespace robreg {

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed content; the message starts with "<path>:<line>: ".
class ParseError : public IoError {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : IoError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// ASCII PLY. Only the x, y, z properties of the vertex element are kept; other
// properties and elements are skipped.
std::vector<Point3> read_ply(const std::string& path);
std::vector<Point3> parse_ply(const std::string& text, const std::string& name = "<string>");
// Written with 17 significant digits, so reading back is exact.
void write_ply(const std::string& path, const std::vector<Point3>& points);
std::string format_ply(const std::vector<Point3>& points);

// One 0/1 per line, 1 for inlier.
std::vector<int> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<int>& labels);

}  // namespace robreg
