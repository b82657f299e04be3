#include "robreg/ply_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace robreg {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

struct Element {
  std::string name;
  long long count = 0;
  // per property: is it a list
  std::vector<std::string> props;
  std::vector<bool> is_list;
};

}  // namespace

std::vector<Point3> parse_ply(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(name, std::max(ln, 1), "missing 'ply' magic");
  std::vector<Element> elements;
  bool format_seen = false;
  for (;;) {
    if (!next_line()) throw ParseError(name, ln, "unexpected end of header");
    const auto w = split(line);
    if (w.empty() || w[0] == "comment" || w[0] == "obj_info") continue;
    if (w[0] == "end_header") break;
    if (w[0] == "format") {
      if (w.size() < 2 || w[1] != "ascii") throw ParseError(name, ln, "only ascii PLY is supported");
      format_seen = true;
    } else if (w[0] == "element") {
      if (w.size() != 3) throw ParseError(name, ln, "malformed element line");
      Element e;
      e.name = w[1];
      double c = 0;
      if (!parse_number(w[2], c) || c < 0 || c != std::floor(c)) throw ParseError(name, ln, "bad element count");
      e.count = static_cast<long long>(c);
      elements.push_back(e);
    } else if (w[0] == "property") {
      if (elements.empty()) throw ParseError(name, ln, "property before any element");
      if (w.size() >= 5 && w[1] == "list") {
        elements.back().props.push_back(w[4]);
        elements.back().is_list.push_back(true);
      } else if (w.size() == 3) {
        elements.back().props.push_back(w[2]);
        elements.back().is_list.push_back(false);
      } else {
        throw ParseError(name, ln, "malformed property line");
      }
    } else {
      throw ParseError(name, ln, "unknown header keyword '" + w[0] + "'");
    }
  }
  if (!format_seen) throw ParseError(name, ln, "missing format line");

  std::vector<Point3> pts;
  bool have_vertex = false;
  for (const Element& e : elements) {
    int ix = -1, iy = -1, iz = -1;
    bool simple = true;
    for (std::size_t p = 0; p < e.props.size(); ++p) {
      if (e.is_list[p]) simple = false;
      if (e.props[p] == "x") ix = static_cast<int>(p);
      if (e.props[p] == "y") iy = static_cast<int>(p);
      if (e.props[p] == "z") iz = static_cast<int>(p);
    }
    const bool vertex = e.name == "vertex";
    if (vertex) {
      have_vertex = true;
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError(name, ln, "vertex element lacks x, y or z");
      if (!simple) throw ParseError(name, ln, "list properties in vertex element are not supported");
    }
    for (long long r = 0; r < e.count; ++r) {
      if (!next_line()) throw ParseError(name, ln + 1, "unexpected end of file in element '" + e.name + "'");
      const auto w = split(line);
      if (!vertex) continue;
      if (w.size() != e.props.size())
        throw ParseError(name, ln, "expected " + std::to_string(e.props.size()) + " values, found " + std::to_string(w.size()));
      double v[3];
      const int idx[3] = {ix, iy, iz};
      for (int k = 0; k < 3; ++k)
        if (!parse_number(w[idx[k]], v[k]) || !std::isfinite(v[k]))
          throw ParseError(name, ln, "invalid coordinate '" + w[idx[k]] + "'");
      pts.emplace_back(v[0], v[1], v[2]);
    }
  }
  if (!have_vertex) throw ParseError(name, ln, "no vertex element");
  while (next_line())
    if (!split(line).empty()) throw ParseError(name, ln, "trailing data after last element");
  return pts;
}

std::vector<Point3> read_ply(const std::string& path) { return parse_ply(slurp(path), path); }

std::string format_ply(const std::vector<Point3>& points) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  out.precision(17);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  return out.str();
}

void write_ply(const std::string& path, const std::vector<Point3>& points) { spill(path, format_ply(points)); }

std::vector<int> read_labels(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<int> out;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto w = split(line);
    if (w.empty()) continue;
    if (w.size() != 1 || (w[0] != "0" && w[0] != "1")) throw ParseError(path, ln, "label must be 0 or 1");
    out.push_back(w[0] == "1" ? 1 : 0);
  }
  return out;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::string s;
  for (int l : labels) s += l ? "1\n" : "0\n";
  spill(path, s);
}

}  // namespace robreg
