#include <cmath>
#include <fstream>
#include <sstream>

#include "esakit/errors.hpp"
#include "esakit/io.hpp"

namespace esakit {
namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

double parse_real(const std::string& tok, const std::string& source, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a number, got '" + tok + "'");
  }
}

std::size_t parse_index(const std::string& tok, const std::string& source, std::size_t line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a vertex index, got '" + tok + "'");
  }
  if (used != tok.size() || v < 1) {
    throw ParseError(source, line, "vertex indices are 1-based positive integers, got '" + tok + "'");
  }
  return static_cast<std::size_t>(v - 1);
}

}  // namespace

Mesh parse_mesh(std::istream& in, const std::string& source_name) {
  Mesh mesh;
  bool any_color = false;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = tokens(line);
    if (t.empty() || t[0].front() == '#') continue;
    if (t[0] == "v") {
      if (t.size() != 4 && t.size() != 7) {
        throw ParseError(source_name, number, "vertex needs 3 coordinates and optionally 3 colors");
      }
      mesh.vertices.push_back({parse_real(t[1], source_name, number),
                               parse_real(t[2], source_name, number),
                               parse_real(t[3], source_name, number)});
      if (t.size() == 7) {
        Color c{parse_real(t[4], source_name, number), parse_real(t[5], source_name, number),
                parse_real(t[6], source_name, number)};
        if (c.r < 0 || c.r > 1 || c.g < 0 || c.g > 1 || c.b < 0 || c.b > 1) {
          throw ParseError(source_name, number, "vertex colors must lie in [0, 1]");
        }
        mesh.colors.push_back(c);
        any_color = true;
      } else {
        mesh.colors.push_back(Color{});
      }
    } else if (t[0] == "f") {
      if (t.size() != 4) throw ParseError(source_name, number, "faces must be triangles");
      Face f{parse_index(t[1], source_name, number), parse_index(t[2], source_name, number),
             parse_index(t[3], source_name, number)};
      for (auto i : f) {
        if (i >= mesh.vertices.size()) {
          throw ParseError(source_name, number,
                           "face references vertex " + std::to_string(i + 1) +
                               " before it is defined");
        }
      }
      mesh.faces.push_back(f);
    } else {
      throw ParseError(source_name, number, "unsupported statement '" + t[0] + "'");
    }
  }
  if (mesh.faces.empty()) throw ParseError(source_name, number, "mesh has no faces");
  if (!any_color) mesh.colors.clear();
  mesh.validate();
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path.string() + "'");
  return parse_mesh(in, path.string());
}

}  // namespace esakit
