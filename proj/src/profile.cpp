#include "rtlab/profile.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <sstream>

#include "rtlab/error.hpp"

namespace rtlab {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double basis_1d(int j, double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (j == 0) return 1.0;
  if (j > 0) return std::sqrt(2.0) * std::cos(two_pi * j * x);
  return std::sqrt(2.0) * std::sin(two_pi * (-j) * x);
}

}  // namespace

ProfileSpec parse_profile(const std::string& text) {
  ProfileSpec spec;
  for (const auto& chunk : split(text, ';')) {
    std::istringstream in(chunk);
    std::string shape;
    FourierTerm term;
    if (!(in >> term.amplitude)) {
      if (chunk.find_first_not_of(" \t") == std::string::npos) continue;
      throw Error("profile term '" + chunk + "' must start with an amplitude");
    }
    if (!(in >> shape)) throw Error("profile term '" + chunk + "' is missing a shape");
    if (shape == "const") {
      term.shape = FourierTerm::Shape::Constant;
    } else if (shape == "cos") {
      term.shape = FourierTerm::Shape::Cos;
    } else if (shape == "sin") {
      term.shape = FourierTerm::Shape::Sin;
    } else {
      throw Error("unknown profile shape '" + shape + "' (expected const, cos or sin)");
    }
    int k = 0;
    std::size_t d = 0;
    while (in >> k) {
      if (d >= 2) throw Error("profile term '" + chunk + "' has more than two frequencies");
      term.frequency[d++] = k;
    }
    if (!in.eof()) throw Error("cannot parse profile term '" + chunk + "'");
    if (term.shape != FourierTerm::Shape::Constant && d == 0) {
      throw Error("profile term '" + chunk + "' needs a frequency");
    }
    spec.push_back(term);
  }
  return spec;
}

std::string to_string(const ProfileSpec& spec) {
  std::string out;
  for (const auto& t : spec) {
    if (!out.empty()) out += "; ";
    const char* shape = t.shape == FourierTerm::Shape::Constant ? "const"
                        : t.shape == FourierTerm::Shape::Cos    ? "cos"
                                                                : "sin";
    out += fmt::format("{:.17g} {}", t.amplitude, shape);
    if (t.shape != FourierTerm::Shape::Constant) {
      out += fmt::format(" {} {}", t.frequency[0], t.frequency[1]);
    }
  }
  return out;
}

DensityField evaluate_profile(const ProfileSpec& spec, const TorusGrid& grid) {
  DensityField out(grid.points());
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    double value = 0.0;
    for (const auto& t : spec) {
      double phase = t.frequency[0] * grid.coordinate(i, 0);
      if (grid.dim() == 2) phase += t.frequency[1] * grid.coordinate(i, 1);
      switch (t.shape) {
        case FourierTerm::Shape::Constant: value += t.amplitude; break;
        case FourierTerm::Shape::Cos: value += t.amplitude * std::cos(two_pi * phase); break;
        case FourierTerm::Shape::Sin: value += t.amplitude * std::sin(two_pi * phase); break;
      }
    }
    out[i] = value;
  }
  return out;
}

ModeIndex parse_mode(const std::string& text) {
  ModeIndex m;
  const auto parts = split(text, ',');
  if (parts.empty() || parts.size() > 2) throw Error("mode index '" + text + "' must be j or j1,j2");
  for (std::size_t d = 0; d < parts.size(); ++d) {
    try {
      std::size_t used = 0;
      m.j[d] = std::stoi(parts[d], &used);
      if (parts[d].find_first_not_of(" \t", used) != std::string::npos) throw Error("");
    } catch (const std::exception&) {
      throw Error("mode index '" + text + "' is not an integer list");
    }
  }
  return m;
}

std::string to_string(const ModeIndex& m) {
  return m.j[1] == 0 ? fmt::format("{}", m.j[0]) : fmt::format("{}:{}", m.j[0], m.j[1]);
}

DensityField mode_profile(const ModeIndex& mode, const TorusGrid& grid) {
  if (grid.dim() == 1 && mode.j[1] != 0) throw Error("2-D mode index on a 1-D grid");
  DensityField out(grid.points());
  for (std::size_t i = 0; i < grid.points(); ++i) {
    double v = basis_1d(mode.j[0], grid.coordinate(i, 0));
    if (grid.dim() == 2) v *= basis_1d(mode.j[1], grid.coordinate(i, 1));
    out[i] = v;
  }
  return out;
}

double mode_magnitude(const ModeIndex& mode) {
  return std::hypot(static_cast<double>(mode.j[0]), static_cast<double>(mode.j[1]));
}

}  // namespace rtlab
