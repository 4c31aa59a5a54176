#pragma once

#include <random>
#include <string>

#include "bihc/cage.hpp"
#include "bihc/io.hpp"

namespace testutil {

using bihc::BezierCurve;
using bihc::Cage;
using bihc::Point2;

inline std::string data(const std::string& name) { return std::string(BIHC_DATA_DIR) + "/" + name; }

inline Cage load(const std::string& name) { return bihc::read_cage_file(data(name)); }

inline Cage unit_square() {
  return Cage::from_loop({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{}, {}, {}, {}});
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(gen); }
  Point2 point(double a = -1.0, double b = 1.0) { return {uniform(a, b), uniform(a, b)}; }
  BezierCurve curve(int order, double a = -1.0, double b = 1.0) {
    std::vector<Point2> p;
    for (int i = 0; i <= order; ++i) p.push_back(point(a, b));
    return BezierCurve(p);
  }
};

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
