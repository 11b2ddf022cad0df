#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "macnn/image.hpp"

namespace macnn::synth {

/// Portable uniform/normal draws on top of mt19937_64, whose raw output
/// sequence is fixed by the standard (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

enum class Fill { kGradient, kGrating, kSquareWave, kTexture };

struct Cell {
  double cx, cy;
  Fill fill;
  double base, amplitude, angle, period, phase, gx, gy;
};

}  // namespace detail

/// Deterministic grayscale test picture: a Voronoi partition whose cells hold
/// gradients, oriented gratings, hard stripes or smoothed noise, crossed by a
/// few straight edges, plus mild sensor noise.
inline Plane generate(std::uint64_t seed, int width = 512, int height = 384) {
  using detail::Cell;
  using detail::Fill;
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 1);

  std::vector<Cell> cells(static_cast<std::size_t>(rng.integer(5, 14)));
  for (auto& c : cells) {
    c.cx = rng.uniform(0, width);
    c.cy = rng.uniform(0, height);
    const double pick = rng.uniform();
    c.fill = pick < 0.35 ? Fill::kGradient : pick < 0.7 ? Fill::kGrating : pick < 0.88 ? Fill::kSquareWave : Fill::kTexture;
    c.base = rng.uniform(40, 215);
    c.amplitude = rng.uniform(15, 70);
    c.angle = rng.uniform(0, std::numbers::pi);
    c.period = rng.uniform(6, 48);
    c.phase = rng.uniform(0, 2 * std::numbers::pi);
    c.gx = rng.uniform(-0.4, 0.4);
    c.gy = rng.uniform(-0.4, 0.4);
  }

  // Smoothed noise field shared by texture cells: a coarse lattice, bilinearly upsampled.
  const int lattice = 6;
  const int lw = width / lattice + 2, lh = height / lattice + 2;
  std::vector<double> coarse(static_cast<std::size_t>(lw) * lh);
  for (double& v : coarse) v = rng.normal();
  auto texture = [&](double x, double y) {
    const double fx = x / lattice, fy = y / lattice;
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    const double ax = fx - ix, ay = fy - iy;
    auto at = [&](int i, int j) { return coarse[static_cast<std::size_t>(j) * lw + i]; };
    return (1 - ay) * ((1 - ax) * at(ix, iy) + ax * at(ix + 1, iy)) + ay * ((1 - ax) * at(ix, iy + 1) + ax * at(ix + 1, iy + 1));
  };

  struct Edge {
    double nx, ny, offset, step;
  };
  std::vector<Edge> edges(static_cast<std::size_t>(rng.integer(0, 4)));
  for (auto& e : edges) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    e.nx = std::cos(a);
    e.ny = std::sin(a);
    e.offset = rng.uniform(0, 0.5 * (width + height)) * (rng.chance(0.5) ? 1 : -1);
    e.step = rng.uniform(-50, 50);
  }
  const double noise = rng.uniform(0.0, 3.0);

  Plane out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Cell* cell = &cells[0];
      double best = 1e300;
      for (const auto& c : cells) {
        const double d = (x - c.cx) * (x - c.cx) + (y - c.cy) * (y - c.cy);
        if (d < best) {
          best = d;
          cell = &c;
        }
      }
      const double u = (x - cell->cx) * std::cos(cell->angle) + (y - cell->cy) * std::sin(cell->angle);
      double v = cell->base;
      switch (cell->fill) {
        case Fill::kGradient: v += cell->gx * (x - cell->cx) + cell->gy * (y - cell->cy); break;
        case Fill::kGrating: v += cell->amplitude * std::sin(2 * std::numbers::pi * u / cell->period + cell->phase); break;
        case Fill::kSquareWave:
          v += cell->amplitude * (std::sin(2 * std::numbers::pi * u / cell->period + cell->phase) >= 0 ? 1 : -1);
          break;
        case Fill::kTexture: v += 0.6 * cell->amplitude * texture(x, y); break;
      }
      for (const auto& e : edges)
        if (x * e.nx + y * e.ny > e.offset) v += e.step;
      v += noise * rng.normal();
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

}  // namespace macnn::synth
