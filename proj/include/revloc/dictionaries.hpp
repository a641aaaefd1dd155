#pragma once

#include "revloc/core.hpp"

#include <numbers>
#include <span>

namespace revloc {

/// Minimum source/receiver separation accepted by the Green's functions.
inline constexpr double kSingularDistance = 1e-9;

/// Free-field point-source Green's function e^{ikr} / (4 pi r).
template <typename Scalar>
Complex<Scalar> point_source_green(const WaveContext<Scalar>& ctx, const Position<Scalar>& mic,
                                   const Position<Scalar>& src) {
  const Scalar r = (mic - src).norm();
  if (!(r > Scalar(kSingularDistance))) {
    throw SingularityError("point_source_green: receiver coincides with source");
  }
  const Scalar k = ctx.wavenumber();
  return std::polar(Scalar(1) / (Scalar(4) * std::numbers::pi_v<Scalar> * r), k * r);
}

/// Planewave atom e^{-ik dir.x}; unit magnitude everywhere.
template <typename Scalar>
Complex<Scalar> planewave_green(const WaveContext<Scalar>& ctx, const Position<Scalar>& mic,
                                const Direction<Scalar>& dir) {
  return std::polar(Scalar(1), -ctx.wavenumber() * dir.dot(mic));
}

// ---------------------------------------------------------------------------
// Candidate grid

template <typename Scalar>
struct GridSpec {
  Scalar plane_height_z = Scalar(1.6);
  int nx = 20;
  int ny = 20;
  Scalar margin_m = Scalar(0.05);

  int size() const { return nx * ny; }
};

/// Regular nx x ny lattice at a fixed height, inset from the walls by the
/// margin. Row-major: index = iy * nx + ix, x varies fastest.
template <typename Scalar>
std::vector<Position<Scalar>> build_grid(const Position<Scalar>& room_dims,
                                         const GridSpec<Scalar>& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw ConfigError("build_grid: nx and ny must be >= 1");
  if (!(spec.margin_m >= 0)) throw ConfigError("build_grid: margin must be >= 0");
  const Scalar x0 = spec.margin_m, x1 = room_dims.x() - spec.margin_m;
  const Scalar y0 = spec.margin_m, y1 = room_dims.y() - spec.margin_m;
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("build_grid: margin leaves an empty grid");
  if (!(spec.plane_height_z > 0 && spec.plane_height_z < room_dims.z())) {
    throw ConfigError("build_grid: grid plane is outside the room");
  }

  auto axis = [](Scalar lo, Scalar hi, int n, int i) {
    return n == 1 ? (lo + hi) / 2 : lo + (hi - lo) * Scalar(i) / Scalar(n - 1);
  };

  std::vector<Position<Scalar>> grid;
  grid.reserve(static_cast<std::size_t>(spec.size()));
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      Position<Scalar> p(axis(x0, x1, spec.nx, ix), axis(y0, y1, spec.ny, iy), spec.plane_height_z);
      if (!(p.x() > 0 && p.x() < room_dims.x() && p.y() > 0 && p.y() < room_dims.y())) {
        throw ConfigError("build_grid: grid point lies on a wall; increase the margin");
      }
      grid.push_back(p);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Planewave directions

enum class DirectionMode { InPlaneCircle, FibonacciSphere };

template <typename Scalar>
struct DirectionSpec {
  int count = 720;
  DirectionMode mode = DirectionMode::InPlaneCircle;
};

template <typename Scalar>
std::vector<Direction<Scalar>> build_directions(const DirectionSpec<Scalar>& spec) {
  if (spec.count < 1) throw ConfigError("build_directions: count must be >= 1");
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const auto n = static_cast<std::size_t>(spec.count);
  std::vector<Direction<Scalar>> dirs;
  dirs.reserve(n);
  if (spec.mode == DirectionMode::InPlaneCircle) {
    for (std::size_t l = 0; l < n; ++l) {
      const Scalar theta = Scalar(2) * pi * Scalar(l) / Scalar(n);
      dirs.push_back(Direction<Scalar>::normalized({std::cos(theta), std::sin(theta), Scalar(0)}));
    }
  } else {
    // Fibonacci lattice: equal-area bands in z, golden-angle azimuth steps.
    const Scalar golden = pi * (Scalar(3) - std::sqrt(Scalar(5)));
    for (std::size_t l = 0; l < n; ++l) {
      const Scalar z = Scalar(1) - (Scalar(2) * Scalar(l) + Scalar(1)) / Scalar(n);
      const Scalar rho = std::sqrt(std::max(Scalar(0), Scalar(1) - z * z));
      const Scalar phi = golden * Scalar(l);
      dirs.push_back(Direction<Scalar>::normalized({rho * std::cos(phi), rho * std::sin(phi), z}));
    }
  }
  return dirs;
}

// ---------------------------------------------------------------------------
// Dictionaries

template <typename Scalar>
Dictionary<Scalar> build_point_source_dictionary(const WaveContext<Scalar>& ctx,
                                                 std::span<const Position<Scalar>> mics,
                                                 std::span<const Position<Scalar>> grid) {
  if (mics.empty() || grid.empty()) {
    throw ContractError("build_point_source_dictionary: empty microphone or grid list");
  }
  Dictionary<Scalar> dict;
  dict.matrix.resize(static_cast<Eigen::Index>(mics.size()), static_cast<Eigen::Index>(grid.size()));
  dict.column_meta.reserve(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (std::size_t m = 0; m < mics.size(); ++m) {
      dict.matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) =
          point_source_green(ctx, mics[m], grid[c]);
    }
    dict.column_meta.emplace_back(grid[c]);
  }
  return dict;
}

template <typename Scalar>
Dictionary<Scalar> build_planewave_dictionary(const WaveContext<Scalar>& ctx,
                                              std::span<const Position<Scalar>> mics,
                                              std::span<const Direction<Scalar>> directions) {
  if (mics.empty() || directions.empty()) {
    throw ContractError("build_planewave_dictionary: empty microphone or direction list");
  }
  Dictionary<Scalar> dict;
  dict.matrix.resize(static_cast<Eigen::Index>(mics.size()),
                     static_cast<Eigen::Index>(directions.size()));
  dict.column_meta.reserve(directions.size());
  for (std::size_t c = 0; c < directions.size(); ++c) {
    for (std::size_t m = 0; m < mics.size(); ++m) {
      dict.matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) =
          planewave_green(ctx, mics[m], directions[c]);
    }
    dict.column_meta.emplace_back(directions[c]);
  }
  return dict;
}

/// Scales every column to unit l2 norm. Returns the original norms.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> normalize_columns(Dictionary<Scalar>& dict) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> norms = dict.matrix.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < dict.cols(); ++c) {
    if (norms(c) > 0) dict.matrix.col(c) /= norms(c);
  }
  return norms;
}

}  // namespace revloc
