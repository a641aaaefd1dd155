#pragma once

#include "revloc/dictionaries.hpp"

#include <limits>
#include <random>

namespace revloc {

// ---------------------------------------------------------------------------
// Image-source model (frequency domain)

template <typename Scalar>
struct ImageSource {
  Position<Scalar> position;
  /// Product of the wall pressure gains met along the mirror path.
  Scalar gain = 1;
  int order = 0;
};

namespace detail {

template <typename Scalar>
struct AxisImage {
  Scalar coordinate;
  Scalar gain;
  int order;
};

// Mirror images along one axis: coordinate (1 - 2u) s + 2 l L meets the low
// wall |l - u| times and the high wall |l| times.
template <typename Scalar>
std::vector<AxisImage<Scalar>> axis_images(Scalar s, Scalar length, Scalar low, Scalar high,
                                           int max_order) {
  std::vector<AxisImage<Scalar>> out;
  for (int l = -max_order; l <= max_order; ++l) {
    for (int u = 0; u <= 1; ++u) {
      const int n_low = std::abs(l - u);
      const int n_high = std::abs(l);
      const int order = n_low + n_high;
      if (order > max_order) continue;
      // std::pow(0, 0) == 1 keeps the direct path when a wall is dead.
      const Scalar gain = std::pow(low, Scalar(n_low)) * std::pow(high, Scalar(n_high));
      if (order > 0 && gain == Scalar(0)) continue;
      out.push_back({Scalar(1 - 2 * u) * s + Scalar(2 * l) * length, gain, order});
    }
  }
  return out;
}

}  // namespace detail

/// Every image of source `src_index` with total reflection count up to the
/// scene's max order. Images whose gain is exactly zero (paths touching a
/// fully absorbing wall) are dropped; the direct path is always first.
template <typename Scalar>
std::vector<ImageSource<Scalar>> enumerate_images(const Scene<Scalar>& scene,
                                                  std::size_t src_index) {
  if (scene.max_image_order < 0) throw ConfigError("enumerate_images: negative image order");
  const Position<Scalar>& s = scene.sources.at(src_index).position;
  const auto& R = scene.reflection_coeffs;
  const int Q = scene.max_image_order;

  const auto xs = detail::axis_images(s.x(), scene.room_dims.x(), R[XLow], R[XHigh], Q);
  const auto ys = detail::axis_images(s.y(), scene.room_dims.y(), R[YLow], R[YHigh], Q);
  const auto zs = detail::axis_images(s.z(), scene.room_dims.z(), R[ZLow], R[ZHigh], Q);

  std::vector<ImageSource<Scalar>> images;
  images.push_back({s, Scalar(1), 0});
  for (const auto& ix : xs) {
    for (const auto& iy : ys) {
      if (ix.order + iy.order > Q) continue;
      for (const auto& iz : zs) {
        const int order = ix.order + iy.order + iz.order;
        if (order > Q || order == 0) continue;
        images.push_back({Position<Scalar>(ix.coordinate, iy.coordinate, iz.coordinate),
                          ix.gain * iy.gain * iz.gain, order});
      }
    }
  }
  return images;
}

/// Room transfer function as the gain-weighted sum of free-field Green's
/// functions over a precomputed image set.
template <typename Scalar>
Complex<Scalar> transfer_function(const WaveContext<Scalar>& ctx,
                                  std::span<const ImageSource<Scalar>> images,
                                  const Position<Scalar>& mic) {
  Complex<Scalar> g{0, 0};
  for (const auto& img : images) g += img.gain * point_source_green(ctx, mic, img.position);
  return g;
}

template <typename Scalar>
Complex<Scalar> transfer_function(const WaveContext<Scalar>& ctx, const Scene<Scalar>& scene,
                                  std::size_t src_index, const Position<Scalar>& mic) {
  const auto images = enumerate_images(scene, src_index);
  return transfer_function<Scalar>(ctx, images, mic);
}

// ---------------------------------------------------------------------------
// Measurement synthesis

template <typename Scalar>
struct NoiseSpec {
  /// +infinity disables noise.
  Scalar snr_db = Scalar(30);
  std::uint64_t rng_seed = 0;

  static NoiseSpec noiseless() { return {std::numeric_limits<Scalar>::infinity(), 0}; }
};

/// Noise-free field s_m = sum_n G(k, x_m, y_n) alpha_n.
template <typename Scalar>
ComplexField<Scalar> synthesize_clean(const WaveContext<Scalar>& ctx, const Scene<Scalar>& scene) {
  scene.validate();
  ComplexField<Scalar> s = ComplexField<Scalar>::Zero(static_cast<Eigen::Index>(scene.mics.size()));
  for (std::size_t n = 0; n < scene.sources.size(); ++n) {
    const auto images = enumerate_images(scene, n);
    const Complex<Scalar> alpha = scene.sources[n].amplitude;
    for (std::size_t m = 0; m < scene.mics.size(); ++m) {
      s(static_cast<Eigen::Index>(m)) +=
          alpha * transfer_function<Scalar>(ctx, images, scene.mics[m]);
    }
  }
  return s;
}

/// Circular complex Gaussian noise scaled so the expected SNR against
/// `clean` equals snr_db. Deterministic for a given seed.
template <typename Scalar>
ComplexField<Scalar> make_noise(const ComplexField<Scalar>& clean, const NoiseSpec<Scalar>& noise) {
  if (!std::isfinite(noise.snr_db)) return ComplexField<Scalar>::Zero(clean.size());
  const Scalar per_entry =
      clean.squaredNorm() / (Scalar(clean.size()) * std::pow(Scalar(10), noise.snr_db / Scalar(10)));
  std::mt19937_64 rng(noise.rng_seed);
  std::normal_distribution<Scalar> normal(Scalar(0), std::sqrt(per_entry / Scalar(2)));
  ComplexField<Scalar> out(clean.size());
  for (Eigen::Index m = 0; m < clean.size(); ++m) {
    const Scalar re = normal(rng);
    const Scalar im = normal(rng);
    out(m) = {re, im};
  }
  return out;
}

template <typename Scalar>
ComplexField<Scalar> synthesize_measurements(const WaveContext<Scalar>& ctx,
                                             const Scene<Scalar>& scene,
                                             const NoiseSpec<Scalar>& noise) {
  ComplexField<Scalar> s = synthesize_clean(ctx, scene);
  s += make_noise(s, noise);
  return s;
}

// ---------------------------------------------------------------------------
// Reverberation time
//
// Eyring's formula in two dimensions: only the four side walls reflect, so
// the decay is governed by the floor-plan area A, the perimeter P and the
// in-plane mean free path pi A / P:
//   T60 = 6 ln(10) pi A / (c P (-ln(1 - a)))
// with a the perimeter-weighted mean energy absorption 1 - R^2.

template <typename Scalar>
Scalar eyring_t60(const std::array<Scalar, 6>& coeffs, const Position<Scalar>& room_dims,
                  Scalar speed_mps = Scalar(340)) {
  const Scalar lx = room_dims.x(), ly = room_dims.y();
  const Scalar area = lx * ly;
  const Scalar perimeter = Scalar(2) * (lx + ly);
  auto absorption = [&](int w) { return Scalar(1) - coeffs[w] * coeffs[w]; };
  const Scalar mean_absorption =
      (ly * (absorption(XLow) + absorption(XHigh)) + lx * (absorption(YLow) + absorption(YHigh))) /
      perimeter;
  if (mean_absorption <= 0) return std::numeric_limits<Scalar>::infinity();
  if (mean_absorption >= 1) return Scalar(0);
  return Scalar(6) * std::log(Scalar(10)) * std::numbers::pi_v<Scalar> * area /
         (speed_mps * perimeter * -std::log1p(-mean_absorption));
}

/// Uniform side-wall pressure gain giving the requested T60; floor and
/// ceiling are set to 0.
template <typename Scalar>
std::array<Scalar, 6> t60_to_reflection(Scalar t60_s, const Position<Scalar>& room_dims,
                                        Scalar speed_mps = Scalar(340)) {
  if (!(t60_s > 0) || !std::isfinite(t60_s)) {
    throw DomainError("t60_to_reflection: T60 must be positive and finite");
  }
  const Scalar lx = room_dims.x(), ly = room_dims.y();
  const Scalar decay = Scalar(6) * std::log(Scalar(10)) * std::numbers::pi_v<Scalar> * lx * ly /
                       (speed_mps * Scalar(2) * (lx + ly) * t60_s);
  // 1 - a = R^2 = exp(-decay)
  const Scalar r = std::exp(-decay / Scalar(2));
  if (!(r > 0)) throw DomainError("t60_to_reflection: T60 too small for this room");
  return {r, r, r, r, Scalar(0), Scalar(0)};
}

// ---------------------------------------------------------------------------
// Microphone array

/// `count` microphones evenly spaced by arc length around the rectangle
/// inset from the side walls, starting at the (inset, inset) corner and
/// running counter-clockwise.
template <typename Scalar>
std::vector<Position<Scalar>> build_perimeter_array(const Position<Scalar>& room_dims, int count,
                                                    Scalar height_z, Scalar inset = Scalar(0.01)) {
  if (count < 1) throw ConfigError("build_perimeter_array: count must be >= 1");
  const Scalar w = room_dims.x() - 2 * inset;
  const Scalar h = room_dims.y() - 2 * inset;
  if (!(inset > 0) || !(w > 0) || !(h > 0)) {
    throw ConfigError("build_perimeter_array: inset must be positive and smaller than the room");
  }
  if (!(height_z > 0 && height_z < room_dims.z())) {
    throw ConfigError("build_perimeter_array: array height is outside the room");
  }
  const Scalar perimeter = 2 * (w + h);
  std::vector<Position<Scalar>> mics;
  mics.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Scalar t = perimeter * Scalar(i) / Scalar(count);
    Position<Scalar> p;
    if (t < w) {
      p = {inset + t, inset, height_z};
    } else if ((t -= w) < h) {
      p = {inset + w, inset + t, height_z};
    } else if ((t -= h) < w) {
      p = {inset + w - t, inset + h, height_z};
    } else {
      t -= w;
      p = {inset, inset + h - t, height_z};
    }
    mics.push_back(p);
  }
  return mics;
}

/// Spacing-driven variant: count = round(room perimeter / spacing).
template <typename Scalar>
std::vector<Position<Scalar>> build_perimeter_array_spaced(const Position<Scalar>& room_dims,
                                                           Scalar spacing_m, Scalar height_z,
                                                           Scalar inset = Scalar(0.01)) {
  if (!(spacing_m > 0)) throw ConfigError("build_perimeter_array: spacing must be positive");
  if (spacing_m > std::min(room_dims.x(), room_dims.y())) {
    throw ConfigError("build_perimeter_array: spacing exceeds the shortest wall");
  }
  const Scalar perimeter = 2 * (room_dims.x() + room_dims.y());
  const int count = static_cast<int>(std::lround(perimeter / spacing_m));
  return build_perimeter_array(room_dims, count, height_z, inset);
}

}  // namespace revloc
