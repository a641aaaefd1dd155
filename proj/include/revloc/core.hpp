#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace revloc {

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};
/// Caller broke a shape or pairing contract.
struct ContractError : Error {
  using Error::Error;
};
/// Invalid or inconsistent configuration.
struct ConfigError : Error {
  using Error::Error;
};
/// Green's function evaluated at a coincident source/receiver pair.
struct SingularityError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Dense aliases

template <typename Scalar>
using Position = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Microphone pressures at one frequency bin, one entry per microphone.
template <typename Scalar>
using ComplexField = ComplexVector<Scalar>;

template <typename Scalar>
bool is_finite(const Position<Scalar>& p) {
  return p.allFinite();
}

// ---------------------------------------------------------------------------
// Wave context

template <typename Scalar>
Scalar wavenumber(Scalar frequency_hz, Scalar speed_mps) {
  if (!(frequency_hz > 0) || !(speed_mps > 0) || !std::isfinite(frequency_hz) ||
      !std::isfinite(speed_mps)) {
    throw DomainError("wavenumber: frequency and speed of sound must be positive");
  }
  return Scalar(2) * std::numbers::pi_v<Scalar> * frequency_hz / speed_mps;
}

/// Frequency, speed of sound and the derived wavenumber k = 2*pi*f/c.
template <typename Scalar>
class WaveContext {
 public:
  WaveContext(Scalar frequency_hz, Scalar speed_mps)
      : frequency_hz_(frequency_hz),
        speed_mps_(speed_mps),
        k_(revloc::wavenumber(frequency_hz, speed_mps)) {}

  Scalar frequency_hz() const { return frequency_hz_; }
  Scalar speed_of_sound_mps() const { return speed_mps_; }
  Scalar wavenumber() const { return k_; }

 private:
  Scalar frequency_hz_;
  Scalar speed_mps_;
  Scalar k_;
};

// ---------------------------------------------------------------------------
// Direction

/// Unit incident direction of a planewave.
template <typename Scalar>
class Direction {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  /// Checked constructor: the vector must already be unit norm.
  explicit Direction(const Position<Scalar>& v) : v_(v) {
    if (!v.allFinite() || std::abs(v.norm() - Scalar(1)) > Scalar(kUnitTolerance)) {
      throw DomainError("Direction: vector is not unit norm");
    }
  }

  static Direction normalized(const Position<Scalar>& v) {
    const Scalar n = v.norm();
    if (!(n > 0) || !std::isfinite(n)) throw DomainError("Direction: zero or non-finite vector");
    return Direction(Position<Scalar>(v / n));
  }

  const Position<Scalar>& vector() const { return v_; }
  Scalar dot(const Position<Scalar>& x) const { return v_.dot(x); }

  bool operator==(const Direction&) const = default;

 private:
  Position<Scalar> v_;
};

// ---------------------------------------------------------------------------
// Dictionary

template <typename Scalar>
using ColumnMeta = std::variant<Position<Scalar>, Direction<Scalar>>;

/// Complex M x C matrix whose columns carry either a grid position
/// (point-source atoms) or an incident direction (planewave atoms).
template <typename Scalar>
struct Dictionary {
  ComplexMatrix<Scalar> matrix;
  std::vector<ColumnMeta<Scalar>> column_meta;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }

  bool is_point_source_column(Eigen::Index c) const {
    return std::holds_alternative<Position<Scalar>>(column_meta.at(static_cast<std::size_t>(c)));
  }
  bool is_planewave_column(Eigen::Index c) const { return !is_point_source_column(c); }

  const Position<Scalar>& position(Eigen::Index c) const {
    const auto* p = std::get_if<Position<Scalar>>(&column_meta.at(static_cast<std::size_t>(c)));
    if (!p) throw ContractError("Dictionary: column is not a point-source atom");
    return *p;
  }

  void validate() const {
    if (static_cast<Eigen::Index>(column_meta.size()) != matrix.cols()) {
      throw ContractError("Dictionary: column metadata length differs from column count");
    }
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (matrix.col(c).squaredNorm() == Scalar(0)) {
        throw ContractError("Dictionary: column " + std::to_string(c) + " is all zero");
      }
    }
  }
};

/// Horizontal concatenation [left, right]; this is how the combined
/// dictionary A = [G0, W] is formed.
template <typename Scalar>
Dictionary<Scalar> concatenate(const Dictionary<Scalar>& left, const Dictionary<Scalar>& right) {
  if (left.rows() != right.rows()) {
    throw ContractError("concatenate: dictionaries have different row counts");
  }
  Dictionary<Scalar> out;
  out.matrix.resize(left.rows(), left.cols() + right.cols());
  out.matrix << left.matrix, right.matrix;
  out.column_meta.reserve(left.column_meta.size() + right.column_meta.size());
  out.column_meta.insert(out.column_meta.end(), left.column_meta.begin(), left.column_meta.end());
  out.column_meta.insert(out.column_meta.end(), right.column_meta.begin(), right.column_meta.end());
  return out;
}

// ---------------------------------------------------------------------------
// Weights

enum class WeightKind { PointSource, Planewave, Combined };

template <typename Scalar>
struct WeightVector {
  ComplexVector<Scalar> values;
  WeightKind kind = WeightKind::Combined;

  Eigen::Index size() const { return values.size(); }
};

template <typename Scalar>
void check_pairing(const Dictionary<Scalar>& dict, const WeightVector<Scalar>& w, const char* where) {
  if (w.size() != dict.cols()) {
    throw ContractError(std::string(where) + ": weight length " + std::to_string(w.size()) +
                        " does not match dictionary column count " +
                        std::to_string(dict.cols()));
  }
}

template <typename Scalar>
void check_rows(const Dictionary<Scalar>& dict, const ComplexField<Scalar>& s, const char* where) {
  if (s.size() != dict.rows()) {
    throw ContractError(std::string(where) + ": measurement length " + std::to_string(s.size()) +
                        " does not match dictionary row count " + std::to_string(dict.rows()));
  }
}

// ---------------------------------------------------------------------------
// Scene

/// Wall order for reflection coefficients.
enum Wall : int { XLow = 0, XHigh = 1, YLow = 2, YHigh = 3, ZLow = 4, ZHigh = 5 };

template <typename Scalar>
struct SourceSpec {
  Position<Scalar> position;
  Complex<Scalar> amplitude{1, 0};
};

/// Shoebox room with origin at a corner. Reflection coefficients are
/// pressure gains ordered {x=0, x=Lx, y=0, y=Ly, z=0, z=Lz}.
template <typename Scalar>
struct Scene {
  Position<Scalar> room_dims{Scalar(4.1), Scalar(6.2), Scalar(3.9)};
  std::array<Scalar, 6> reflection_coeffs{};
  std::vector<SourceSpec<Scalar>> sources;
  std::vector<Position<Scalar>> mics;
  int max_image_order = 0;

  bool strictly_inside(const Position<Scalar>& p) const {
    return is_finite(p) && (p.array() > Scalar(0)).all() && (p.array() < room_dims.array()).all();
  }

  void validate() const {
    if (!room_dims.allFinite() || !(room_dims.array() > Scalar(0)).all()) {
      throw ConfigError("Scene: room dimensions must be positive");
    }
    for (Scalar r : reflection_coeffs) {
      if (!(r >= Scalar(0) && r <= Scalar(1))) {
        throw ConfigError("Scene: reflection coefficients must lie in [0, 1]");
      }
    }
    if (max_image_order < 0) throw ConfigError("Scene: max_image_order must be >= 0");
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (!strictly_inside(sources[i].position)) {
        throw ConfigError("Scene: source " + std::to_string(i) + " is not strictly inside the room");
      }
    }
    for (std::size_t i = 0; i < mics.size(); ++i) {
      if (!strictly_inside(mics[i])) {
        throw ConfigError("Scene: microphone " + std::to_string(i) +
                          " is not strictly inside the room");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Localization result

template <typename Scalar>
struct SolverDiagnostics {
  int irls_iterations = 0;
  bool irls_converged = false;
  int omp_iterations = 0;
  /// OMP residual norm after each selection; entry 0 is the input norm.
  std::vector<Scalar> residual_norms;
  /// Share of the fitted field carried by planewave atoms, in [0, 1].
  Scalar beta_energy_fraction = 0;
  /// ||alpha||_1 over the l1 mass of its N largest entries (D-IRLS only).
  Scalar sparsity_ratio = 1;
  /// Set when the input measurement was identically zero.
  bool degenerate_input = false;
};

template <typename Scalar>
struct LocalizationResult {
  std::string method_tag;
  std::vector<Position<Scalar>> estimated_positions;
  /// Selected grid column indices, same order as estimated_positions.
  std::vector<Eigen::Index> support;
  /// Dense weight map over all grid columns; zero off-support for OMP-based methods.
  ComplexVector<Scalar> grid_weights;
  /// Filled in by the caller once ground truth is known; negative means unscored.
  Scalar localization_error_m = Scalar(-1);
  SolverDiagnostics<Scalar> diagnostics;
};

}  // namespace revloc
