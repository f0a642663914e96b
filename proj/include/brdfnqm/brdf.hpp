#pragma once

// Isotropic tabulated BRDFs in the MERL half/difference layout, plus the
// Rusinkiewicz coordinate transforms used to address them.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace brdfnqm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
  Vec3 normalized() const;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

// Polar angle theta from the surface normal, azimuth phi in [0, 2pi).
// Directions produced by halfdiff_to_io may have theta > pi/2 (below the
// horizon); use above_horizon() to filter them.
struct SphericalDirection {
  double theta = 0.0;
  double phi = 0.0;

  Vec3 to_vector() const;
  bool above_horizon() const { return theta <= kHalfPi; }

  static SphericalDirection from_vector(const Vec3& v);
};

// Validates theta in [0, pi/2] and wraps phi into [0, 2pi).
SphericalDirection make_direction(double theta, double phi);

// Isotropic Rusinkiewicz coordinates. phi_d is folded into [0, pi) by
// reciprocity.
struct HalfDiffCoords {
  double theta_h = 0.0;
  double theta_d = 0.0;
  double phi_d = 0.0;

  bool operator==(const HalfDiffCoords&) const = default;
};

// Validates ranges and folds phi_d into [0, pi).
HalfDiffCoords make_halfdiff(double theta_h, double theta_d, double phi_d);

// Full (unfolded) Rusinkiewicz frame: phi_h and phi_d as returned by atan2.
struct RusinkiewiczCoords {
  double theta_h = 0.0;
  double phi_h = 0.0;
  double theta_d = 0.0;
  double phi_d = 0.0;

  HalfDiffCoords folded() const;
};

RusinkiewiczCoords io_to_rusinkiewicz(const SphericalDirection& wi, const SphericalDirection& wo);
HalfDiffCoords io_to_halfdiff(const SphericalDirection& wi, const SphericalDirection& wo);

// Inverse transform. Works for any phi_d, folded or not; the outgoing
// direction is the mirror of the incoming one about the half vector.
std::pair<SphericalDirection, SphericalDirection> rusinkiewicz_to_io(const RusinkiewiczCoords& rc);
std::pair<SphericalDirection, SphericalDirection> halfdiff_to_io(const HalfDiffCoords& hd, double phi_h);

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
  double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
  double luminance() const { return 0.2126 * r + 0.7152 * g + 0.0722 * b; }
  bool operator==(const Rgb&) const = default;
};

struct TableDims {
  int theta_h = 90;
  int theta_d = 90;
  int phi_d = 180;

  std::size_t bins() const {
    return static_cast<std::size_t>(theta_h) * static_cast<std::size_t>(theta_d) *
           static_cast<std::size_t>(phi_d);
  }
  bool operator==(const TableDims&) const = default;
};

inline constexpr TableDims kMerlDims{90, 90, 180};

// Dense three-channel reflectance table. Values are held in file units
// (unscaled doubles) so that load/save is lossless; value() applies the
// per-channel MERL scale. A negative raw entry marks an invalid bin.
class TabulatedBrdf {
 public:
  static constexpr std::array<double, 3> kChannelScale{1.0 / 1500.0, 1.15 / 1500.0, 1.66 / 1500.0};

  explicit TabulatedBrdf(std::string name, TableDims dims = kMerlDims);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const TableDims& dims() const { return dims_; }
  std::size_t bin_count() const { return dims_.bins(); }

  std::size_t bin_index(int i_theta_h, int i_theta_d, int i_phi_d) const {
    return (static_cast<std::size_t>(i_theta_h) * dims_.theta_d + static_cast<std::size_t>(i_theta_d)) *
               dims_.phi_d +
           static_cast<std::size_t>(i_phi_d);
  }

  // Scaled reflectance (sr^-1); negative for invalid bins.
  double value(int channel, std::size_t bin) const {
    return raw_[channel * bin_count() + bin] * kChannelScale[channel];
  }
  Rgb rgb(std::size_t bin) const { return {value(0, bin), value(1, bin), value(2, bin)}; }
  bool is_invalid(std::size_t bin) const;

  // v must be >= 0; use set_invalid for the sentinel.
  void set_value(int channel, std::size_t bin, double v);
  void set_rgb(std::size_t bin, const Rgb& v);
  void set_invalid(std::size_t bin);

  std::span<const double> raw() const { return raw_; }
  std::span<double> raw() { return raw_; }

  bool operator==(const TabulatedBrdf&) const = default;

 private:
  std::string name_;
  TableDims dims_;
  std::vector<double> raw_;
};

TabulatedBrdf load_merl(const std::filesystem::path& path);
void save_merl(const TabulatedBrdf& brdf, const std::filesystem::path& path);

struct BinIndex {
  int theta_h = 0;
  int theta_d = 0;
  int phi_d = 0;
};

// MERL indexing: theta_h uses square-root warping, theta_d and phi_d are
// linear. Indices are clamped to the table.
BinIndex lookup_bin(const TableDims& dims, const HalfDiffCoords& hd);
HalfDiffCoords bin_center(const TableDims& dims, const BinIndex& idx);

struct BrdfLookup {
  Rgb rgb;
  bool invalid = false;
};

// Nearest-bin lookup. Invalid bins read as zero with the flag set.
BrdfLookup eval_brdf(const TabulatedBrdf& brdf, const HalfDiffCoords& hd);

}  // namespace brdfnqm
