#include "brdfnqm/brdf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "brdfnqm/errors.hpp"

namespace brdfnqm {

static_assert(std::endian::native == std::endian::little, "MERL I/O assumes a little-endian host");

namespace {

constexpr double kAngleSlack = 1e-12;

double wrap_two_pi(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w -= 2.0 * kPi;
  return w;
}

double fold_pi(double phi) {
  double w = std::fmod(phi, kPi);
  if (w < 0.0) w += kPi;
  if (w >= kPi) w -= kPi;
  return w;
}

double clamp_angle(double v, double hi, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " is not finite");
  if (v < -kAngleSlack || v > hi + kAngleSlack) {
    throw DomainError(std::string(what) + " out of range: " + std::to_string(v));
  }
  return std::clamp(v, 0.0, hi);
}

Vec3 rotate_z(const Vec3& v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c, v.z};
}

Vec3 rotate_y(const Vec3& v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {v.x * c + v.z * s, v.y, v.z * c - v.x * s};
}

}  // namespace

double Vec3::norm() const { return std::sqrt(dot(*this)); }

Vec3 Vec3::normalized() const {
  const double n = norm();
  return {x / n, y / n, z / n};
}

Vec3 SphericalDirection::to_vector() const {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

SphericalDirection SphericalDirection::from_vector(const Vec3& v) {
  const Vec3 u = v.normalized();
  return {std::acos(std::clamp(u.z, -1.0, 1.0)), wrap_two_pi(std::atan2(u.y, u.x))};
}

SphericalDirection make_direction(double theta, double phi) {
  if (!std::isfinite(phi)) throw DomainError("phi is not finite");
  return {clamp_angle(theta, kHalfPi, "theta"), wrap_two_pi(phi)};
}

HalfDiffCoords make_halfdiff(double theta_h, double theta_d, double phi_d) {
  if (!std::isfinite(phi_d)) throw DomainError("phi_d is not finite");
  return {clamp_angle(theta_h, kHalfPi, "theta_h"), clamp_angle(theta_d, kHalfPi, "theta_d"), fold_pi(phi_d)};
}

HalfDiffCoords RusinkiewiczCoords::folded() const { return make_halfdiff(theta_h, theta_d, phi_d); }

RusinkiewiczCoords io_to_rusinkiewicz(const SphericalDirection& wi, const SphericalDirection& wo) {
  if (!wi.above_horizon() || !wo.above_horizon()) {
    throw DomainError("io_to_halfdiff requires directions in the upper hemisphere");
  }
  const Vec3 in = wi.to_vector();
  const Vec3 out = wo.to_vector();
  const Vec3 sum = in + out;
  if (sum.norm() < 1e-9) throw DegenerateGeometryError("incoming and outgoing directions are opposite");
  const Vec3 half = sum.normalized();

  RusinkiewiczCoords rc;
  rc.theta_h = std::acos(std::clamp(half.z, -1.0, 1.0));
  rc.phi_h = std::atan2(half.y, half.x);

  const Vec3 diff = rotate_y(rotate_z(in, -rc.phi_h), -rc.theta_h);
  rc.theta_d = std::acos(std::clamp(diff.z, -1.0, 1.0));
  rc.phi_d = std::atan2(diff.y, diff.x);
  return rc;
}

HalfDiffCoords io_to_halfdiff(const SphericalDirection& wi, const SphericalDirection& wo) {
  return io_to_rusinkiewicz(wi, wo).folded();
}

std::pair<SphericalDirection, SphericalDirection> rusinkiewicz_to_io(const RusinkiewiczCoords& rc) {
  const double st = std::sin(rc.theta_d);
  const Vec3 diff{st * std::cos(rc.phi_d), st * std::sin(rc.phi_d), std::cos(rc.theta_d)};
  const Vec3 in = rotate_z(rotate_y(diff, rc.theta_h), rc.phi_h);
  const Vec3 half = SphericalDirection{rc.theta_h, rc.phi_h}.to_vector();
  const Vec3 out = half * (2.0 * half.dot(in)) - in;
  return {SphericalDirection::from_vector(in), SphericalDirection::from_vector(out)};
}

std::pair<SphericalDirection, SphericalDirection> halfdiff_to_io(const HalfDiffCoords& hd, double phi_h) {
  return rusinkiewicz_to_io({hd.theta_h, phi_h, hd.theta_d, hd.phi_d});
}

TabulatedBrdf::TabulatedBrdf(std::string name, TableDims dims) : name_(std::move(name)), dims_(dims) {
  if (dims.theta_h <= 0 || dims.theta_d <= 0 || dims.phi_d <= 0) {
    throw FormatError("table dimensions must be strictly positive");
  }
  raw_.assign(3 * dims_.bins(), 0.0);
}

bool TabulatedBrdf::is_invalid(std::size_t bin) const {
  const std::size_t n = bin_count();
  return raw_[bin] < 0.0 || raw_[n + bin] < 0.0 || raw_[2 * n + bin] < 0.0;
}

void TabulatedBrdf::set_value(int channel, std::size_t bin, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("reflectance must be finite and non-negative");
  raw_[channel * bin_count() + bin] = v / kChannelScale[channel];
}

void TabulatedBrdf::set_rgb(std::size_t bin, const Rgb& v) {
  for (int c = 0; c < 3; ++c) set_value(c, bin, v[c]);
}

void TabulatedBrdf::set_invalid(std::size_t bin) {
  const std::size_t n = bin_count();
  raw_[bin] = raw_[n + bin] = raw_[2 * n + bin] = -1.0;
}

TabulatedBrdf load_merl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open BRDF file " + path.string());
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  if (bytes.size() < 3 * sizeof(std::int32_t)) throw IoError("truncated BRDF header in " + path.string());
  std::int32_t dims[3];
  std::memcpy(dims, bytes.data(), sizeof(dims));
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw FormatError("non-positive dimensions in " + path.string());
  }
  const std::uint64_t n = static_cast<std::uint64_t>(dims[0]) * static_cast<std::uint64_t>(dims[1]) *
                          static_cast<std::uint64_t>(dims[2]);
  const std::uint64_t expected = n * 3 * sizeof(double);
  const std::uint64_t payload = bytes.size() - sizeof(dims);
  if (payload < expected) {
    throw IoError("truncated BRDF payload in " + path.string() + ": expected " + std::to_string(expected) +
                  " bytes, found " + std::to_string(payload));
  }
  if (payload > expected) {
    throw FormatError("dimension header does not match payload size in " + path.string());
  }
  const TableDims td{dims[0], dims[1], dims[2]};
  if (!(td == kMerlDims)) {
    throw UnsupportedResolutionError("unsupported table resolution " + std::to_string(dims[0]) + "x" +
                                     std::to_string(dims[1]) + "x" + std::to_string(dims[2]));
  }

  TabulatedBrdf brdf(path.stem().string(), td);
  std::memcpy(brdf.raw().data(), bytes.data() + sizeof(dims), expected);
  return brdf;
}

void save_merl(const TabulatedBrdf& brdf, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::int32_t dims[3] = {brdf.dims().theta_h, brdf.dims().theta_d, brdf.dims().phi_d};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const auto raw = brdf.raw();
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size_bytes()));
  if (!out) throw IoError("failed writing " + path.string());
}

BinIndex lookup_bin(const TableDims& dims, const HalfDiffCoords& hd) {
  BinIndex idx;
  if (hd.theta_h > 0.0) {
    idx.theta_h = static_cast<int>(std::sqrt(hd.theta_h / kHalfPi) * dims.theta_h);
  }
  idx.theta_d = static_cast<int>(hd.theta_d / kHalfPi * dims.theta_d);
  double phi = hd.phi_d;
  if (phi < 0.0) phi += kPi;
  idx.phi_d = static_cast<int>(phi / kPi * dims.phi_d);

  idx.theta_h = std::clamp(idx.theta_h, 0, dims.theta_h - 1);
  idx.theta_d = std::clamp(idx.theta_d, 0, dims.theta_d - 1);
  idx.phi_d = std::clamp(idx.phi_d, 0, dims.phi_d - 1);
  return idx;
}

HalfDiffCoords bin_center(const TableDims& dims, const BinIndex& idx) {
  const double u = (idx.theta_h + 0.5) / dims.theta_h;
  return {u * u * kHalfPi, (idx.theta_d + 0.5) / dims.theta_d * kHalfPi, (idx.phi_d + 0.5) / dims.phi_d * kPi};
}

BrdfLookup eval_brdf(const TabulatedBrdf& brdf, const HalfDiffCoords& hd) {
  const BinIndex idx = lookup_bin(brdf.dims(), hd);
  const std::size_t bin = brdf.bin_index(idx.theta_h, idx.theta_d, idx.phi_d);
  if (brdf.is_invalid(bin)) return {Rgb{}, true};
  return {brdf.rgb(bin), false};
}

}  // namespace brdfnqm
