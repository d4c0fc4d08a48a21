#include "spikeenc/photoreceptor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "spikeenc/codecs.hpp"

namespace spikeenc {

namespace {

void require_color(const RawImage& image) {
  if (image.channels() != 3) throw Error(ErrorCode::NotColor, "operation needs a 3-channel image");
}

ColorMatrix make_srgb_to_xyz() {
  ColorMatrix m{.name = "srgb-xyz"};
  m.coefficients << 0.4124564, 0.3575761, 0.1804375,  //
      0.2126729, 0.7151522, 0.0721750,                //
      0.0193339, 0.1191920, 0.9503041;
  return m;
}

ColorMatrix make_xyz_to_lms() {
  ColorMatrix m{.name = "xyz-lms-hpe-d65"};
  m.coefficients << 0.38971, 0.68898, -0.07868,  //
      -0.22981, 1.18340, 0.04641,                //
      0.0, 0.0, 1.0;
  const Eigen::Vector3d white_response = m.coefficients * d65_white();
  m.coefficients = white_response.cwiseInverse().asDiagonal() * m.coefficients;
  return m;
}

ColorMatrix make_rgb_to_yuv() {
  constexpr double kr = 0.299, kg = 0.587, kb = 0.114;
  constexpr double u_gain = 0.492, v_gain = 0.877;
  ColorMatrix m{.name = "bt601-yuv"};
  m.coefficients << kr, kg, kb,                                //
      -u_gain * kr, -u_gain * kg, u_gain * (1.0 - kb),         //
      v_gain * (1.0 - kr), -v_gain * kg, -v_gain * kb;
  m.post_shift = Eigen::Vector3d(0.0, 0.5, 0.5);
  return m;
}

const std::array<double, 256>& linear_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

Eigen::Vector3d linear_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto& lut = linear_table();
  return {lut[r], lut[g], lut[b]};
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

std::vector<NormalizedPlane> transform_planes(const RawImage& image, ChannelSet set) {
  require_color(image);
  const auto labels = channel_labels(set);
  std::array<std::vector<std::uint32_t>, 3> quanta;
  for (auto& q : quanta) q.resize(image.pixel_count());
  const auto px = image.pixels();
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const Eigen::Vector3d v = color_components(set, px[3 * i], px[3 * i + 1], px[3 * i + 2]);
    for (int c = 0; c < 3; ++c) quanta[c][i] = quantize_unit(v[c]);
  }
  std::vector<NormalizedPlane> planes;
  for (int c = 0; c < 3; ++c)
    planes.emplace_back(image.width(), image.height(), std::move(quanta[c]), 255, labels[c]);
  return planes;
}

}  // namespace

const ColorMatrix& srgb_to_xyz_matrix() {
  static const ColorMatrix m = make_srgb_to_xyz();
  return m;
}

const ColorMatrix& xyz_to_lms_matrix() {
  static const ColorMatrix m = make_xyz_to_lms();
  return m;
}

const ColorMatrix& rgb_to_yuv_matrix() {
  static const ColorMatrix m = make_rgb_to_yuv();
  return m;
}

Eigen::Vector3d d65_white() { return srgb_to_xyz_matrix().coefficients.rowwise().sum(); }

double srgb_to_linear(std::uint8_t code) { return linear_table()[code]; }

std::uint8_t luminance8(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

Eigen::Vector3d lms_components(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return xyz_to_lms_matrix().apply(srgb_to_xyz_matrix().apply(linear_rgb(r, g, b)));
}

Eigen::Vector3d lab_components(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const Eigen::Vector3d xyz = srgb_to_xyz_matrix().apply(linear_rgb(r, g, b));
  const Eigen::Vector3d white = d65_white();
  const double fx = lab_f(xyz.x() / white.x());
  const double fy = lab_f(xyz.y() / white.y());
  const double fz = lab_f(xyz.z() / white.z());
  const double lightness = 116.0 * fy - 16.0;
  const double a = 500.0 * (fx - fy);
  const double bb = 200.0 * (fy - fz);
  return {lightness / 100.0, (a + 128.0) / 255.0, (bb + 128.0) / 255.0};
}

Eigen::Vector3d yuv_components(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return rgb_to_yuv_matrix().apply(Eigen::Vector3d(r, g, b) / 255.0);
}

Eigen::Vector3d color_components(ChannelSet set, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Eigen::Vector3d v;
  switch (set) {
    case ChannelSet::Lms: v = lms_components(r, g, b); break;
    case ChannelSet::Lab: v = lab_components(r, g, b); break;
    case ChannelSet::Yuv: v = yuv_components(r, g, b); break;
    default: throw Error(ErrorCode::InvalidArgument, "not a color-space channel set");
  }
  return v.cwiseMax(0.0).cwiseMin(1.0);
}

std::uint32_t quantize_unit(double value) {
  return static_cast<std::uint32_t>(std::lround(std::clamp(value, 0.0, 1.0) * 255.0));
}

NormalizedPlane to_luminance(const RawImage& image) {
  require_color(image);
  const auto px = image.pixels();
  std::vector<std::uint32_t> quanta(image.pixel_count());
  for (std::size_t i = 0; i < quanta.size(); ++i)
    quanta[i] = luminance8(px[3 * i], px[3 * i + 1], px[3 * i + 2]);
  return NormalizedPlane(image.width(), image.height(), std::move(quanta), 255, ChannelLabel::L);
}

std::vector<NormalizedPlane> rgb_to_lms(const RawImage& image) { return transform_planes(image, ChannelSet::Lms); }
std::vector<NormalizedPlane> rgb_to_lab(const RawImage& image) { return transform_planes(image, ChannelSet::Lab); }
std::vector<NormalizedPlane> rgb_to_yuv(const RawImage& image) { return transform_planes(image, ChannelSet::Yuv); }

RawImage to_grayscale(const RawImage& image) {
  if (image.channels() == 1) return image;
  const auto px = image.pixels();
  std::vector<std::uint8_t> gray(image.pixel_count());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = luminance8(px[3 * i], px[3 * i + 1], px[3 * i + 2]);
  return RawImage(image.width(), image.height(), 1, std::move(gray));
}

std::vector<NormalizedPlane> assemble_channels(const RawImage& image, ChannelSet set) {
  switch (set) {
    case ChannelSet::Gray:
      if (image.channels() == 1) return normalize(image);
      return {to_luminance(image).relabeled(ChannelLabel::Gray)};
    case ChannelSet::Rgb:
      require_color(image);
      return normalize(image);
    case ChannelSet::Rgbl: {
      require_color(image);
      auto planes = normalize(image);
      planes.push_back(to_luminance(image));
      return planes;
    }
    case ChannelSet::Lms:
    case ChannelSet::Lab:
    case ChannelSet::Yuv: return transform_planes(image, set);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown channel set");
}

SpikeTensor encode_photoreceptor(const RawImage& image, ChannelSet set, const EncoderConfig& config) {
  const auto planes = assemble_channels(image, set);
  std::vector<SpikeTensor> parts;
  parts.reserve(planes.size());
  for (const auto& plane : planes) parts.push_back(encode(plane, config));
  return stack_channels(parts, Provenance{config, ChannelSetId(set)});
}

}  // namespace spikeenc
