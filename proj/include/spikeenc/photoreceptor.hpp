#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spikeenc/core.hpp"

namespace spikeenc {

/// Affine color transform: post_scale .* (coefficients * (x + pre_shift) + post_shift).
struct ColorMatrix {
  std::string_view name;
  Eigen::Matrix3d coefficients = Eigen::Matrix3d::Identity();
  Eigen::Vector3d pre_shift = Eigen::Vector3d::Zero();
  Eigen::Vector3d post_shift = Eigen::Vector3d::Zero();
  Eigen::Vector3d post_scale = Eigen::Vector3d::Ones();

  template <typename Derived>
  Eigen::Vector3d apply(const Eigen::MatrixBase<Derived>& x) const {
    return (coefficients * (x + pre_shift) + post_shift).cwiseProduct(post_scale);
  }
};

/// Linear sRGB (D65) to CIE XYZ.
const ColorMatrix& srgb_to_xyz_matrix();
/// Hunt-Pointer-Estevez XYZ to LMS with rows scaled so D65 white maps to (1, 1, 1).
const ColorMatrix& xyz_to_lms_matrix();
/// BT.601 RGB in [0,1] to YUV with U and V shifted by +0.5.
const ColorMatrix& rgb_to_yuv_matrix();

/// D65 reference white used by the Lab transform (row sums of the sRGB matrix).
Eigen::Vector3d d65_white();

/// sRGB transfer function inverse for an 8-bit code value.
double srgb_to_linear(std::uint8_t code);

/// Rec.601 luma rounded to 8 bits: round(0.299 R + 0.587 G + 0.114 B).
std::uint8_t luminance8(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Per-pixel transforms from an 8-bit RGB triple to normalized components.
// These return the shifted and scaled values before clamping.
Eigen::Vector3d lms_components(std::uint8_t r, std::uint8_t g, std::uint8_t b);
Eigen::Vector3d lab_components(std::uint8_t r, std::uint8_t g, std::uint8_t b);
Eigen::Vector3d yuv_components(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Clamped to [0,1] as fed to the encoders. `set` must be LMS, LAB or YUV.
Eigen::Vector3d color_components(ChannelSet set, std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Rounds a clamped component to the nearest 8-bit level.
std::uint32_t quantize_unit(double value);

NormalizedPlane to_luminance(const RawImage& image);
std::vector<NormalizedPlane> rgb_to_lms(const RawImage& image);
std::vector<NormalizedPlane> rgb_to_lab(const RawImage& image);
std::vector<NormalizedPlane> rgb_to_yuv(const RawImage& image);

/// 1-channel luminance image (identity for 1-channel input).
RawImage to_grayscale(const RawImage& image);

/// Planes for a channel set, in the set's channel order.
std::vector<NormalizedPlane> assemble_channels(const RawImage& image, ChannelSet set);

/// Each assembled plane encoded independently, stacked in channel-set order.
SpikeTensor encode_photoreceptor(const RawImage& image, ChannelSet set, const EncoderConfig& config);

}  // namespace spikeenc
