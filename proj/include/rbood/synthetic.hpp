#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "rbood/table.hpp"

namespace rbood {

/// Produces `rows` labeled samples from a seed; the same seed gives the same table.
using DataSource = std::function<FeatureTable(std::size_t rows, std::uint64_t seed)>;

/// Two-component Gaussian mixture with unit variances. Component c0 sits at the origin
/// and c1 at `separation` on every feature; labels are the component names. `shift`
/// (in standard deviations) is added to the first `shifted_features` features of both
/// components to produce out-of-distribution data.
struct MixtureSpec {
  std::size_t features = 6;
  double separation = 1.5;
  double weight_c1 = 0.5;
  double shift = 0.0;
  std::size_t shifted_features = 3;
};

FeatureTable generate_mixture(const MixtureSpec& spec, std::size_t rows, std::uint64_t seed);

/// Uniform features on [0, 1]^d labeled by the quadrant of (x0, x1) relative to 0.5,
/// so axis-aligned rules fit it exactly. With probability `shift` a sample's x0 is
/// redrawn from [0.5, 1], moving mass between rule regions.
struct BoxSpec {
  std::size_t features = 4;
  double shift = 0.0;
};

FeatureTable generate_boxes(const BoxSpec& spec, std::size_t rows, std::uint64_t seed);

/// Parses "mixture[:key=value,...]" (keys: features, separation, weight, shift, shifted)
/// or "boxes[:features=..,shift=..]".
DataSource parse_generator(std::string_view text);

/// Draws rows from a fixed table without replacement, fresh order per seed.
DataSource table_source(FeatureTable table);

/// Deterministic 64-bit mix of a seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rbood
