#pragma once

#include <vector>

#include "relscope/pair.hpp"

namespace relscope {

/// Body box is 3x head width and 6x head height, horizontally centred on
/// the head and sharing its top edge. The anchor is a convention of this
/// library (the 3x/6x rule fixes only the size).
inline constexpr double kBodyWidthFactor = 3.0;
inline constexpr double kBodyHeightFactor = 6.0;

struct ClampedBox {
  BBox box;
  bool clamped = false;
};

/// Intersects a box with [0,image_w]x[0,image_h]. Throws InputError when
/// the intersection is empty.
ClampedBox clamp_to_image(const BBox& box, double image_w, double image_h);

/// Unclamped body box derived from a head box.
BBox body_box(const BBox& head);

/// Body box clamped to the image. Throws InputError for a head with
/// non-positive size or one that lies outside the image.
ClampedBox body_from_head(const BBox& head, double image_w, double image_h);

struct RegionPair {
  BBox head_a;
  BBox head_b;
  ClampedBox body_a;
  ClampedBox body_b;
};

RegionPair regions(const PersonPair& pair);

struct GeomConfig {
  /// Centre distance, in mean head diagonals, above which a pair is "far".
  double far_threshold = 2.0;
  /// Area ratio (larger over smaller) above which sizes count as "large".
  double large_ratio_threshold = 1.5;
};

enum class DistanceBin { close, far };
enum class SizeBin { small, large };

/// Box with x and w divided by image width, y and h by image height.
struct NormalizedBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Location and scale of one region type (head or body) for a pair.
struct RegionGeometry {
  NormalizedBox a;
  NormalizedBox b;
  /// Euclidean centre distance over the mean box diagonal; >= 0.
  double distance = 0.0;
  DistanceBin distance_bin = DistanceBin::close;
  /// max(area) / min(area); >= 1.
  double size_ratio = 1.0;
  SizeBin size_bin = SizeBin::small;
};

struct GeomFeature {
  RegionGeometry head;
  RegionGeometry body;
};

/// Throws InputError for a zero-area head or an invalid pair.
GeomFeature geom_feature(const PersonPair& pair, const GeomConfig& cfg = {});

/// Dimension of a loc & scale feature block.
inline constexpr std::size_t kLocScaleDim = 14;

/// `[a.x a.y a.w a.h b.x b.y b.w b.h distance far close ratio large small]`,
/// persons ordered left to right by head x (then head y).
std::vector<double> loc_scale_block(const RegionGeometry& g);
std::vector<double> head_loc_scale_block(const PersonPair& pair, const GeomConfig& cfg = {});
std::vector<double> body_loc_scale_block(const PersonPair& pair, const GeomConfig& cfg = {});

/// True when person a should be written first: head a is left of head b,
/// ties broken by the upper head.
bool a_leads(const PersonPair& pair);

}  // namespace relscope
