#include "relscope/pairgeom.hpp"

#include <algorithm>
#include <cmath>

#include "relscope/errors.hpp"

namespace relscope {

ClampedBox clamp_to_image(const BBox& box, double image_w, double image_h) {
  const double x0 = std::max(box.x, 0.0);
  const double y0 = std::max(box.y, 0.0);
  const double x1 = std::min(box.x + box.w, image_w);
  const double y1 = std::min(box.y + box.h, image_h);
  if (!(x1 > x0) || !(y1 > y0)) throw InputError("box lies outside the image");
  ClampedBox out;
  out.box = {x0, y0, x1 - x0, y1 - y0};
  out.clamped = !(out.box == box);
  return out;
}

BBox body_box(const BBox& head) {
  const double w = kBodyWidthFactor * head.w;
  return {head.center_x() - 0.5 * w, head.y, w, kBodyHeightFactor * head.h};
}

ClampedBox body_from_head(const BBox& head, double image_w, double image_h) {
  if (!(head.w > 0.0) || !(head.h > 0.0)) throw InputError("head box has non-positive size");
  if (!(image_w > 0.0) || !(image_h > 0.0)) throw InputError("image has non-positive size");
  try {
    clamp_to_image(head, image_w, image_h);
  } catch (const InputError&) {
    throw InputError("head box lies outside the image");
  }
  return clamp_to_image(body_box(head), image_w, image_h);
}

RegionPair regions(const PersonPair& pair) {
  return {pair.a.head, pair.b.head, body_from_head(pair.a.head, pair.image_w, pair.image_h),
          body_from_head(pair.b.head, pair.image_w, pair.image_h)};
}

namespace {

NormalizedBox normalize(const BBox& b, double image_w, double image_h) {
  return {b.x / image_w, b.y / image_h, b.w / image_w, b.h / image_h};
}

RegionGeometry measure(const BBox& a, const BBox& b, double image_w, double image_h,
                       const GeomConfig& cfg) {
  RegionGeometry g;
  g.a = normalize(a, image_w, image_h);
  g.b = normalize(b, image_w, image_h);
  const double diag = 0.5 * (std::hypot(a.w, a.h) + std::hypot(b.w, b.h));
  g.distance = std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y()) / diag;
  g.distance_bin = g.distance > cfg.far_threshold ? DistanceBin::far : DistanceBin::close;
  const double area_a = a.area();
  const double area_b = b.area();
  g.size_ratio = std::max(area_a, area_b) / std::min(area_a, area_b);
  g.size_bin = g.size_ratio > cfg.large_ratio_threshold ? SizeBin::large : SizeBin::small;
  return g;
}

}  // namespace

GeomFeature geom_feature(const PersonPair& pair, const GeomConfig& cfg) {
  if (!(pair.a.head.area() > 0.0) || !(pair.b.head.area() > 0.0))
    throw InputError("pair " + pair.pair_id + " has a zero-area head");
  validate(pair);
  const auto r = regions(pair);
  GeomFeature f;
  f.head = measure(r.head_a, r.head_b, pair.image_w, pair.image_h, cfg);
  f.body = measure(r.body_a.box, r.body_b.box, pair.image_w, pair.image_h, cfg);
  return f;
}

bool a_leads(const PersonPair& pair) {
  const auto& ha = pair.a.head;
  const auto& hb = pair.b.head;
  if (ha.x != hb.x) return ha.x < hb.x;
  return ha.y <= hb.y;
}

std::vector<double> loc_scale_block(const RegionGeometry& g) {
  const bool far = g.distance_bin == DistanceBin::far;
  const bool large = g.size_bin == SizeBin::large;
  return {g.a.x, g.a.y, g.a.w, g.a.h, g.b.x, g.b.y, g.b.w, g.b.h,
          g.distance, far ? 1.0 : 0.0, far ? 0.0 : 1.0,
          g.size_ratio, large ? 1.0 : 0.0, large ? 0.0 : 1.0};
}

namespace {

RegionGeometry oriented(RegionGeometry g, const PersonPair& pair) {
  if (!a_leads(pair)) std::swap(g.a, g.b);
  return g;
}

}  // namespace

std::vector<double> head_loc_scale_block(const PersonPair& pair, const GeomConfig& cfg) {
  return loc_scale_block(oriented(geom_feature(pair, cfg).head, pair));
}

std::vector<double> body_loc_scale_block(const PersonPair& pair, const GeomConfig& cfg) {
  return loc_scale_block(oriented(geom_feature(pair, cfg).body, pair));
}

}  // namespace relscope
