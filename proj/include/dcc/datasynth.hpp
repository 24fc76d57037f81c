#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dcc/image.hpp"
#include "dcc/similarity.hpp"

namespace dcc {

// Procedural "pedestrian": three color bands (head/torso/legs) with
// per-part texture, deterministic in (seed, id).
struct IdentityPrototype {
  int id = 0;
  double hue[3] = {0, 0, 0};  // head, torso, legs
  double sat[3] = {0, 0, 0};
  double val[3] = {0, 0, 0};
  int texture[3] = {0, 0, 0};  // 0 plain, 1 stripes
  double width_frac = 0.5;     // torso width relative to image side
};

struct OcclusionRect {
  int x = 0, y = 0, w = 0, h = 0;  // w == 0 means none
};

struct ViewParams {
  int camera = 0;
  double brightness = 0;  // additive
  double hue_shift = 0;
  int dx = 0, dy = 0;  // figure translation in pixels
  OcclusionRect occlusion;
  double noise = 0;  // uniform +-noise per subpixel
};

IdentityPrototype generate_identity(std::uint64_t seed, int id);

// Deterministic render; values quantized to the 8-bit grid so PPM round
// trips are exact. Throws DataError if the occlusion hides >60% of the
// figure.
Image render_view(const IdentityPrototype& proto, const ViewParams& view,
                  int side = 56);

// Fraction of the canonical figure area covered by the rect (pre-translation).
double occlusion_coverage(const OcclusionRect& r, int side);

struct DatasetItem {
  int identity = 0;
  int camera = 0;
  int index = 0;
  Image image;
};

struct Dataset {
  std::vector<DatasetItem> items;
  int side = 56;
  int num_identities() const;
  std::vector<int> identities() const;  // sorted unique ids
};

// ids x views images; camera = view index, jitter per (seed, id, view).
Dataset synth_dataset(std::uint64_t seed, int ids, int views, int side = 56);

// C distinct identities, one reference each; the unknown shares an identity
// with exactly one reference but never its camera view.
Episode make_episode(const Dataset& dataset, int classes, std::mt19937_64& rng);

// Layout <root>/<identity>/<camera>_<index>.(ppm|png). Unparseable names are
// skipped and counted in *warnings; an empty identity folder is a DataError.
Dataset load_directory(const std::string& root, int side = 56,
                       int* warnings = nullptr);

// PPM export in the load_directory layout plus a manifest.txt.
void export_dataset(const Dataset& dataset, const std::string& root);

}  // namespace dcc
