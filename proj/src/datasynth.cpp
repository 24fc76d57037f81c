#include "dcc/datasynth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "dcc/errors.hpp"

namespace fs = std::filesystem;

namespace dcc {

namespace {

constexpr double kGolden = 0.6180339887498949;

double fract(double x) { return x - std::floor(x); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9e3779b97f4a7c15ULL + b + 0x7f4a7c15ULL;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  h = fract(h) * 6.0;
  int i = static_cast<int>(h);
  double f = h - i;
  double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i % 6) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}

// Canonical figure region in a side-sized frame, row fractions per part.
struct PartBand {
  double y0, y1, half_width;  // fractions of side
};
const PartBand kBands[3] = {
    {0.07, 0.25, 0.12},  // head
    {0.25, 0.60, 0.22},  // torso
    {0.60, 0.93, 0.18},  // legs
};

}  // namespace

IdentityPrototype generate_identity(std::uint64_t seed, int id) {
  IdentityPrototype p;
  p.id = id;
  // Low-discrepancy hues keep pairwise separation >= ~0.38/n for n ids, so
  // distinctness holds for a few hundred identities per seed.
  double seed_phase = fract(mix(seed, 0xc01adcc) * 0x1p-64);
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(id) + 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int part = 0; part < 3; ++part) {
    p.hue[part] = fract(seed_phase + part / 3.0 + (id + 1) * kGolden);
    p.sat[part] = 0.55 + 0.35 * unit(rng);
    p.val[part] = 0.45 + 0.35 * unit(rng);
    p.texture[part] = rng() % 2 ? 1 : 0;
  }
  p.width_frac = 0.40 + 0.15 * unit(rng);
  return p;
}

double occlusion_coverage(const OcclusionRect& r, int side) {
  if (r.w <= 0 || r.h <= 0) return 0.0;
  long figure = 0, covered = 0;
  for (int part = 0; part < 3; ++part) {
    const auto& b = kBands[part];
    int y0 = static_cast<int>(b.y0 * side), y1 = static_cast<int>(b.y1 * side);
    int hw = static_cast<int>(b.half_width * side);
    int x0 = side / 2 - hw, x1 = side / 2 + hw;
    figure += static_cast<long>(y1 - y0) * (x1 - x0);
    int oy0 = std::max(y0, r.y), oy1 = std::min(y1, r.y + r.h);
    int ox0 = std::max(x0, r.x), ox1 = std::min(x1, r.x + r.w);
    if (oy1 > oy0 && ox1 > ox0)
      covered += static_cast<long>(oy1 - oy0) * (ox1 - ox0);
  }
  return figure ? static_cast<double>(covered) / figure : 0.0;
}

Image render_view(const IdentityPrototype& proto, const ViewParams& view,
                  int side) {
  if (occlusion_coverage(view.occlusion, side) > 0.60)
    throw DataError("occlusion covers >60% of the figure; resample the view");
  Image img(side, side, 0.12);  // dark background
  std::mt19937_64 noise_rng(
      mix(mix(static_cast<std::uint64_t>(proto.id) + 17,
              static_cast<std::uint64_t>(view.camera) + 3),
          static_cast<std::uint64_t>(std::llround(view.noise * 1e6)) + 7));
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  for (int part = 0; part < 3; ++part) {
    const auto& b = kBands[part];
    double rgb[3];
    hsv_to_rgb(proto.hue[part] + view.hue_shift, proto.sat[part],
               proto.val[part], rgb);
    int y0 = static_cast<int>(b.y0 * side), y1 = static_cast<int>(b.y1 * side);
    double widen = part == 1 ? proto.width_frac / 0.44 : 1.0;
    int hw = static_cast<int>(b.half_width * side * widen);
    for (int y = y0; y < y1; ++y) {
      double stripe =
          proto.texture[part] && ((y / 3) % 2) ? 0.75 : 1.0;
      for (int x = side / 2 - hw; x < side / 2 + hw; ++x) {
        int yy = y + view.dy, xx = x + view.dx;
        if (yy < 0 || yy >= side || xx < 0 || xx >= side) continue;
        // legs: split into two columns with a gap
        if (part == 2) {
          int off = x - side / 2;
          if (std::abs(off) < hw / 4) continue;
        }
        for (int c = 0; c < 3; ++c) img.at(yy, xx, c) = rgb[c] * stripe;
      }
    }
  }

  const auto& r = view.occlusion;
  if (r.w > 0 && r.h > 0)
    for (int y = std::max(0, r.y); y < std::min(side, r.y + r.h); ++y)
      for (int x = std::max(0, r.x); x < std::min(side, r.x + r.w); ++x)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = 0.5;

  for (double& v : img.px) {
    v += view.brightness;
    if (view.noise > 0) v += view.noise * jitter(noise_rng);
    v = std::clamp(v, 0.0, 1.0);
  }
  img.quantize();
  return img;
}

int Dataset::num_identities() const { return static_cast<int>(identities().size()); }

std::vector<int> Dataset::identities() const {
  std::set<int> ids;
  for (const auto& it : items) ids.insert(it.identity);
  return {ids.begin(), ids.end()};
}

Dataset synth_dataset(std::uint64_t seed, int ids, int views, int side) {
  if (ids <= 0 || views <= 0)
    throw DataError("synth_dataset: ids and views must be positive");
  Dataset ds;
  ds.side = side;
  for (int id = 0; id < ids; ++id) {
    IdentityPrototype proto = generate_identity(seed, id);
    for (int v = 0; v < views; ++v) {
      std::mt19937_64 rng(mix(mix(seed, id + 101), v + 11));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      ViewParams vp;
      vp.camera = v;
      vp.brightness = 0.10 * (unit(rng) - 0.5);
      vp.hue_shift = 0.03 * (unit(rng) - 0.5);
      vp.dx = static_cast<int>(5 * (unit(rng) - 0.5));
      vp.dy = static_cast<int>(5 * (unit(rng) - 0.5));
      vp.noise = 0.02;
      if (unit(rng) < 0.3) {
        vp.occlusion.x = static_cast<int>(unit(rng) * side * 0.7);
        vp.occlusion.y = static_cast<int>(unit(rng) * side * 0.7);
        vp.occlusion.w = side / 6;
        vp.occlusion.h = side / 6;
      }
      ds.items.push_back({id, v, 0, render_view(proto, vp, side)});
    }
  }
  return ds;
}

Episode make_episode(const Dataset& dataset, int classes,
                     std::mt19937_64& rng) {
  auto ids = dataset.identities();
  if (static_cast<int>(ids.size()) < classes)
    throw DataError("make_episode: need " + std::to_string(classes) +
                    " identities, dataset has " + std::to_string(ids.size()));
  // views per identity, grouped
  std::map<int, std::vector<const DatasetItem*>> by_id;
  for (const auto& it : dataset.items) by_id[it.identity].push_back(&it);
  for (int id : ids)
    if (by_id[id].size() < 2)
      throw DataError("make_episode: identity " + std::to_string(id) +
                      " has fewer than 2 views");

  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<int> chosen(ids.begin(), ids.begin() + classes);

  Episode ep;
  std::vector<const DatasetItem*> refs;
  for (int id : chosen) {
    const auto& pool = by_id[id];
    refs.push_back(pool[rng() % pool.size()]);
  }
  int truth = static_cast<int>(rng() % classes);
  const auto& pool = by_id[chosen[truth]];
  std::vector<const DatasetItem*> other_views;
  for (const auto* it : pool)
    if (it->camera != refs[truth]->camera) other_views.push_back(it);
  if (other_views.empty())
    throw DataError("make_episode: identity " + std::to_string(chosen[truth]) +
                    " has no second camera view");
  const DatasetItem* unknown = other_views[rng() % other_views.size()];

  ep.unknown = image_to_tensor(unknown->image);
  for (const auto* r : refs) ep.references.push_back(image_to_tensor(r->image));
  ep.true_index = truth;
  return ep;
}

Dataset load_directory(const std::string& root, int side, int* warnings) {
  if (!fs::is_directory(root)) throw DataError("not a directory: " + root);
  Dataset ds;
  ds.side = side;
  int warn = 0;
  std::vector<fs::path> id_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) id_dirs.push_back(e.path());
  std::sort(id_dirs.begin(), id_dirs.end());
  for (const auto& dir : id_dirs) {
    int identity = 0;
    try {
      identity = std::stoi(dir.filename().string());
    } catch (...) {
      ++warn;
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
      if (f.is_regular_file()) files.push_back(f.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw DataError("empty identity folder: " + dir.string());
    for (const auto& f : files) {
      std::string stem = f.stem().string();
      std::string ext = f.extension().string();
      auto us = stem.find('_');
      int camera = -1, index = -1;
      if (us != std::string::npos && (ext == ".ppm" || ext == ".png")) {
        try {
          camera = std::stoi(stem.substr(0, us));
          index = std::stoi(stem.substr(us + 1));
        } catch (...) {
        }
      }
      if (camera < 0 || index < 0) {
        ++warn;
        continue;
      }
      Image img = resize_nearest(load_image(f.string()), side);
      ds.items.push_back({identity, camera, index, std::move(img)});
    }
  }
  if (warnings) *warnings = warn;
  return ds;
}

void export_dataset(const Dataset& dataset, const std::string& root) {
  fs::create_directories(root);
  std::map<int, std::map<int, int>> next_index;  // identity -> camera -> count
  for (const auto& it : dataset.items) {
    fs::path dir = fs::path(root) / std::to_string(it.identity);
    fs::create_directories(dir);
    int idx = next_index[it.identity][it.camera]++;
    save_ppm(it.image, (dir / (std::to_string(it.camera) + "_" +
                               std::to_string(idx) + ".ppm"))
                           .string());
  }
  std::ofstream man(fs::path(root) / "manifest.txt");
  man << "identities " << dataset.num_identities() << "\n";
  for (int id : dataset.identities()) {
    std::set<int> cams;
    int count = 0;
    for (const auto& it : dataset.items)
      if (it.identity == id) {
        cams.insert(it.camera);
        ++count;
      }
    man << "identity " << id << " cameras " << cams.size() << " images "
        << count << "\n";
  }
}

}  // namespace dcc
