#include "bevkit/voxel_pool.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <regex>
#include <sstream>

#include "bevkit/error.hpp"
#include "bevkit/parallel.hpp"

namespace bevkit {

HeightBinConfig::HeightBinConfig(double z_min, double z_max, double bin_len)
    : z_min_(z_min), z_max_(z_max), bin_len_(bin_len), bins_(0) {
  if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_max > z_min)) {
    raise(ErrorKind::kConfiguration, "height bins need finite z_max > z_min");
  }
  if (!(bin_len > 0.0) || !std::isfinite(bin_len)) raise(ErrorKind::kConfiguration, "height bin length must be positive");
  const double ratio = (z_max - z_min) / bin_len;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    raise(ErrorKind::kConfiguration, "height range is not an integer multiple of the bin length");
  }
  bins_ = static_cast<int>(rounded);
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string HeightBinConfig::label() const {
  return "(" + format_number(z_min_) + "," + format_number(z_max_) + "," + format_number(bin_len_) + ")";
}

HeightBinConfig parse_height_bin_config(const std::string& text) {
  static const std::regex pattern(R"(^\s*\(?\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    raise(ErrorKind::kConfiguration, "height bin config must look like (z_min,z_max,bin_len): " + text);
  }
  try {
    return HeightBinConfig(std::stod(m[1].str()), std::stod(m[2].str()), std::stod(m[3].str()));
  } catch (const std::invalid_argument&) {
    raise(ErrorKind::kConfiguration, "height bin config has a non-numeric field: " + text);
  } catch (const std::out_of_range&) {
    raise(ErrorKind::kConfiguration, "height bin config value out of range: " + text);
  }
}

std::vector<HeightBinConfig> ablation_height_bin_configs() {
  return {HeightBinConfig(-5, 3, 8), HeightBinConfig(-5, 3, 2), HeightBinConfig(-5, 3, 1),
          HeightBinConfig(-5, 5, 1), HeightBinConfig(-10, 10, 1)};
}

HeightBinConfig default_height_bin_config() { return HeightBinConfig(-10, 10, 1); }

std::optional<int> height_bin_index(double z, const HeightBinConfig& h) {
  if (!(z >= h.z_min() && z < h.z_max())) return std::nullopt;
  // Rounding can push z just below z_max onto index `bins`.
  return std::min(static_cast<int>(std::floor((z - h.z_min()) / h.bin_len())), h.bins() - 1);
}

void CameraRig::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0) raise(ErrorKind::kConfiguration, "camera rig needs positive dims");
  const std::size_t pixels = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (feature.size() != static_cast<std::size_t>(channels) * pixels) {
    raise(ErrorKind::kConfiguration, "feature array does not match C x H x W");
  }
  if (depth_bin_centers.empty()) raise(ErrorKind::kConfiguration, "camera rig needs depth bins");
  if (depth_dist.size() != depth_bin_centers.size() * pixels) {
    raise(ErrorKind::kConfiguration, "depth distribution does not match N_d x H x W");
  }
  for (std::size_t j = 1; j < depth_bin_centers.size(); ++j) {
    if (!(depth_bin_centers[j] > depth_bin_centers[j - 1])) {
      raise(ErrorKind::kConfiguration, "depth bin centers must be strictly increasing");
    }
  }
  for (std::size_t px = 0; px < pixels; ++px) {
    double sum = 0.0;
    for (std::size_t j = 0; j < depth_bin_centers.size(); ++j) {
      const float w = depth_dist[j * pixels + px];
      if (!(w >= 0.0f)) raise(ErrorKind::kConfiguration, "depth probabilities must be non-negative");
      sum += w;
    }
    if (sum > 1.0 + 1e-5) raise(ErrorKind::kConfiguration, "depth distribution sums above 1");
  }
}

void LiftedPoints::push_back(const Point3& p, std::span<const float> f) {
  require(f.size() == channels, "lifted point feature has the wrong channel count");
  positions.push_back(p);
  features.insert(features.end(), f.begin(), f.end());
}

LiftedPoints lift_points(const CameraRig& cam) {
  cam.validate();
  Eigen::Matrix3d k, r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      k(i, j) = cam.intrinsics[i][j];
      r(i, j) = cam.rotation[i][j];
    }
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(k);
  if (!lu.isInvertible()) raise(ErrorKind::kConfiguration, "camera intrinsics are singular");
  const Eigen::Matrix3d k_inv = lu.inverse();
  const Eigen::Vector3d t(cam.translation[0], cam.translation[1], cam.translation[2]);

  const std::size_t pixels = static_cast<std::size_t>(cam.height) * static_cast<std::size_t>(cam.width);
  const std::size_t depth_bins = cam.depth_bin_centers.size();
  LiftedPoints out;
  out.channels = static_cast<std::size_t>(cam.channels);
  out.positions.reserve(pixels * depth_bins);
  out.features.reserve(pixels * depth_bins * out.channels);
  std::vector<float> f(out.channels);

  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const std::size_t px = static_cast<std::size_t>(v) * cam.width + u;
      const Eigen::Vector3d ray = k_inv * Eigen::Vector3d(u + 0.5, v + 0.5, 1.0);
      for (std::size_t j = 0; j < depth_bins; ++j) {
        const Eigen::Vector3d p = r * (ray * cam.depth_bin_centers[j]) + t;
        const float w = cam.depth_dist[j * pixels + px];
        for (std::size_t c = 0; c < out.channels; ++c) f[c] = w * cam.feature[c * pixels + px];
        out.push_back({p.x(), p.y(), p.z()}, f);
      }
    }
  }
  return out;
}

BevTensor::BevTensor(int bins, int channels_per_bin, int rows, int cols)
    : bins_(bins), channels_per_bin_(channels_per_bin), rows_(rows), cols_(cols) {
  require(bins > 0 && channels_per_bin > 0 && rows > 0 && cols > 0, "BEV tensor needs positive dims");
  values_.assign(static_cast<std::size_t>(bins) * channels_per_bin * rows * cols, 0.0f);
}

double BevTensor::total() const {
  double sum = 0.0;
  for (float v : values_) sum += v;
  return sum;
}

namespace {

void check_pool_inputs(const LiftedPoints& pts) {
  require(pts.channels > 0, "lifted points need at least one channel");
  require(pts.features.size() == pts.positions.size() * pts.channels, "lifted point features are inconsistent");
}

}  // namespace

BevTensor pool_naive(const LiftedPoints& pts, const BevGridSpec& grid, const HeightBinConfig& h) {
  check_pool_inputs(pts);
  grid.validate();
  const int channels = static_cast<int>(pts.channels);
  BevTensor out(h.bins(), channels, grid.rows, grid.cols);
  auto values = out.mutable_values();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto cell = world_to_grid(pts.positions[i], grid);
    if (!cell) continue;
    const auto bin = height_bin_index(pts.positions[i].z, h);
    if (!bin) continue;
    const auto f = pts.feature(i);
    for (int c = 0; c < channels; ++c) values[out.index(*bin, c, cell->row, cell->col)] += f[c];
  }
  return out;
}

BevTensor pool_fast(const LiftedPoints& pts, const BevGridSpec& grid, const HeightBinConfig& h) {
  check_pool_inputs(pts);
  grid.validate();
  const std::size_t channels = pts.channels;
  const std::size_t n = pts.size();
  BevTensor out(h.bins(), static_cast<int>(channels), grid.rows, grid.cols);
  if (n == 0) return out;

  const std::size_t plane = grid.cell_count();
  const std::size_t voxels = plane * static_cast<std::size_t>(h.bins());
  require(voxels < std::numeric_limits<std::uint32_t>::max(), "voxel count exceeds 32-bit keys");
  constexpr std::uint32_t kDropped = std::numeric_limits<std::uint32_t>::max();

  // Voxel id = bin * rows * cols + row * cols + col; same cell/bin rules as
  // world_to_grid and height_bin_index.
  std::vector<std::uint32_t> keys(n);
  const double x_min = grid.x_min, y_min = grid.y_min, cell = grid.cell_size;
  const double z_min = h.z_min(), z_max = h.z_max(), bin_len = h.bin_len();
  const double rows = grid.rows, cols = grid.cols;
  const auto last_bin = static_cast<std::uint32_t>(h.bins() - 1);
  const auto plane32 = static_cast<std::uint32_t>(plane);
  const auto cols32 = static_cast<std::uint32_t>(grid.cols);
  // Branchless: on the accepted range every quotient is >= 0, so truncation
  // equals floor. Rejected lanes are zeroed before the conversion.
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Point3& p = pts.positions[i];
      const double r = (p.x - x_min) / cell;
      const double c = (p.y - y_min) / cell;
      const double b = (p.z - z_min) / bin_len;
      const bool ok = (r >= 0.0) & (r < rows) & (c >= 0.0) & (c < cols) & (p.z >= z_min) & (p.z < z_max);
      const auto ri = static_cast<std::uint32_t>(ok ? r : 0.0);
      const auto ci = static_cast<std::uint32_t>(ok ? c : 0.0);
      const auto bi = std::min(static_cast<std::uint32_t>(ok ? b : 0.0), last_bin);
      const std::uint32_t key = bi * plane32 + ri * cols32 + ci;
      keys[i] = ok ? key : kDropped;
    }
  });

  // Stable counting sort: offsets[v] .. offsets[v + 1] is voxel v's segment.
  std::vector<std::uint32_t> offsets(voxels + 1, 0);
  for (const auto k : keys) {
    if (k != kDropped) ++offsets[k + 1];
  }
  for (std::size_t v = 0; v < voxels; ++v) offsets[v + 1] += offsets[v];
  const std::size_t kept = offsets[voxels];
  std::vector<std::uint32_t> order(kept);
  {
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (keys[i] != kDropped) order[cursor[keys[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  // Segments own disjoint output elements, so voxel ranges run independently.
  auto values = out.mutable_values();
  const float* feats = pts.features.data();
  const std::size_t channel_stride = plane;
  parallel_for(voxels, [&](std::size_t begin, std::size_t end) {
    std::vector<float> acc(channels);
    constexpr std::size_t kPrefetch = 16;
    for (std::size_t v = begin; v < end; ++v) {
      const std::uint32_t s0 = offsets[v];
      const std::uint32_t s1 = offsets[v + 1];
      if (s0 == s1) continue;
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (std::uint32_t s = s0; s < s1; ++s) {
#if defined(__GNUC__)
        if (s + kPrefetch < kept) __builtin_prefetch(feats + static_cast<std::size_t>(order[s + kPrefetch]) * channels);
#endif
        const float* f = feats + static_cast<std::size_t>(order[s]) * channels;
        for (std::size_t c = 0; c < channels; ++c) acc[c] += f[c];
      }
      const std::size_t bin = v / plane;
      const std::size_t base = bin * channels * plane + (v % plane);
      for (std::size_t c = 0; c < channels; ++c) values[base + c * channel_stride] = acc[c];
    }
  });
  return out;
}

std::uint64_t tensor_hash(const BevTensor& t) {
  std::uint64_t h = 1469598103934665603ull;
  for (float v : t.values()) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 4; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace bevkit
