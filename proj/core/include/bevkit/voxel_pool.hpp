#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevkit/geometry.hpp"

namespace bevkit {

/// Height range [z_min, z_max) split into bins of bin_len meters. The range
/// must be an integer multiple of bin_len.
class HeightBinConfig {
 public:
  HeightBinConfig(double z_min, double z_max, double bin_len);

  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  double bin_len() const { return bin_len_; }
  int bins() const { return bins_; }
  /// "(-10,10,1)" style label.
  std::string label() const;

  friend bool operator==(const HeightBinConfig&, const HeightBinConfig&) = default;

 private:
  double z_min_;
  double z_max_;
  double bin_len_;
  int bins_;
};

/// Parses "(-10,10,1)"; throws kConfiguration on malformed text.
HeightBinConfig parse_height_bin_config(const std::string& text);

/// The five height-bin settings from the pooling ablation, pillar first.
std::vector<HeightBinConfig> ablation_height_bin_configs();

/// Default (-10, 10, 1): 20 bins.
HeightBinConfig default_height_bin_config();

std::optional<int> height_bin_index(double z, const HeightBinConfig& h);

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// One camera's lift inputs. Arrays are row-major:
/// feature[c][v][u] and depth_dist[j][v][u].
struct CameraRig {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> feature;
  std::vector<float> depth_dist;
  std::vector<double> depth_bin_centers;
  Mat3 intrinsics{};
  Mat3 rotation{};  // camera -> vehicle
  Vec3 translation{};

  int depth_bins() const { return static_cast<int>(depth_bin_centers.size()); }
  void validate() const;
};

/// Structure-of-arrays point cloud: positions[i] pairs with
/// features[i * channels, (i + 1) * channels).
struct LiftedPoints {
  std::size_t channels = 0;
  std::vector<Point3> positions;
  std::vector<float> features;

  std::size_t size() const { return positions.size(); }
  std::span<const float> feature(std::size_t i) const {
    return std::span<const float>(features).subspan(i * channels, channels);
  }
  void push_back(const Point3& p, std::span<const float> f);
};

/// Unprojects every pixel center through every depth bin and weights the
/// pixel feature by that bin's depth probability.
LiftedPoints lift_points(const CameraRig& cam);

/// (bins * channels) x rows x cols. Bin b owns channels [b*C, (b+1)*C).
class BevTensor {
 public:
  BevTensor(int bins, int channels_per_bin, int rows, int cols);

  int bins() const { return bins_; }
  int channels_per_bin() const { return channels_per_bin_; }
  int channels() const { return bins_ * channels_per_bin_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t index(int bin, int channel, int row, int col) const {
    return ((static_cast<std::size_t>(bin) * channels_per_bin_ + channel) * rows_ + row) * cols_ + col;
  }
  float at(int bin, int channel, int row, int col) const { return values_[index(bin, channel, row, col)]; }
  std::span<const float> values() const { return values_; }
  std::span<float> mutable_values() { return values_; }
  double total() const;

 private:
  int bins_;
  int channels_per_bin_;
  int rows_;
  int cols_;
  std::vector<float> values_;
};

/// Reference splat: one point at a time, accumulating in input order.
BevTensor pool_naive(const LiftedPoints& pts, const BevGridSpec& grid, const HeightBinConfig& h);

/// Stable counting sort by voxel id followed by a segmented reduction that is
/// parallel over voxel ranges. Per-voxel summation order equals input order.
BevTensor pool_fast(const LiftedPoints& pts, const BevGridSpec& grid, const HeightBinConfig& h);

/// FNV-1a over the tensor's raw float bytes.
std::uint64_t tensor_hash(const BevTensor& t);

struct BenchRow {
  std::string config;
  std::string impl;
  std::size_t points = 0;
  double seconds = 0.0;
  double points_per_sec = 0.0;
  std::uint64_t hash = 0;
};

struct BenchOptions {
  std::size_t points = 1'000'000;
  int channels = 16;
  std::uint64_t seed = 7;
  int repeats = 3;  // best-of
  BevGridSpec grid{};
};

/// Uniform random points over a slightly enlarged grid and height extent so
/// that some fall outside; features uniform in [0, 1).
LiftedPoints random_lifted_points(std::size_t n, int channels, std::uint64_t seed, const BevGridSpec& grid,
                                  double z_lo = -12.0, double z_hi = 12.0);

/// Times pool_naive and pool_fast on the same points for each config.
std::vector<BenchRow> bench_pool(const std::vector<HeightBinConfig>& configs, const BenchOptions& options = {});

}  // namespace bevkit
