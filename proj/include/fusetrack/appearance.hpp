#pragma once

// Colour and shape appearance features, and class-restricted retrieval.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fusetrack::appearance {

enum class VehicleClass : std::uint8_t { Car, Truck, Bus, Motor };

std::string_view to_string(VehicleClass c);
/// Throws InvalidArgument on an unknown name.
VehicleClass parse_vehicle_class(std::string_view name);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// h in degrees [0, 360), s and v in [0, 1].
struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

/// Hexcone conversion. Achromatic input gets h = 0.
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
inline Hsv rgb_to_hsv(Rgb c) { return rgb_to_hsv(c.r, c.g, c.b); }

/// Inverse conversion, rounded to the nearest channel value. h is wrapped
/// into [0, 360), s and v are clamped to [0, 1].
Rgb hsv_to_rgb(const Hsv& c);

struct HistogramConfig {
  int h_bins = 16;
  int s_bins = 4;
  int v_bins = 4;

  std::size_t size() const {
    return static_cast<std::size_t>(h_bins) * static_cast<std::size_t>(s_bins) *
           static_cast<std::size_t>(v_bins);
  }
  /// Throws InvalidArgument when a bin count is < 1 or size() > 65536.
  void validate() const;

  friend bool operator==(const HistogramConfig&, const HistogramConfig&) = default;
};

/// Flat bin index ((h_idx * s_bins) + s_idx) * v_bins + v_idx.
std::size_t bin_index(const Hsv& c, const HistogramConfig& cfg);

class ColorHistogram {
 public:
  ColorHistogram() = default;

  /// Validates non-negativity and that the weights sum to 1 within
  /// `tolerance`. An all-zero vector yields the empty histogram.
  static ColorHistogram from_weights(const HistogramConfig& cfg, std::vector<double> weights,
                                     double tolerance = 1e-9);
  static ColorHistogram empty(const HistogramConfig& cfg);

  const HistogramConfig& config() const { return config_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_empty() const { return empty_; }
  std::size_t size() const { return weights_.size(); }

  friend bool operator==(const ColorHistogram&, const ColorHistogram&) = default;

 private:
  HistogramConfig config_;
  std::vector<double> weights_;
  bool empty_ = true;
};

struct Region {
  int x = 0, y = 0, width = 0, height = 0;
};

class PixelImage {
 public:
  PixelImage(int width, int height, std::vector<Rgb> pixels);
  PixelImage(int width, int height, Rgb fill);

  int width() const { return width_; }
  int height() const { return height_; }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Restricts histogramming to a rectangle. Throws if it leaves the image.
  void set_region(const Region& roi);
  Region region() const;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
  std::optional<Region> roi_;
};

/// Reads a binary (P6) or ASCII (P3) portable pixmap with maxval 255.
PixelImage read_ppm(std::istream& in);

/// Histogram over the image region, normalized by pixel count. Throws
/// InvalidArgument when the region has no pixels.
ColorHistogram compute_histogram(const PixelImage& img, const HistogramConfig& cfg);

/// Same quantization applied to already-converted samples.
ColorHistogram histogram_from_hsv(std::span<const Hsv> samples, const HistogramConfig& cfg);

enum class SimilarityMetric : std::uint8_t { Intersection, Cosine };

/// Bounded similarity in [0, 1]. Intersection by default. Throws on a
/// configuration mismatch.
double similarity(const ColorHistogram& a, const ColorHistogram& b,
                  SimilarityMetric metric = SimilarityMetric::Intersection);

struct AppearanceFeature {
  VehicleClass vehicle_class = VehicleClass::Car;
  std::vector<double> shape;
  ColorHistogram histogram;

  friend bool operator==(const AppearanceFeature&, const AppearanceFeature&) = default;
};

struct MatchOptions {
  double w_color = 0.5;
  SimilarityMetric metric = SimilarityMetric::Intersection;
};

/// Root-mean-square component difference, clamped to 1. Descriptors are
/// expected to have roughly unit spread per component.
double shape_distance(std::span<const double> a, std::span<const double> b);

/// w_color * (1 - colour similarity) + (1 - w_color) * shape_distance.
/// Lies in [0, 1]. Throws InvalidArgument on class or dimension mismatch.
double feature_distance(const AppearanceFeature& a, const AppearanceFeature& b,
                        const MatchOptions& opts);
inline double feature_distance(const AppearanceFeature& a, const AppearanceFeature& b,
                               double w_color) {
  return feature_distance(a, b, MatchOptions{w_color, SimilarityMetric::Intersection});
}

struct RankedCandidate {
  std::size_t index = 0;
  double distance = 0.0;
  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// Ranks the candidates of the query's class by ascending feature distance,
/// ties by ascending index, and returns at most k of them.
std::vector<RankedCandidate> top_k(const AppearanceFeature& query,
                                   std::span<const AppearanceFeature> candidates, std::size_t k,
                                   const MatchOptions& opts = {});

/// As top_k, but only the listed candidate indices are compared.
std::vector<RankedCandidate> top_k_among(const AppearanceFeature& query,
                                         std::span<const AppearanceFeature> candidates,
                                         std::span<const std::size_t> indices, std::size_t k,
                                         const MatchOptions& opts = {});

}  // namespace fusetrack::appearance
