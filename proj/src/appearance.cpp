#include "fusetrack/appearance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <string>

#include "fusetrack/error.hpp"

namespace fusetrack::appearance {
namespace {

constexpr std::array<std::string_view, 4> kClassNames{"car", "truck", "bus", "motor"};

std::size_t quantize(double value, double range, int bins) {
  const auto idx = static_cast<long long>(std::floor(value / range * bins));
  return static_cast<std::size_t>(std::clamp<long long>(idx, 0, bins - 1));
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

std::string_view to_string(VehicleClass c) {
  return kClassNames[static_cast<std::size_t>(c)];
}

VehicleClass parse_vehicle_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<VehicleClass>(i);
  }
  throw InvalidArgument("unknown vehicle class '" + std::string(name) + "'");
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;

  Hsv out;
  out.v = max;
  out.s = max > 0.0 ? delta / max : 0.0;
  if (delta > 0.0) {
    double h;
    if (max == r) {
      h = 60.0 * std::fmod((g - b) / delta, 6.0);
    } else if (max == g) {
      h = 60.0 * ((b - r) / delta + 2.0);
    } else {
      h = 60.0 * ((r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
  }
  return out;
}

Rgb hsv_to_rgb(const Hsv& c) {
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = std::clamp(c.v, 0.0, 1.0);

  const double chroma = v * s;
  const double hp = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0.0, g = 0.0, b = 0.0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = v - chroma;
  auto channel = [](double u) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L));
  };
  return Rgb{channel(r + m), channel(g + m), channel(b + m)};
}

void HistogramConfig::validate() const {
  if (h_bins < 1 || s_bins < 1 || v_bins < 1) {
    throw InvalidArgument("histogram bin counts must be >= 1");
  }
  if (size() > 65536) throw InvalidArgument("histogram has more than 65536 bins");
}

std::size_t bin_index(const Hsv& c, const HistogramConfig& cfg) {
  const std::size_t h = quantize(c.h, 360.0, cfg.h_bins);
  const std::size_t s = quantize(c.s, 1.0, cfg.s_bins);
  const std::size_t v = quantize(c.v, 1.0, cfg.v_bins);
  return (h * cfg.s_bins + s) * cfg.v_bins + v;
}

ColorHistogram ColorHistogram::from_weights(const HistogramConfig& cfg,
                                            std::vector<double> weights, double tolerance) {
  cfg.validate();
  if (weights.size() != cfg.size()) {
    throw InvalidArgument("histogram has " + std::to_string(weights.size()) +
                          " weights, configuration expects " + std::to_string(cfg.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("histogram weight must be finite and >= 0");
    sum += w;
  }
  ColorHistogram h;
  h.config_ = cfg;
  h.weights_ = std::move(weights);
  if (sum == 0.0) {
    h.empty_ = true;
    return h;
  }
  if (std::fabs(sum - 1.0) > tolerance) {
    throw InvalidArgument("histogram weights sum to " + std::to_string(sum) + ", expected 1");
  }
  h.empty_ = false;
  return h;
}

ColorHistogram ColorHistogram::empty(const HistogramConfig& cfg) {
  cfg.validate();
  ColorHistogram h;
  h.config_ = cfg;
  h.weights_.assign(cfg.size(), 0.0);
  h.empty_ = true;
  return h;
}

PixelImage::PixelImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw InvalidArgument("image must have at least one pixel");
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("pixel buffer size does not match image dimensions");
  }
}

PixelImage::PixelImage(int width, int height, Rgb fill)
    : PixelImage(width, height,
                 std::vector<Rgb>(width > 0 && height > 0
                                      ? static_cast<std::size_t>(width) * static_cast<std::size_t>(height)
                                      : 0,
                                  fill)) {}

void PixelImage::set_region(const Region& roi) {
  if (roi.x < 0 || roi.y < 0 || roi.width < 0 || roi.height < 0 ||
      roi.x + roi.width > width_ || roi.y + roi.height > height_) {
    throw InvalidArgument("region of interest outside image bounds");
  }
  roi_ = roi;
}

Region PixelImage::region() const { return roi_.value_or(Region{0, 0, width_, height_}); }

PixelImage read_ppm(std::istream& in) {
  auto token = [&in]() {
    std::string tok;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(ch);
    }
    if (tok.empty()) throw ParseError("truncated PPM header", 0);
    return tok;
  };
  auto number = [&token]() {
    const std::string tok = token();
    try {
      return std::stoi(tok);
    } catch (const std::exception&) {
      throw ParseError("bad PPM field '" + tok + "'", 0);
    }
  };

  const std::string magic = token();
  if (magic != "P6" && magic != "P3") throw ParseError("not a P3/P6 pixmap", 1);
  const int width = number();
  const int height = number();
  const int maxval = number();
  if (width < 1 || height < 1) throw ParseError("PPM dimensions must be positive", 0);
  if (maxval != 255) throw ParseError("only maxval 255 is supported", 0);

  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  if (magic == "P6") {
    // token() consumed exactly one whitespace byte after maxval.
    for (Rgb& p : pixels) {
      char buf[3];
      if (!in.read(buf, 3)) throw ParseError("truncated P6 raster", 0);
      p = Rgb{static_cast<std::uint8_t>(buf[0]), static_cast<std::uint8_t>(buf[1]),
              static_cast<std::uint8_t>(buf[2])};
    }
  } else {
    for (Rgb& p : pixels) {
      std::array<int, 3> c{number(), number(), number()};
      for (int v : c) {
        if (v < 0 || v > 255) throw ParseError("P3 sample out of range", 0);
      }
      p = Rgb{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
              static_cast<std::uint8_t>(c[2])};
    }
  }
  return PixelImage(width, height, std::move(pixels));
}

ColorHistogram compute_histogram(const PixelImage& img, const HistogramConfig& cfg) {
  cfg.validate();
  const Region roi = img.region();
  const std::size_t count = static_cast<std::size_t>(roi.width) * static_cast<std::size_t>(roi.height);
  if (count == 0) throw InvalidArgument("empty region: no extractable colour feature");

  std::vector<double> counts(cfg.size(), 0.0);
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      counts[bin_index(rgb_to_hsv(img.at(x, y)), cfg)] += 1.0;
    }
  }
  for (double& c : counts) c /= static_cast<double>(count);
  return ColorHistogram::from_weights(cfg, std::move(counts), 1e-12);
}

ColorHistogram histogram_from_hsv(std::span<const Hsv> samples, const HistogramConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw InvalidArgument("no colour samples: no extractable colour feature");
  std::vector<double> counts(cfg.size(), 0.0);
  for (const Hsv& c : samples) counts[bin_index(c, cfg)] += 1.0;
  for (double& c : counts) c /= static_cast<double>(samples.size());
  return ColorHistogram::from_weights(cfg, std::move(counts), 1e-12);
}

double similarity(const ColorHistogram& a, const ColorHistogram& b, SimilarityMetric metric) {
  if (!(a.config() == b.config()) || a.size() != b.size()) {
    throw InvalidArgument("similarity: histogram configurations differ");
  }
  if (a.is_empty() || b.is_empty()) return a.is_empty() && b.is_empty() ? 1.0 : 0.0;

  const auto& wa = a.weights();
  const auto& wb = b.weights();
  if (metric == SimilarityMetric::Cosine) {
    const double dot = std::inner_product(wa.begin(), wa.end(), wb.begin(), 0.0);
    return std::clamp(dot / (norm(wa) * norm(wb)), 0.0, 1.0);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < wa.size(); ++i) acc += std::min(wa[i], wb[i]);
  return std::clamp(acc, 0.0, 1.0);
}

double shape_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("shape descriptors differ in length");
  if (a.empty()) return 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - b[i]) * (a[i] - b[i]);
  return std::min(1.0, std::sqrt(diff / static_cast<double>(a.size())));
}

double feature_distance(const AppearanceFeature& a, const AppearanceFeature& b,
                        const MatchOptions& opts) {
  if (a.vehicle_class != b.vehicle_class) {
    throw InvalidArgument("feature_distance: classes differ; filter by class first");
  }
  if (!(opts.w_color >= 0.0 && opts.w_color <= 1.0)) {
    throw InvalidArgument("feature_distance: w_color must lie in [0, 1]");
  }
  const double color = 1.0 - similarity(a.histogram, b.histogram, opts.metric);
  const double shape = shape_distance(a.shape, b.shape);
  return opts.w_color * color + (1.0 - opts.w_color) * shape;
}

std::vector<RankedCandidate> top_k_among(const AppearanceFeature& query,
                                         std::span<const AppearanceFeature> candidates,
                                         std::span<const std::size_t> indices, std::size_t k,
                                         const MatchOptions& opts) {
  std::vector<RankedCandidate> ranked;
  if (k == 0) return ranked;
  ranked.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= candidates.size()) throw InvalidArgument("top_k: candidate index out of range");
    const AppearanceFeature& c = candidates[idx];
    if (c.vehicle_class != query.vehicle_class) continue;
    ranked.push_back({idx, feature_distance(query, c, opts)});
  }
  auto less = [](const RankedCandidate& x, const RankedCandidate& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.index < y.index;
  };
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    less);
  ranked.resize(keep);
  return ranked;
}

std::vector<RankedCandidate> top_k(const AppearanceFeature& query,
                                   std::span<const AppearanceFeature> candidates, std::size_t k,
                                   const MatchOptions& opts) {
  std::vector<std::size_t> all(candidates.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return top_k_among(query, candidates, all, k, opts);
}

}  // namespace fusetrack::appearance
