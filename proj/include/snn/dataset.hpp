#pragma once

// Labelled datasets: MNIST IDX ingestion and seeded synthetic problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "snn/csv.hpp"
#include "snn/error.hpp"
#include "snn/linalg.hpp"
#include "snn/rng.hpp"

namespace snn {

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
  std::vector<double> features;  // row-major, size() * input_dim
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }

  std::span<const double> sample(std::size_t i) const { return {features.data() + i * input_dim, input_dim}; }

  void push_back(std::span<const double> x, std::uint32_t label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Throws InvalidArgument on a broken Dataset invariant.
inline void validate(const Dataset& d) {
  if (d.features.size() != d.labels.size() * d.input_dim)
    throw Error(ErrorCode::DimensionMismatch, "feature buffer does not match sample count");
  for (std::uint32_t label : d.labels)
    if (label >= d.class_count) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label));
  for (double v : d.features)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidArgument, "feature outside [0, 1]");
}

inline Vector one_hot(std::size_t label, std::size_t class_count) {
  if (label >= class_count)
    throw Error(ErrorCode::LabelOutOfRange,
                "label " + std::to_string(label) + " with " + std::to_string(class_count) + " classes");
  Vector v(class_count, 0.0);
  v[label] = 1.0;
  return v;
}

// ---------------------------------------------------------------- IDX files

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols

  std::size_t pixels_per_image() const noexcept { return rows * cols; }
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                               const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw Error(ErrorCode::Truncated, path.string() + ": header cut short");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                         static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace detail

inline IdxImages load_idx_images(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::uint32_t magic = detail::read_be32(bytes, 0, path);
  if (magic != kIdxImageMagic)
    throw Error(ErrorCode::BadMagic, path.string() + ": magic " + std::to_string(magic) + ", expected 2051");
  IdxImages images;
  images.count = detail::read_be32(bytes, 4, path);
  images.rows = detail::read_be32(bytes, 8, path);
  images.cols = detail::read_be32(bytes, 12, path);
  const std::size_t expected = images.count * images.rows * images.cols;
  if (bytes.size() - 16 < expected)
    throw Error(ErrorCode::Truncated, path.string() + ": " + std::to_string(bytes.size() - 16) +
                                          " pixel bytes, header promises " + std::to_string(expected));
  images.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(expected));
  return images;
}

inline std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::uint32_t magic = detail::read_be32(bytes, 0, path);
  if (magic != kIdxLabelMagic)
    throw Error(ErrorCode::BadMagic, path.string() + ": magic " + std::to_string(magic) + ", expected 2049");
  const std::size_t count = detail::read_be32(bytes, 4, path);
  if (bytes.size() - 8 < count)
    throw Error(ErrorCode::Truncated, path.string() + ": " + std::to_string(bytes.size() - 8) +
                                          " label bytes, header promises " + std::to_string(count));
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

// Builds a Dataset from raw IDX content, keeping only `indices` (all samples
// when empty). Pixels are scaled by 1/255.
inline Dataset make_dataset(const IdxImages& images, std::span<const std::uint8_t> labels,
                            std::size_t class_count = 10, std::span<const std::size_t> indices = {}) {
  if (images.count != labels.size())
    throw Error(ErrorCode::CountMismatch, std::to_string(images.count) + " images but " +
                                              std::to_string(labels.size()) + " labels");
  Dataset d;
  d.input_dim = images.pixels_per_image();
  d.class_count = class_count;
  auto take = [&](std::size_t i) {
    if (labels[i] >= class_count) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]));
    const std::uint8_t* px = images.pixels.data() + i * d.input_dim;
    for (std::size_t p = 0; p < d.input_dim; ++p) d.features.push_back(static_cast<double>(px[p]) / 255.0);
    d.labels.push_back(labels[i]);
  };
  if (indices.empty()) {
    d.features.reserve(images.count * d.input_dim);
    for (std::size_t i = 0; i < images.count; ++i) take(i);
  } else {
    d.features.reserve(indices.size() * d.input_dim);
    for (std::size_t i : indices) take(i);
  }
  return d;
}

// Writes features as pixel bytes. Every feature must sit on the 1/255 grid,
// so a write/read round trip reproduces the dataset exactly.
inline void write_idx(const Dataset& d, const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path, std::size_t rows = 0, std::size_t cols = 0) {
  if (rows == 0 || cols == 0) {
    rows = 1;
    cols = d.input_dim;
  }
  if (rows * cols != d.input_dim) throw Error(ErrorCode::DimensionMismatch, "rows*cols must equal input_dim");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::Io, "cannot open IDX output files");
  detail::write_be32(img, kIdxImageMagic);
  detail::write_be32(img, static_cast<std::uint32_t>(d.size()));
  detail::write_be32(img, static_cast<std::uint32_t>(rows));
  detail::write_be32(img, static_cast<std::uint32_t>(cols));
  std::vector<char> buffer(d.features.size());
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    const double scaled = d.features[i] * 255.0;
    const double level = std::round(scaled);
    if (std::abs(scaled - level) > 1e-6 || level < 0.0 || level > 255.0)
      throw Error(ErrorCode::InvalidArgument, "feature " + std::to_string(i) + " is not a multiple of 1/255");
    buffer[i] = static_cast<char>(static_cast<std::uint8_t>(level));
  }
  img.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  detail::write_be32(lab, kIdxLabelMagic);
  detail::write_be32(lab, static_cast<std::uint32_t>(d.size()));
  for (std::uint32_t label : d.labels) lab.put(static_cast<char>(label));
  if (!img || !lab) throw Error(ErrorCode::Io, "failed writing IDX files");
}

inline Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::size_t class_count = 10) {
  const auto images = load_idx_images(images_path);
  const auto labels = load_idx_labels(labels_path);
  return make_dataset(images, labels, class_count);
}

// Snaps every feature to the nearest multiple of 1/255.
inline Dataset quantize_pixels(Dataset d) {
  for (double& v : d.features) v = std::round(v * 255.0) / 255.0;
  return d;
}

// ---------------------------------------------------------------- subsets

// Seeded, class-balanced index selection: each class's indices are shuffled
// and the first `per_class` kept; the union is shuffled once more.
inline std::vector<std::size_t> balanced_indices(std::span<const std::uint32_t> labels, std::size_t class_count,
                                                 std::size_t per_class, std::uint64_t seed) {
  if (per_class < 1) throw Error(ErrorCode::InvalidArgument, "per_class must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]));
    by_class[labels[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(per_class * class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    auto& members = by_class[c];
    if (members.size() < per_class)
      throw Error(ErrorCode::InsufficientSamples, "class " + std::to_string(c) + " has " +
                                                      std::to_string(members.size()) + " samples, need " +
                                                      std::to_string(per_class));
    rng.shuffle(std::span<std::size_t>(members));
    chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  rng.shuffle(std::span<std::size_t>(chosen));
  return chosen;
}

inline Dataset select(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.input_dim = d.input_dim;
  out.class_count = d.class_count;
  out.features.reserve(indices.size() * d.input_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(d.sample(i), d.labels[i]);
  return out;
}

inline Dataset subsample(const Dataset& d, std::size_t per_class, std::uint64_t seed) {
  std::vector<std::uint32_t> labels(d.labels.begin(), d.labels.end());
  return select(d, balanced_indices(labels, d.class_count, per_class, seed));
}

// Loads an IDX pair and keeps a balanced subset without materialising the
// full feature matrix. per_class == 0 keeps everything.
inline Dataset load_idx_subsample(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                                  std::size_t per_class, std::uint64_t seed, std::size_t class_count = 10) {
  const auto images = load_idx_images(images_path);
  const auto labels = load_idx_labels(labels_path);
  if (per_class == 0) return make_dataset(images, labels, class_count);
  std::vector<std::uint32_t> wide(labels.begin(), labels.end());
  const auto indices = balanced_indices(wide, class_count, per_class, seed);
  return make_dataset(images, labels, class_count, indices);
}

// ---------------------------------------------------------------- synthetic

// Gaussian blobs around seeded centres in [0,1]^dim with pairwise centre
// distance >= separation. Per-coordinate spread is separation / 8; features
// are clamped to [0, 1].
inline Dataset synthetic_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double separation,
                               std::uint64_t seed) {
  if (!(separation > 0.0)) throw Error(ErrorCode::InvalidArgument, "separation must be positive");
  if (classes < 1 || dim < 1) throw Error(ErrorCode::InvalidArgument, "classes and dim must be positive");
  Rng rng(seed);
  // Greedy rejection sampling; an unlucky early centre can block the rest,
  // so the whole placement restarts when a centre cannot be fitted.
  std::vector<Vector> centres;
  constexpr int kRestarts = 1000;
  constexpr int kAttemptsPerCentre = 1000;
  auto far_from_all = [&](const Vector& centre) {
    for (const auto& other : centres) {
      double sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) sq += (centre[i] - other[i]) * (centre[i] - other[i]);
      if (std::sqrt(sq) < separation) return false;
    }
    return true;
  };
  for (int restart = 0; centres.size() < classes; ++restart) {
    if (restart == kRestarts)
      throw Error(ErrorCode::InvalidArgument, "cannot place " + std::to_string(classes) + " centres at separation " +
                                                  csv::format(separation));
    centres.clear();
    for (std::size_t c = 0; c < classes; ++c) {
      bool placed = false;
      for (int attempt = 0; attempt < kAttemptsPerCentre && !placed; ++attempt) {
        Vector centre(dim);
        for (double& v : centre) v = rng.uniform01();
        if (far_from_all(centre)) {
          centres.push_back(std::move(centre));
          placed = true;
        }
      }
      if (!placed) break;
    }
  }
  const double spread = separation / 8.0;
  Dataset d;
  d.input_dim = dim;
  d.class_count = classes;
  d.features.reserve(classes * per_class * dim);
  d.labels.reserve(classes * per_class);
  Vector x(dim);
  for (std::size_t s = 0; s < per_class; ++s) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < dim; ++i) x[i] = std::clamp(rng.normal(centres[c][i], spread), 0.0, 1.0);
      d.push_back(x, static_cast<std::uint32_t>(c));
    }
  }
  return d;
}

// label,f0,f1,... one sample per line.
inline void write_csv(std::ostream& out, const Dataset& d) {
  out << "label";
  for (std::size_t i = 0; i < d.input_dim; ++i) out << ",f" << i;
  out << '\n';
  for (std::size_t s = 0; s < d.size(); ++s) {
    out << d.labels[s];
    for (double v : d.sample(s)) out << ',' << csv::format(v);
    out << '\n';
  }
}

}  // namespace snn
