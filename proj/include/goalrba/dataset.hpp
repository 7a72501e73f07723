#pragma once

// Training data for the learning workloads: a seeded Gaussian-mixture stand-in
// for MNIST, the non-i.i.d. ED split, and an IDX reader for real MNIST files.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goalrba/errors.hpp"
#include "goalrba/mlp.hpp"
#include "goalrba/random.hpp"

namespace goalrba {

struct MixtureSpec {
  int dim = 784;
  int classes = 10;
  double mean_scale = 0.12;  // class means ~ N(0, mean_scale^2 I)
  double noise = 1.0;        // within-class std
};

class GaussianMixture {
 public:
  GaussianMixture(const MixtureSpec& spec, std::uint64_t seed) : spec_(spec) {
    Rng rng(seed);
    means_.resize(spec.dim, spec.classes);
    for (Eigen::Index i = 0; i < means_.size(); ++i) means_.data()[i] = spec.mean_scale * standard_normal(rng);
  }

  // `count` samples with labels cycling through the classes (balanced).
  Dataset sample(int count, Rng& rng) const {
    Dataset d;
    d.x.resize(spec_.dim, count);
    d.y.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int c = i % spec_.classes;
      d.y[static_cast<std::size_t>(i)] = c;
      for (int k = 0; k < spec_.dim; ++k) d.x(k, i) = means_(k, c) + spec_.noise * standard_normal(rng);
    }
    return d;
  }

  const MixtureSpec& spec() const { return spec_; }

 private:
  MixtureSpec spec_;
  Eigen::MatrixXd means_;
};

struct SplitSpec {
  int num_eds = 10;
  std::vector<int> designated_classes{6, 9};  // class k concentrated on ED k
  double concentration = 0.95;
};

// Deals `pool` out to EDs: designated class k goes to ED k with probability
// `concentration` (otherwise to a uniformly chosen other ED); every other
// class is spread uniformly.
inline std::vector<Dataset> non_iid_split(const Dataset& pool, const SplitSpec& spec, Rng& rng) {
  if (spec.num_eds < 1) throw std::invalid_argument("non_iid_split: num_eds < 1");
  if (static_cast<int>(spec.designated_classes.size()) > spec.num_eds) {
    throw std::invalid_argument("non_iid_split: more designated classes than EDs");
  }
  const auto n_eds = static_cast<std::size_t>(spec.num_eds);
  std::vector<std::vector<Eigen::Index>> members(n_eds);
  for (Eigen::Index i = 0; i < pool.size(); ++i) {
    const int label = pool.y[static_cast<std::size_t>(i)];
    std::size_t owner = uniform_index(rng, n_eds);
    for (std::size_t k = 0; k < spec.designated_classes.size(); ++k) {
      if (spec.designated_classes[k] != label) continue;
      if (uniform01(rng) < spec.concentration || n_eds == 1) {
        owner = k;
      } else {
        owner = uniform_index(rng, n_eds - 1);
        if (owner >= k) ++owner;
      }
    }
    members[owner].push_back(i);
  }
  std::vector<Dataset> out;
  out.reserve(n_eds);
  for (auto& m : members) {
    shuffle_in_place(m, rng);
    out.push_back(pool.subset(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// IDX format (big-endian): magic 0x00000803 for u8 images [n][rows][cols],
// 0x00000801 for u8 labels [n].

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

namespace detail {

inline std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw Error("idx: truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("idx: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != kIdxImagesMagic) throw Error("idx: bad image magic " + std::to_string(magic));
  IdxImages img;
  img.count = detail::read_be32(bytes, 4);
  img.rows = detail::read_be32(bytes, 8);
  img.cols = detail::read_be32(bytes, 12);
  const std::size_t n = std::size_t{img.count} * img.rows * img.cols;
  if (bytes.size() - 16 < n) throw Error("idx: truncated image payload");
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  return img;
}

inline std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != kIdxLabelsMagic) throw Error("idx: bad label magic " + std::to_string(magic));
  const std::uint32_t count = detail::read_be32(bytes, 4);
  if (bytes.size() - 8 < count) throw Error("idx: truncated label payload");
  return {bytes.begin() + 8, bytes.begin() + 8 + count};
}

// Pixels scaled to [0, 1].
inline Dataset idx_to_dataset(const IdxImages& images, std::span<const std::uint8_t> labels) {
  if (labels.size() != images.count) throw Error("idx: image/label count mismatch");
  const auto dim = static_cast<Eigen::Index>(images.rows * images.cols);
  Dataset d;
  d.x.resize(dim, static_cast<Eigen::Index>(images.count));
  d.y.resize(images.count);
  for (std::uint32_t i = 0; i < images.count; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      d.x(k, i) = images.pixels[std::size_t{i} * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] / 255.0;
    }
    d.y[i] = labels[i];
  }
  return d;
}

inline Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto img_bytes = detail::read_file(images_path);
  const auto lbl_bytes = detail::read_file(labels_path);
  return idx_to_dataset(parse_idx_images(img_bytes), parse_idx_labels(lbl_bytes));
}

// Reads train-images-idx3-ubyte / train-labels-idx1-ubyte from `dir`, keeping
// the first `limit` samples (0 = all).
inline Dataset load_mnist_train(const std::filesystem::path& dir, int limit = 0) {
  Dataset d = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  if (limit > 0 && limit < d.size()) {
    d.x.conservativeResize(Eigen::NoChange, limit);
    d.y.resize(static_cast<std::size_t>(limit));
  }
  return d;
}

}  // namespace goalrba
