#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rankr/binary_io.hpp"
#include "rankr/cp.hpp"
#include "rankr/rng.hpp"
#include "rankr/tensor.hpp"

namespace rankr {

/// Hyperspectral image: a height x width grid of pixels, each carrying a
/// full spectrum, plus a ground-truth grid where 0 marks unlabeled pixels
/// and 1..classes name the class.
struct HsiCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::size_t classes = 0;
  std::vector<float> values;        // (row * width + col) * bands + band
  std::vector<std::int32_t> labels; // row * width + col

  float value(std::size_t row, std::size_t col, std::size_t band) const {
    return values[(row * width + col) * bands + band];
  }
  float& value(std::size_t row, std::size_t col, std::size_t band) {
    return values[(row * width + col) * bands + band];
  }
  std::int32_t label(std::size_t row, std::size_t col) const {
    return labels[row * width + col];
  }

  void validate() const {
    if (height == 0 || width == 0 || bands == 0) {
      throw std::runtime_error("cube: zero height, width, or band count");
    }
    if (classes == 0) throw std::runtime_error("cube: zero class count");
    if (values.size() != height * width * bands) {
      throw std::runtime_error("cube: value count does not match declared shape");
    }
    if (labels.size() != height * width) {
      throw std::runtime_error("cube: label count does not match declared shape");
    }
    for (std::int32_t l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) > classes) {
        throw std::runtime_error("cube: label outside 0..classes");
      }
    }
  }
};

/// Labeled training samples. `labels[i]` holds the class index of sample i,
/// i.e. the position of the single 1 in its one-hot target vector.
struct LabeledPatchSet {
  std::vector<DenseTensor> patches;
  std::vector<std::size_t> labels;
  std::size_t classes = 0;

  std::size_t size() const { return patches.size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t l : labels) ++counts[l];
    return counts;
  }

  std::vector<double> one_hot(std::size_t i) const {
    std::vector<double> t(classes, 0.0);
    t[labels[i]] = 1.0;
    return t;
  }
};

namespace detail {

inline std::map<std::string, std::string> read_header_lines(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("header: malformed line (expected key=value): " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline const std::string& header_field(const std::map<std::string, std::string>& kv,
                                       const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("header: missing field " + key);
  return it->second;
}

inline std::size_t header_uint(const std::map<std::string, std::string>& kv,
                               const std::string& key) {
  const std::string& s = header_field(kv, key);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("header: field " + key + " is not an integer: " + s);
  }
  if (pos != s.size()) {
    throw std::runtime_error("header: field " + key + " is not an integer: " + s);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Writes a cube as a textual header plus two little-endian binary blobs
/// (values: 32-bit floats band-fastest; labels: 32-bit ints row-major). The
/// blob files sit next to the header and are named in it.
inline void save_cube(const HsiCube& cube, const std::string& path) {
  cube.validate();
  const std::filesystem::path header_path(path);
  const std::string values_name = header_path.filename().string() + ".values";
  const std::string labels_name = header_path.filename().string() + ".labels";

  std::ofstream header(path);
  if (!header) throw std::runtime_error("cannot open for writing: " + path);
  header << "height=" << cube.height << "\n";
  header << "width=" << cube.width << "\n";
  header << "bands=" << cube.bands << "\n";
  header << "classes=" << cube.classes << "\n";
  header << "element_type=f32\n";
  header << "byte_order=little\n";
  header << "values_file=" << values_name << "\n";
  header << "labels_file=" << labels_name << "\n";
  if (!header.flush()) throw std::runtime_error("write failed: " + path);

  const std::filesystem::path dir = header_path.parent_path();
  std::ofstream values((dir / values_name).string(), std::ios::binary);
  if (!values) throw std::runtime_error("cannot open for writing: " + (dir / values_name).string());
  for (float v : cube.values) write_f32_le(values, v);
  if (!values.flush()) throw std::runtime_error("write failed: " + (dir / values_name).string());

  std::ofstream labels((dir / labels_name).string(), std::ios::binary);
  if (!labels) throw std::runtime_error("cannot open for writing: " + (dir / labels_name).string());
  for (std::int32_t l : cube.labels) write_i32_le(labels, l);
  if (!labels.flush()) throw std::runtime_error("write failed: " + (dir / labels_name).string());
}

inline HsiCube load_cube(const std::string& path) {
  std::ifstream header(path);
  if (!header) throw std::runtime_error("cannot open: " + path);
  const auto kv = detail::read_header_lines(header);

  HsiCube cube;
  cube.height = detail::header_uint(kv, "height");
  cube.width = detail::header_uint(kv, "width");
  cube.bands = detail::header_uint(kv, "bands");
  cube.classes = detail::header_uint(kv, "classes");
  if (detail::header_field(kv, "element_type") != "f32") {
    throw std::runtime_error("cube: unsupported element_type " +
                             detail::header_field(kv, "element_type"));
  }
  if (detail::header_field(kv, "byte_order") != "little") {
    throw std::runtime_error("cube: unsupported byte_order " +
                             detail::header_field(kv, "byte_order"));
  }
  if (cube.height == 0 || cube.width == 0 || cube.bands == 0) {
    throw std::runtime_error("cube: zero height, width, or band count");
  }

  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  const std::string values_path = (dir / detail::header_field(kv, "values_file")).string();
  const std::string labels_path = (dir / detail::header_field(kv, "labels_file")).string();

  std::ifstream values(values_path, std::ios::binary);
  if (!values) throw std::runtime_error("cannot open: " + values_path);
  const std::size_t value_count = cube.height * cube.width * cube.bands;
  cube.values.resize(value_count);
  for (std::size_t i = 0; i < value_count; ++i) cube.values[i] = read_f32_le(values);
  if (values.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("cube: values blob larger than header declares");
  }

  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw std::runtime_error("cannot open: " + labels_path);
  cube.labels.resize(cube.height * cube.width);
  for (std::size_t i = 0; i < cube.labels.size(); ++i) cube.labels[i] = read_i32_le(labels);
  if (labels.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("cube: labels blob larger than header declares");
  }

  cube.validate();
  return cube;
}

namespace detail {

/// Reflects an out-of-range coordinate back into [0, extent) without
/// duplicating the edge sample; requires |overshoot| <= extent - 1.
inline std::size_t mirror_index(std::ptrdiff_t pos, std::size_t extent) {
  if (pos < 0) pos = -pos;
  const auto e = static_cast<std::ptrdiff_t>(extent);
  if (pos >= e) pos = 2 * e - 2 - pos;
  return static_cast<std::size_t>(pos);
}

}  // namespace detail

/// Cuts an s x s x bands patch around every labeled pixel; the patch label is
/// the center pixel's class (shifted to 0-based). Borders mirror inward.
inline LabeledPatchSet extract_patches(const HsiCube& cube, std::size_t s) {
  cube.validate();
  if (s == 0 || s % 2 == 0) {
    throw std::invalid_argument("extract_patches: patch side must be odd and positive");
  }
  if (s > std::min(cube.height, cube.width)) {
    throw std::invalid_argument("extract_patches: patch side exceeds spatial extent");
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(s) / 2;

  LabeledPatchSet set;
  set.classes = cube.classes;
  for (std::size_t row = 0; row < cube.height; ++row) {
    for (std::size_t col = 0; col < cube.width; ++col) {
      const std::int32_t label = cube.label(row, col);
      if (label == 0) continue;
      DenseTensor patch(std::vector<std::size_t>{s, s, cube.bands});
      std::size_t flat = 0;
      // Flat order of (i1, i2, i3) with i1 fastest: band outermost.
      for (std::size_t band = 0; band < cube.bands; ++band) {
        for (std::size_t pc = 0; pc < s; ++pc) {
          const std::size_t src_col = detail::mirror_index(
              static_cast<std::ptrdiff_t>(col) - half + static_cast<std::ptrdiff_t>(pc),
              cube.width);
          for (std::size_t pr = 0; pr < s; ++pr) {
            const std::size_t src_row = detail::mirror_index(
                static_cast<std::ptrdiff_t>(row) - half + static_cast<std::ptrdiff_t>(pr),
                cube.height);
            patch[flat++] = static_cast<double>(cube.value(src_row, src_col, band));
          }
        }
      }
      set.patches.push_back(std::move(patch));
      set.labels.push_back(static_cast<std::size_t>(label) - 1);
    }
  }
  return set;
}

/// Per-class split: classes with more than `alpha` samples contribute
/// exactly `alpha` to training, smaller classes contribute half (floored);
/// everything else goes to test. The shuffle is seeded and per class.
inline std::pair<LabeledPatchSet, LabeledPatchSet> split_per_class(
    const LabeledPatchSet& set, std::size_t alpha, std::uint64_t seed) {
  if (alpha == 0) throw std::invalid_argument("split_per_class: alpha must be at least 1");

  std::vector<std::vector<std::size_t>> by_class(set.classes);
  for (std::size_t i = 0; i < set.size(); ++i) by_class[set.labels[i]].push_back(i);

  LabeledPatchSet train;
  LabeledPatchSet test;
  train.classes = test.classes = set.classes;
  Rng rng(seed);
  for (std::size_t c = 0; c < set.classes; ++c) {
    std::vector<std::size_t>& members = by_class[c];
    rng.shuffle(members);
    const std::size_t take = members.size() > alpha ? alpha : members.size() / 2;
    for (std::size_t j = 0; j < members.size(); ++j) {
      LabeledPatchSet& dst = j < take ? train : test;
      dst.patches.push_back(set.patches[members[j]]);
      dst.labels.push_back(set.labels[members[j]]);
    }
  }
  return {std::move(train), std::move(test)};
}

/// Per-band population standard deviations over every entry of every patch;
/// the band is the last tensor mode.
inline std::vector<double> band_stddevs(const LabeledPatchSet& set) {
  if (set.patches.empty()) return {};
  const std::vector<std::size_t>& shape = set.patches.front().shape();
  const std::size_t bands = shape.back();
  const std::size_t per_band = DenseTensor::element_count(shape) / bands;

  std::vector<double> sum(bands, 0.0);
  std::vector<double> sumsq(bands, 0.0);
  for (const DenseTensor& p : set.patches) {
    std::size_t flat = 0;
    // Last mode varies slowest, so the flat array is band-contiguous.
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t i = 0; i < per_band; ++i, ++flat) {
        sum[b] += p[flat];
        sumsq[b] += p[flat] * p[flat];
      }
    }
  }
  const double n = static_cast<double>(per_band * set.patches.size());
  std::vector<double> sd(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double mean = sum[b] / n;
    sd[b] = std::sqrt(std::max(0.0, sumsq[b] / n - mean * mean));
  }
  return sd;
}

/// Adds zero-mean Gaussian noise with per-band standard deviation
/// level * sd(band of the clean set). Labels and shapes pass through;
/// level = 0 returns the input unchanged.
inline LabeledPatchSet add_noise(const LabeledPatchSet& set, double level,
                                 std::uint64_t seed) {
  if (level < 0.0 || !std::isfinite(level)) {
    throw std::invalid_argument("add_noise: level must be a nonnegative real");
  }
  LabeledPatchSet out = set;
  if (level == 0.0 || set.patches.empty()) return out;

  const std::vector<double> sd = band_stddevs(set);
  const std::vector<std::size_t>& shape = set.patches.front().shape();
  const std::size_t bands = shape.back();
  const std::size_t per_band = DenseTensor::element_count(shape) / bands;

  Rng rng(seed);
  for (DenseTensor& p : out.patches) {
    std::size_t flat = 0;
    for (std::size_t b = 0; b < bands; ++b) {
      const double scale = level * sd[b];
      for (std::size_t i = 0; i < per_band; ++i, ++flat) {
        p[flat] += scale * rng.gaussian();
      }
    }
  }
  return out;
}

/// A generated classification task plus the clean per-class signature
/// tensors the samples were built from.
struct SynthTask {
  LabeledPatchSet set;
  std::vector<DenseTensor> signatures;
};

/// Builds a task with one unit-norm rank-1 signature per class, pairwise
/// orthogonal via their last-mode vectors, and samples that are a signature
/// plus entrywise Gaussian noise. Requires the last extent to be >= classes
/// so that the last-mode vectors can be orthonormalized.
inline SynthTask make_synthetic_task(std::uint64_t seed, std::size_t n_per_class,
                                     const std::vector<std::size_t>& shape,
                                     std::size_t classes, double noise_std = 0.1) {
  if (classes < 2) throw std::invalid_argument("make_synthetic_task: need at least two classes");
  if (shape.size() < 2) throw std::invalid_argument("make_synthetic_task: order must be at least 2");
  for (std::size_t p : shape) {
    if (p == 0) throw std::invalid_argument("make_synthetic_task: zero extent");
  }
  if (shape.back() < classes) {
    throw std::invalid_argument("make_synthetic_task: last extent must be >= classes");
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("make_synthetic_task: noise_std must be nonnegative");
  }

  Rng rng(seed);
  const std::size_t d_count = shape.size();
  const std::size_t last = d_count - 1;

  // Last-mode vectors: Gram-Schmidt over Gaussian draws, one per class.
  std::vector<std::vector<double>> last_vecs;
  while (last_vecs.size() < classes) {
    std::vector<double> v(shape[last]);
    for (double& x : v) x = rng.gaussian();
    for (const auto& u : last_vecs) {
      double dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += u[i] * v[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;  // retry on near-degenerate draw
    for (double& x : v) x /= norm;
    last_vecs.push_back(std::move(v));
  }

  SynthTask task;
  task.set.classes = classes;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<Matrix> factors;
    for (std::size_t d = 0; d < d_count; ++d) {
      Matrix f(shape[d], 1);
      if (d == last) {
        for (std::size_t i = 0; i < shape[d]; ++i) f(i, 0) = last_vecs[c][i];
      } else {
        double norm = 0.0;
        for (std::size_t i = 0; i < shape[d]; ++i) {
          f(i, 0) = rng.gaussian();
          norm += f(i, 0) * f(i, 0);
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (std::size_t i = 0; i < shape[d]; ++i) f(i, 0) /= norm;
      }
      factors.push_back(std::move(f));
    }
    task.signatures.push_back(cp_reconstruct(CpFactors(std::move(factors))));
  }

  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      DenseTensor x = task.signatures[c];
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += noise_std * rng.gaussian();
      task.set.patches.push_back(std::move(x));
      task.set.labels.push_back(c);
    }
  }
  return task;
}

/// Small fully labeled demo cube: classes form horizontal stripes, each with
/// its own random spectrum plus mild noise. Values pass through 32-bit
/// precision, matching the storage format.
inline HsiCube make_synthetic_cube(std::uint64_t seed, std::size_t height,
                                   std::size_t width, std::size_t bands,
                                   std::size_t classes) {
  if (height == 0 || width == 0 || bands == 0) {
    throw std::invalid_argument("make_synthetic_cube: zero extent");
  }
  if (classes == 0 || classes > height) {
    throw std::invalid_argument("make_synthetic_cube: class count must be in 1..height");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> spectra(classes, std::vector<double>(bands));
  for (auto& s : spectra) {
    for (double& x : s) x = rng.uniform(0.2, 1.0);
  }
  HsiCube cube;
  cube.height = height;
  cube.width = width;
  cube.bands = bands;
  cube.classes = classes;
  cube.values.resize(height * width * bands);
  cube.labels.resize(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t c_idx = r * classes / height;
    for (std::size_t c = 0; c < width; ++c) {
      cube.labels[r * width + c] = static_cast<std::int32_t>(c_idx + 1);
      for (std::size_t b = 0; b < bands; ++b) {
        cube.value(r, c, b) =
            static_cast<float>(spectra[c_idx][b] + 0.05 * rng.gaussian());
      }
    }
  }
  return cube;
}

}  // namespace rankr
