#pragma once

// MNIST IDX ingestion and baseline-exemplar preparation.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/volley.hpp"

namespace tnn {

class IdxError : public Error {
 public:
  enum class Kind { io, bad_magic, truncated, count_mismatch };

  IdxError(Kind kind, const std::string& message, std::size_t offset = 0)
      : Error(code_for(kind), message), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  /// Byte offset at which a truncated file ran out.
  std::size_t offset() const noexcept { return offset_; }

 private:
  static std::string code_for(Kind k) {
    switch (k) {
      case Kind::io: return "idx_io";
      case Kind::bad_magic: return "idx_bad_magic";
      case Kind::truncated: return "idx_truncated";
      case Kind::count_mismatch: return "idx_count_mismatch";
    }
    return "idx";
  }
  Kind kind_;
  std::size_t offset_;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, 0..255

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct MnistRecord {
  GrayImage image;
  int label = 0;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxError::Kind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class IdxReader {
 public:
  IdxReader(std::vector<std::uint8_t> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) | std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  const std::uint8_t* take(std::size_t n) {
    need(n);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  void expect_magic(std::uint32_t magic) {
    const std::uint32_t got = u32();
    if (got != magic)
      throw IdxError(IdxError::Kind::bad_magic,
                     name_ + ": bad IDX magic 0x" + hex(got) + ", expected 0x" + hex(magic), 0);
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw IdxError(IdxError::Kind::truncated,
                     name_ + ": truncated at byte offset " + std::to_string(bytes_.size()) + " (needed " +
                         std::to_string(pos_ + n) + ")",
                     bytes_.size());
  }
  static std::string hex(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
  }

  std::vector<std::uint8_t> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Reads an IDX image file (magic 0x803) and its label file (magic 0x801).
inline std::vector<MnistRecord> load_mnist_idx(const std::filesystem::path& images_path,
                                               const std::filesystem::path& labels_path) {
  detail::IdxReader images(detail::read_file(images_path), images_path.filename().string());
  detail::IdxReader labels(detail::read_file(labels_path), labels_path.filename().string());

  images.expect_magic(kIdxImagesMagic);
  const std::uint32_t n_images = images.u32();
  const std::uint32_t rows = images.u32();
  const std::uint32_t cols = images.u32();
  labels.expect_magic(kIdxLabelsMagic);
  const std::uint32_t n_labels = labels.u32();
  if (n_images != n_labels)
    throw IdxError(IdxError::Kind::count_mismatch,
                   "image file holds " + std::to_string(n_images) + " records, label file " +
                       std::to_string(n_labels));

  const std::size_t image_size = static_cast<std::size_t>(rows) * cols;
  std::vector<MnistRecord> out;
  out.reserve(n_images);
  for (std::uint32_t k = 0; k < n_images; ++k) {
    MnistRecord r;
    r.image.width = static_cast<int>(cols);
    r.image.height = static_cast<int>(rows);
    const std::uint8_t* px = images.take(image_size);
    r.image.pixels.assign(px, px + image_size);
    r.label = *labels.take(1);
    out.push_back(std::move(r));
  }
  return out;
}

/// Writes records in IDX format (images and labels files).
inline void write_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                            const std::vector<MnistRecord>& records) {
  auto put32 = [](std::ofstream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    os.write(b, 4);
  };
  std::ofstream im(images_path, std::ios::binary), lb(labels_path, std::ios::binary);
  if (!im || !lb) throw IdxError(IdxError::Kind::io, "cannot create IDX output files");
  const int h = records.empty() ? 28 : records.front().image.height;
  const int w = records.empty() ? 28 : records.front().image.width;
  put32(im, kIdxImagesMagic);
  put32(im, static_cast<std::uint32_t>(records.size()));
  put32(im, static_cast<std::uint32_t>(h));
  put32(im, static_cast<std::uint32_t>(w));
  put32(lb, kIdxLabelsMagic);
  put32(lb, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    im.write(reinterpret_cast<const char*>(r.image.pixels.data()), static_cast<std::streamsize>(r.image.pixels.size()));
    const char l = static_cast<char>(r.label);
    lb.write(&l, 1);
  }
}

/// The rf x rf window at offset floor((size - rf) / 2) in both axes.
inline GrayImage crop_center(const GrayImage& img, int rf) {
  if (rf < 1 || rf > img.width || rf > img.height)
    throw InvalidArgument("receptive field " + std::to_string(rf) + " does not fit a " +
                          std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
  const int r0 = (img.height - rf) / 2;
  const int c0 = (img.width - rf) / 2;
  GrayImage out{rf, rf, std::vector<std::uint8_t>(static_cast<std::size_t>(rf) * rf)};
  for (int r = 0; r < rf; ++r)
    for (int c = 0; c < rf; ++c) out.pixels[static_cast<std::size_t>(r) * rf + c] = img.at(r0 + r, c0 + c);
  return out;
}

inline constexpr int kDefaultBinarizeThreshold = 128;

/// pixel >= threshold -> 1.
inline BinaryImage binarize_pixels(const GrayImage& img, int threshold = kDefaultBinarizeThreshold) {
  BinaryImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = img.pixels[i] >= threshold ? 1 : 0;
  return out;
}

/// How a per-digit exemplar number is resolved against the record list.
enum class ExemplarIndexing {
  class_occurrence_0,  ///< n-th record with that label, 0-based
  class_occurrence_1,  ///< n-th record with that label, 1-based
  global_0,            ///< record n of the file, 0-based
  global_1,            ///< record n of the file, 1-based
};

/// Exemplar numbers of the ten baseline numerals, digits 0..9.
inline constexpr std::array<int, 10> kDefaultExemplars = {157, 9, 17, 51, 151, 220, 63, 423, 344, 163};

/// Ten binary exemplars indexed by digit, all rf x rf.
struct BaselineSet {
  std::array<BinaryImage, 10> images;
  int rf = 0;
};

inline BaselineSet select_baselines(const std::vector<MnistRecord>& records,
                                    const std::array<int, 10>& exemplars = kDefaultExemplars, int rf = 8,
                                    int threshold = kDefaultBinarizeThreshold,
                                    ExemplarIndexing indexing = ExemplarIndexing::class_occurrence_0) {
  BaselineSet set;
  set.rf = rf;
  for (int digit = 0; digit < 10; ++digit) {
    const int n = exemplars[static_cast<std::size_t>(digit)];
    const bool one_based = indexing == ExemplarIndexing::class_occurrence_1 || indexing == ExemplarIndexing::global_1;
    const long wanted = static_cast<long>(n) - (one_based ? 1 : 0);
    const MnistRecord* found = nullptr;
    if (wanted >= 0) {
      if (indexing == ExemplarIndexing::global_0 || indexing == ExemplarIndexing::global_1) {
        if (static_cast<std::size_t>(wanted) < records.size()) found = &records[static_cast<std::size_t>(wanted)];
      } else {
        long seen = 0;
        for (const auto& r : records) {
          if (r.label != digit) continue;
          if (seen++ == wanted) {
            found = &r;
            break;
          }
        }
      }
    }
    if (!found)
      throw InvalidArgument("exemplar " + std::to_string(digit) + ":" + std::to_string(n) +
                            " is out of range for the loaded records");
    set.images[static_cast<std::size_t>(digit)] = binarize_pixels(crop_center(found->image, rf), threshold);
  }
  return set;
}

/// Ten procedurally drawn seven-segment numerals, for running without MNIST.
inline BaselineSet synthetic_baselines(int rf = 8) {
  if (rf < 5) throw InvalidArgument("synthetic glyphs need rf >= 5");
  // Segments: a top, b upper right, c lower right, d bottom, e lower left, f upper left, g middle.
  static constexpr std::array<const char*, 10> kSegments = {"abcdef", "bc",   "abged", "abgcd",  "fgbc",
                                                            "afgcd",  "afgedc", "abc", "abcdefg", "abcdfg"};
  const int thick = std::max(1, rf / 8);
  const int top = 1, bottom = rf - 1 - thick, mid = (rf - thick) / 2;
  const int left = 1, right = rf - 1 - thick;
  BaselineSet set;
  set.rf = rf;
  for (int d = 0; d < 10; ++d) {
    BinaryImage img(rf, rf);
    auto hbar = [&](int row) {
      for (int r = row; r < row + thick; ++r)
        for (int c = left; c < right + thick; ++c) img.at(r, c) = 1;
    };
    auto vbar = [&](int col, int r_from, int r_to) {
      for (int r = r_from; r < r_to + thick; ++r)
        for (int c = col; c < col + thick; ++c) img.at(r, c) = 1;
    };
    for (const char* s = kSegments[static_cast<std::size_t>(d)]; *s; ++s) {
      switch (*s) {
        case 'a': hbar(top); break;
        case 'd': hbar(bottom); break;
        case 'g': hbar(mid); break;
        case 'b': vbar(right, top, mid); break;
        case 'c': vbar(right, mid, bottom); break;
        case 'e': vbar(left, mid, bottom); break;
        case 'f': vbar(left, top, mid); break;
        default: break;
      }
    }
    set.images[static_cast<std::size_t>(d)] = std::move(img);
  }
  return set;
}

}  // namespace tnn
