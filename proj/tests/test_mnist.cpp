#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tnn/mnist.hpp"

using namespace tnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tnn_mnist_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

GrayImage ramp_image(int w, int h) {
  GrayImage g{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) g.pixels[static_cast<std::size_t>(r) * w + c] = static_cast<std::uint8_t>(r * 28 + c);
  return g;
}

std::vector<MnistRecord> tiny_records() {
  std::vector<MnistRecord> rs;
  for (int k = 0; k < 30; ++k) {
    MnistRecord r{GrayImage{28, 28, std::vector<std::uint8_t>(784, static_cast<std::uint8_t>(k * 8))}, k % 10};
    rs.push_back(r);
  }
  return rs;
}

void truncate_file(const fs::path& p, std::uintmax_t size) { fs::resize_file(p, size); }

}  // namespace

TEST(Idx, RoundTrip) {
  TempDir t;
  const auto rs = tiny_records();
  write_mnist_idx(t.path / "i", t.path / "l", rs);
  const auto back = load_mnist_idx(t.path / "i", t.path / "l");
  ASSERT_EQ(back.size(), rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) {
    EXPECT_EQ(back[k].label, rs[k].label);
    EXPECT_EQ(back[k].image.pixels, rs[k].image.pixels);
    EXPECT_EQ(back[k].image.width, 28);
  }
}

TEST(Idx, SwappedPathsGiveMagicError) {
  TempDir t;
  write_mnist_idx(t.path / "i", t.path / "l", tiny_records());
  try {
    load_mnist_idx(t.path / "l", t.path / "i");
    FAIL() << "expected an error";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.kind(), IdxError::Kind::bad_magic);
    EXPECT_EQ(e.code(), "idx_bad_magic");
  }
}

TEST(Idx, TruncatedFileNamesOffset) {
  TempDir t;
  write_mnist_idx(t.path / "i", t.path / "l", tiny_records());
  truncate_file(t.path / "i", 16 + 784 * 3 + 100);
  try {
    load_mnist_idx(t.path / "i", t.path / "l");
    FAIL() << "expected an error";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.kind(), IdxError::Kind::truncated);
    EXPECT_EQ(e.offset(), 16u + 784 * 3 + 100);
    EXPECT_NE(std::string(e.what()).find(std::to_string(16 + 784 * 3 + 100)), std::string::npos);
  }
  truncate_file(t.path / "i", 6);
  EXPECT_THROW(load_mnist_idx(t.path / "i", t.path / "l"), IdxError);
}

TEST(Idx, CountMismatch) {
  TempDir t;
  auto rs = tiny_records();
  write_mnist_idx(t.path / "i", t.path / "l", rs);
  rs.pop_back();
  write_mnist_idx(t.path / "i2", t.path / "l2", rs);
  try {
    load_mnist_idx(t.path / "i", t.path / "l2");
    FAIL() << "expected an error";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.kind(), IdxError::Kind::count_mismatch);
  }
}

TEST(Idx, MissingFile) {
  try {
    load_mnist_idx("/nonexistent/images", "/nonexistent/labels");
    FAIL() << "expected an error";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.kind(), IdxError::Kind::io);
  }
}

TEST(Idx, BundledSubsetHeaderCount) {
  const fs::path dir = TNN_MNIST_DIR;
  if (!fs::exists(dir / "train-images-idx3-ubyte")) GTEST_SKIP() << "MNIST files not present";
  const auto rs = load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  std::ifstream in(dir / "train-images-idx3-ubyte", std::ios::binary);
  unsigned char h[8];
  in.read(reinterpret_cast<char*>(h), 8);
  const std::size_t declared = (std::size_t{h[4]} << 24) | (std::size_t{h[5]} << 16) | (std::size_t{h[6]} << 8) | h[7];
  EXPECT_EQ(rs.size(), declared);
  EXPECT_EQ(fs::file_size(dir / "train-images-idx3-ubyte"), 16 + 784 * declared);
}

TEST(Crop, CenterOffsets) {
  const auto img = ramp_image(28, 28);
  const auto c8 = crop_center(img, 8);
  EXPECT_EQ(c8.width, 8);
  EXPECT_EQ(c8.at(0, 0), img.at(10, 10));
  EXPECT_EQ(c8.at(7, 7), img.at(17, 17));
  const auto c18 = crop_center(img, 18);
  EXPECT_EQ(c18.at(0, 0), img.at(5, 5));
  EXPECT_EQ(c18.at(17, 17), img.at(22, 22));
  EXPECT_EQ(crop_center(img, 28).pixels, img.pixels);
  EXPECT_THROW(crop_center(img, 29), InvalidArgument);
  EXPECT_THROW(crop_center(img, 0), InvalidArgument);
}

TEST(BinarizePixels, ThresholdConvention) {
  GrayImage z{2, 2, {0, 0, 0, 0}};
  EXPECT_EQ(binarize_pixels(z).pixels, (std::vector<std::uint8_t>{0, 0, 0, 0}));
  GrayImage f{2, 2, {255, 255, 255, 255}};
  EXPECT_EQ(binarize_pixels(f).pixels, (std::vector<std::uint8_t>{1, 1, 1, 1}));
  GrayImage b{3, 1, {127, 128, 129}};
  EXPECT_EQ(binarize_pixels(b).pixels, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_EQ(binarize_pixels(b, 129).pixels, (std::vector<std::uint8_t>{0, 0, 1}));
}

TEST(SelectBaselines, OccurrenceIndexing) {
  auto rs = tiny_records();  // label k%10, brightness k*8: records 0..29
  // Make record 11 (second "1") distinguishable: bright, others of label 1 dark.
  rs[1].image.pixels.assign(784, 0);
  rs[11].image.pixels.assign(784, 200);
  rs[21].image.pixels.assign(784, 0);
  std::array<int, 10> ex{};
  ex[1] = 1;
  const auto s = select_baselines(rs, ex, 8, 128, ExemplarIndexing::class_occurrence_0);
  EXPECT_EQ(s.images[1].pixels, std::vector<std::uint8_t>(64, 1));
  EXPECT_EQ(s.rf, 8);
  ex.fill(1);
  ex[1] = 2;
  const auto s1 = select_baselines(rs, ex, 8, 128, ExemplarIndexing::class_occurrence_1);
  EXPECT_EQ(s1.images[1].pixels, std::vector<std::uint8_t>(64, 1));
  ex[1] = 11;
  const auto g0 = select_baselines(rs, ex, 8, 128, ExemplarIndexing::global_0);
  EXPECT_EQ(g0.images[1].pixels, std::vector<std::uint8_t>(64, 1));
  ex.fill(1);
  ex[1] = 12;
  const auto g1 = select_baselines(rs, ex, 8, 128, ExemplarIndexing::global_1);
  EXPECT_EQ(g1.images[1].pixels, std::vector<std::uint8_t>(64, 1));
}

TEST(SelectBaselines, FirstOccurrenceAndOutOfRange) {
  auto rs = tiny_records();
  std::array<int, 10> ex{};
  const auto s = select_baselines(rs, ex, 8);
  for (int d = 0; d < 10; ++d) {
    const auto v = static_cast<std::uint8_t>(d * 8 >= 128);
    EXPECT_EQ(s.images[static_cast<std::size_t>(d)].pixels, std::vector<std::uint8_t>(64, v));
  }
  ex[0] = 999999;
  EXPECT_THROW(select_baselines(rs, ex), InvalidArgument);
  ex[0] = 0;
  EXPECT_THROW(select_baselines(rs, ex, 8, 128, ExemplarIndexing::class_occurrence_1), InvalidArgument);
}

TEST(SelectBaselines, DefaultExemplarsOnBundledSubset) {
  const fs::path dir = TNN_MNIST_DIR;
  if (!fs::exists(dir / "train-images-idx3-ubyte")) GTEST_SKIP() << "MNIST files not present";
  const auto base = select_baselines(load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"));
  for (int a = 0; a < 10; ++a) {
    const auto& img = base.images[static_cast<std::size_t>(a)];
    EXPECT_EQ(img.width, 8);
    for (int b = a + 1; b < 10; ++b) EXPECT_NE(img, base.images[static_cast<std::size_t>(b)]);
  }
}

TEST(SyntheticBaselines, DistinctGlyphs) {
  for (int rf : {8, 18}) {
    const auto s = synthetic_baselines(rf);
    EXPECT_EQ(s.rf, rf);
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b) EXPECT_NE(s.images[static_cast<std::size_t>(a)], s.images[static_cast<std::size_t>(b)]);
  }
  EXPECT_THROW(synthetic_baselines(4), InvalidArgument);
}
