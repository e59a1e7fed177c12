#include "sarship/imagery.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "sarship/errors.hpp"

namespace sarship {

namespace fs = std::filesystem;

namespace {

std::size_t checked_area(int a, int b) {
  if (a < 0 || b < 0) {
    throw DimensionError("negative grid extent");
  }
  return static_cast<std::size_t>(a) * static_cast<std::size_t>(b);
}

// Source index for nearest-neighbour resampling along one axis.
int nearest_source(int out_index, int in_extent, int out_extent) {
  return static_cast<int>(static_cast<long long>(out_index) * in_extent / out_extent);
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_png_signature(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= kSig.size() && std::equal(kSig.begin(), kSig.end(), bytes.begin());
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("bad PNG: " + msg);
  }
  // Only 8-bit single-channel images are accepted; no palettes, alpha, or 16-bit.
  if (image.format != PNG_FORMAT_GRAY) {
    png_image_free(&image);
    throw FormatError("PNG is not 8-bit grayscale");
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<std::uint8_t> pixels(checked_area(w, h));
  if (png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("bad PNG payload: " + msg);
  }
  return GrayImage(w, h, std::move(pixels));
}

// Cursor over PGM header tokens; '#' comments run to end of line.
class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    const auto* first = reinterpret_cast<const char*>(bytes_.data() + pos_);
    const auto* last = reinterpret_cast<const char*>(bytes_.data() + bytes_.size());
    int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) {
      throw FormatError("malformed PGM header");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw FormatError("malformed PGM header");
    }
    return pos_ + 1;
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(checked_area(width, height), fill) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != checked_area(width, height)) {
    throw DimensionError("pixel count does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

RealGrid::RealGrid(int height, int width, double fill)
    : height_(height), width_(width), values_(checked_area(height, width), fill) {}

RealGrid::RealGrid(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != checked_area(height, width)) {
    throw DimensionError("grid value count does not match its extents");
  }
}

SeaLandMask::SeaLandMask(int height, int width, std::uint8_t fill)
    : height_(height), width_(width), cells_(checked_area(height, width), fill) {
  if (fill != kSea && fill != kLand) {
    throw FormatError("mask cells must be 0 or 1");
  }
}

SeaLandMask::SeaLandMask(int height, int width, std::vector<std::uint8_t> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
  if (cells_.size() != checked_area(height, width)) {
    throw DimensionError("mask cell count does not match its extents");
  }
  if (std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c > 1; })) {
    throw FormatError("mask cells must be 0 or 1");
  }
}

std::size_t SeaLandMask::land_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kLand));
}

SeaLandMask SeaLandMask::complement() const {
  SeaLandMask out = *this;
  for (auto& c : out.cells_) c = c == kSea ? kLand : kSea;
  return out;
}

std::string_view to_string(SceneLabel label) {
  return label == SceneLabel::inshore ? "inshore" : "offshore";
}

SceneLabel parse_scene_label(std::string_view text) {
  if (text == "inshore") return SceneLabel::inshore;
  if (text == "offshore") return SceneLabel::offshore;
  throw FormatError("unknown scene label '" + std::string(text) + "'");
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (P5)");
  }
  PgmHeaderReader header(bytes);
  const int w = header.next_int();
  const int h = header.next_int();
  const int maxval = header.next_int();
  if (w < 1 || h < 1) {
    throw FormatError("PGM dimensions must be positive");
  }
  if (maxval < 1 || maxval > 255) {
    throw FormatError("only 8-bit PGM is supported");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t n = checked_area(w, h);
  if (bytes.size() - offset < n) {
    throw FormatError("truncated PGM payload");
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  if (std::any_of(pixels.begin(), pixels.end(), [maxval](std::uint8_t v) { return v > maxval; })) {
    throw FormatError("PGM pixel exceeds maxval");
  }
  return GrayImage(w, h, std::move(pixels));
}

GrayImage load_image(const fs::path& path) {
  const auto bytes = read_all(path);
  if (has_png_signature(bytes)) {
    return decode_png(bytes);
  }
  return decode_pgm(bytes);
}

void save_image(const GrayImage& img, const fs::path& path) {
  write_file_atomic(path, encode_pgm(img));
}

GrayImage mask_to_image(const SeaLandMask& mask) {
  std::vector<std::uint8_t> pixels(mask.cells().begin(), mask.cells().end());
  for (auto& p : pixels) p = p == SeaLandMask::kSea ? 255 : 0;
  return GrayImage(mask.width(), mask.height(), std::move(pixels));
}

SeaLandMask image_to_mask(const GrayImage& img) {
  std::vector<std::uint8_t> cells(img.pixels().begin(), img.pixels().end());
  for (auto& c : cells) {
    if (c != 0 && c != 255) {
      throw FormatError("mask image must contain only 0 and 255");
    }
    c = c == 255 ? SeaLandMask::kSea : SeaLandMask::kLand;
  }
  return SeaLandMask(img.height(), img.width(), std::move(cells));
}

void save_mask(const SeaLandMask& mask, const fs::path& path) {
  save_image(mask_to_image(mask), path);
}

SeaLandMask load_mask(const fs::path& path) { return image_to_mask(load_image(path)); }

Histogram histogram(const GrayImage& img) {
  if (img.empty()) {
    throw EmptyImageError("histogram of an empty image");
  }
  std::array<std::size_t, 256> counts{};
  for (auto v : img.pixels()) ++counts[v];
  Histogram h;
  const auto total = static_cast<double>(img.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    h.p[i] = static_cast<double>(counts[i]) / total;
  }
  return h;
}

RealGrid resize_nearest(const RealGrid& grid, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw DimensionError("resize target must be at least 1x1");
  }
  if (grid.size() == 0) {
    throw DimensionError("cannot resize an empty grid");
  }
  RealGrid out(out_h, out_w);
  for (int r = 0; r < out_h; ++r) {
    const int sr = nearest_source(r, grid.height(), out_h);
    for (int c = 0; c < out_w; ++c) {
      out.at(r, c) = grid.at(sr, nearest_source(c, grid.width(), out_w));
    }
  }
  return out;
}

SeaLandMask resize_nearest(const SeaLandMask& mask, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw DimensionError("resize target must be at least 1x1");
  }
  if (mask.size() == 0) {
    throw DimensionError("cannot resize an empty mask");
  }
  SeaLandMask out(out_h, out_w);
  for (int r = 0; r < out_h; ++r) {
    const int sr = nearest_source(r, mask.height(), out_h);
    for (int c = 0; c < out_w; ++c) {
      out.set(r, c, mask.at(sr, nearest_source(c, mask.width(), out_w)));
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("short write to " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace sarship
