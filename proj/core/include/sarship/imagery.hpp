#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace sarship {

// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  // Throws DimensionError if pixels.size() != width * height.
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, std::uint8_t value) {
    pixels_[static_cast<std::size_t>(row) * width_ + col] = value;
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Gray-level probabilities p_i for i in [0, 255].
struct Histogram {
  std::array<double, 256> p{};
};

// Row-major real grid; carrier for attention maps and score maps.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(int height, int width, double fill = 0.0);
  RealGrid(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& at(int row, int col) {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool operator==(const RealGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// Binary sea/land partition. Cells are kSea (1) or kLand (0).
class SeaLandMask {
 public:
  static constexpr std::uint8_t kLand = 0;
  static constexpr std::uint8_t kSea = 1;

  SeaLandMask() = default;
  SeaLandMask(int height, int width, std::uint8_t fill = kSea);
  // Throws DimensionError on size mismatch, FormatError on non-binary cells.
  SeaLandMask(int height, int width, std::vector<std::uint8_t> cells);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t at(int row, int col) const {
    return cells_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, std::uint8_t value) {
    cells_[static_cast<std::size_t>(row) * width_ + col] = value;
  }
  bool is_land(int row, int col) const { return at(row, col) == kLand; }

  std::span<const std::uint8_t> cells() const { return cells_; }

  std::size_t land_count() const;
  SeaLandMask complement() const;

  bool operator==(const SeaLandMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Axis-aligned pixel box; (x, y) is the top-left corner.
struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  int center_x() const { return x + w / 2; }
  int center_y() const { return y + h / 2; }

  bool operator==(const Box&) const = default;
};

enum class SceneLabel { offshore, inshore };

std::string_view to_string(SceneLabel label);
// Throws FormatError on anything but "inshore" / "offshore".
SceneLabel parse_scene_label(std::string_view text);

// Reads 8-bit PGM (P5) or 8-bit grayscale PNG.
GrayImage load_image(const std::filesystem::path& path);
void save_image(const GrayImage& img, const std::filesystem::path& path);
// The PGM encoding as bytes, header "P5\n<w> <h>\n255\n" then raw pixels.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

// Land -> 0, sea -> 255.
void save_mask(const SeaLandMask& mask, const std::filesystem::path& path);
SeaLandMask load_mask(const std::filesystem::path& path);
GrayImage mask_to_image(const SeaLandMask& mask);
// Inverse of mask_to_image; any byte other than 0 or 255 is a FormatError.
SeaLandMask image_to_mask(const GrayImage& img);

// p_i = count(pixels == i) / size. Throws EmptyImageError on zero pixels.
Histogram histogram(const GrayImage& img);

// output(r, c) = input(floor(r * in_h / out_h), floor(c * in_w / out_w)).
RealGrid resize_nearest(const RealGrid& grid, int out_h, int out_w);
SeaLandMask resize_nearest(const SeaLandMask& mask, int out_h, int out_w);

// Writes bytes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace sarship
