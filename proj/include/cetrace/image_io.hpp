#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cetrace {

/// Single-channel image; 12/14-bit data lives in 16-bit samples.
class GrayImage {
 public:
  GrayImage() = default;
  /// Throws InputError on a size mismatch or a pixel above 2^bits - 1.
  GrayImage(int width, int height, int bits, std::vector<std::uint16_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bits() const noexcept { return bits_; }
  int top() const noexcept { return (1 << bits_) - 1; }
  std::span<const std::uint16_t> pixels() const noexcept { return pixels_; }
  std::uint16_t at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int bits_ = 8;
  std::vector<std::uint16_t> pixels_;
};

/// Reads binary PGM (P5) or grayscale PNG, chosen by file signature.
/// Bit depth follows the PGM maxval (255, 4095, 16383, 65535) or the PNG
/// sample depth, refined by an sBIT chunk.
GrayImage read_image(const std::filesystem::path& path);

/// Writes PNG when the extension is .png, PGM otherwise.
void write_image(const GrayImage& img, const std::filesystem::path& path);

/// Binary mask as 8-bit PGM with values 0 and 255.
void write_mask(std::span<const std::uint8_t> mask, int width, int height,
                const std::filesystem::path& path);
/// Reads a mask image; any nonzero pixel is foreground.
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& width, int& height);

}  // namespace cetrace
