#include "cetrace/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

int bits_for_maxval(long maxval) {
  switch (maxval) {
    case 255: return 8;
    case 4095: return 12;
    case 16383: return 14;
    case 65535: return 16;
    default: throw FormatError("unsupported PGM maxval " + std::to_string(maxval));
  }
}

bool is_supported_depth(int bits) { return bits == 8 || bits == 12 || bits == 14 || bits == 16; }

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  long number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw IoError("truncated PGM header in " + name_);
    if (!std::isdigit(bytes_[pos_])) throw FormatError("malformed PGM header in " + name_);
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000) throw FormatError("PGM header value too large in " + name_);
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size()) throw IoError("truncated PGM header in " + name_);
    if (!std::isspace(bytes_[pos_])) throw FormatError("malformed PGM header in " + name_);
    return pos_ + 1;
  }

  void skip(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

GrayImage read_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  PgmHeaderReader header(bytes, name);
  header.skip(2);
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (width <= 0 || height <= 0) throw FormatError("PGM dimensions must be positive in " + name);
  const int bits = bits_for_maxval(maxval);
  const std::size_t start = header.raster_start();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t sample = bits == 8 ? 1 : 2;
  if (bytes.size() < start + count * sample) throw IoError("truncated PGM raster in " + name);

  std::vector<std::uint16_t> pixels(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* p = bytes.data() + start + k * sample;
    const unsigned v = sample == 1 ? p[0] : (static_cast<unsigned>(p[0]) << 8) | p[1];
    if (v > static_cast<unsigned>(maxval)) {
      throw FormatError("pixel value " + std::to_string(v) + " exceeds maxval in " + name);
    }
    pixels[k] = static_cast<std::uint16_t>(v);
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), bits, std::move(pixels));
}

struct PngReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadState() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteState() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; messages are stashed here and
// rethrown as exceptions once control is back in C++ frames.
struct PngError {
  std::string message;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  if (err) err->message = msg ? msg : "libpng error";
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  PngError err;
  PngReadState st;
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  if (!st.png) throw IoError("libpng initialization failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw IoError("libpng initialization failed");

  png_uint_32 width = 0, height = 0;
  int depth = 0, color = 0, significant = 0;
  std::vector<std::uint16_t> pixels;
  std::vector<unsigned char> row;
  bool unsupported_color = false;
  if (setjmp(png_jmpbuf(st.png))) {
    throw IoError("cannot decode PNG " + path.string() + ": " + err.message);
  }
  png_init_io(st.png, file.get());
  png_read_info(st.png, st.info);
  png_get_IHDR(st.png, st.info, &width, &height, &depth, &color, nullptr, nullptr, nullptr);
  if (color != PNG_COLOR_TYPE_GRAY) {
    unsupported_color = true;
  } else {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(st.png);
    png_color_8p sbit = nullptr;
    if (depth == 16 && png_get_sBIT(st.png, st.info, &sbit) && sbit) significant = sbit->gray;
    png_read_update_info(st.png, st.info);
    const std::size_t rowbytes = png_get_rowbytes(st.png, st.info);
    row.resize(rowbytes);
    pixels.resize(static_cast<std::size_t>(width) * height);
    for (png_uint_32 y = 0; y < height; ++y) {
      png_read_row(st.png, row.data(), nullptr);
      for (png_uint_32 x = 0; x < width; ++x) {
        pixels[static_cast<std::size_t>(y) * width + x] =
            depth == 16 ? static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]) : row[x];
      }
    }
    png_read_end(st.png, nullptr);
  }
  if (unsupported_color) throw FormatError("only grayscale PNG is supported: " + path.string());

  int bits = depth == 16 ? 16 : 8;
  if (depth == 16 && (significant == 12 || significant == 14)) {
    const int shift = 16 - significant;
    for (auto& p : pixels) {
      if (p & ((1u << shift) - 1)) throw FormatError("PNG sBIT does not match sample data in " + path.string());
      p = static_cast<std::uint16_t>(p >> shift);
    }
    bits = significant;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), bits, std::move(pixels));
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());
  PngError err;
  PngWriteState st;
  st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  if (!st.png) throw IoError("libpng initialization failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw IoError("libpng initialization failed");

  const int depth = img.bits() == 8 ? 8 : 16;
  const int shift = 16 - img.bits();
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * (depth / 8));
  if (setjmp(png_jmpbuf(st.png))) throw IoError("cannot encode PNG " + path.string() + ": " + err.message);
  png_init_io(st.png, file.get());
  png_set_IHDR(st.png, st.info, img.width(), img.height(), depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (depth == 16 && img.bits() != 16) {
    png_color_8 sbit{};
    sbit.gray = static_cast<png_byte>(img.bits());
    png_set_sBIT(st.png, st.info, &sbit);
  }
  png_write_info(st.png, st.info);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const unsigned v = img.at(x, y);
      if (depth == 8) {
        row[x] = static_cast<unsigned char>(v);
      } else {
        const unsigned s = (v << shift) & 0xffffu;
        row[2 * x] = static_cast<unsigned char>(s >> 8);
        row[2 * x + 1] = static_cast<unsigned char>(s & 0xff);
      }
    }
    png_write_row(st.png, row.data());
  }
  png_write_end(st.png, nullptr);
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << '\n' << img.top() << '\n';
  std::vector<unsigned char> raster;
  raster.reserve(img.pixels().size() * (img.bits() == 8 ? 1 : 2));
  for (std::uint16_t v : img.pixels()) {
    if (img.bits() == 8) {
      raster.push_back(static_cast<unsigned char>(v));
    } else {
      raster.push_back(static_cast<unsigned char>(v >> 8));
      raster.push_back(static_cast<unsigned char>(v & 0xff));
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

GrayImage::GrayImage(int width, int height, int bits, std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), bits_(bits), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw InputError("image dimensions must be positive");
  if (bits < 1 || bits > 16) throw InputError("image bit depth must be in 1..16");
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InputError("pixel count does not match image dimensions");
  }
  const unsigned limit = (1u << bits) - 1;
  if (std::any_of(pixels_.begin(), pixels_.end(), [limit](std::uint16_t p) { return p > limit; })) {
    throw InputError("pixel value exceeds the image bit depth");
  }
}

GrayImage read_image(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = slurp(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return read_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    if (bytes[1] == '5') return read_pgm(bytes, path.string());
    throw FormatError("only binary grayscale PGM (P5) is supported: " + path.string());
  }
  if (bytes.size() < 2) throw IoError("file too short: " + path.string());
  throw FormatError("unrecognized image format: " + path.string());
}

void write_image(const GrayImage& img, const std::filesystem::path& path) {
  if (!is_supported_depth(img.bits())) throw InputError("images are written at 8, 12, 14 or 16 bits");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_png(img, path);
  } else {
    write_pgm(img, path);
  }
}

void write_mask(std::span<const std::uint8_t> mask, int width, int height, const std::filesystem::path& path) {
  std::vector<std::uint16_t> pixels(mask.size());
  std::transform(mask.begin(), mask.end(), pixels.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  write_pgm(GrayImage(width, height, 8, std::move(pixels)), path);
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& width, int& height) {
  const GrayImage img = read_image(path);
  width = img.width();
  height = img.height();
  std::vector<std::uint8_t> mask(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), mask.begin(),
                 [](std::uint16_t v) { return v ? 1 : 0; });
  return mask;
}

}  // namespace cetrace
