#include "parkingtwin/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "parkingtwin/error.hpp"

namespace parkingtwin {

namespace {

enum class Want { Rgb8, Gray8, Gray16 };

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
};

struct ErrorSink {
  char message[256] = {0};
};

void on_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg ? msg : "libpng error");
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "': " + std::strerror(errno));
  return f;
}

// Returns false with `sink` filled on failure. Only heap state reachable
// through pointers is touched after setjmp.
bool decode_png(std::FILE* fp, Want want, Decoded* out, ErrorSink* sink) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, on_error, on_warning);
  if (!png) {
    std::snprintf(sink->message, sizeof(sink->message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(sink->message, sizeof(sink->message), "out of memory");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_set_user_limits(png, 1 << 15, 1 << 15);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (want == Want::Gray16) {
    if (color != PNG_COLOR_TYPE_GRAY || depth != 16) png_error(png, "expected a 16-bit grayscale PNG");
    png_set_swap(png);
  } else {
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    const bool is_color = (color & PNG_COLOR_MASK_COLOR) != 0 || color == PNG_COLOR_TYPE_PALETTE;
    if (want == Want::Rgb8 && !is_color) png_set_gray_to_rgb(png);
    if (want == Want::Gray8 && is_color) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  const png_size_t expect = want == Want::Rgb8 ? 3u * w : want == Want::Gray8 ? w : 2u * w;
  if (rowbytes != expect) png_error(png, "unsupported PNG pixel layout");

  out->width = static_cast<int>(w);
  out->height = static_cast<int>(h);
  out->data.resize(rowbytes * h);
  out->rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) out->rows[y] = out->data.data() + y * rowbytes;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Decoded read_any(const std::string& path, Want want) {
  FilePtr f = open_file(path, "rb");
  auto out = std::make_unique<Decoded>();
  ErrorSink sink;
  if (!decode_png(f.get(), want, out.get(), &sink)) {
    throw Error(ErrorKind::Parse, "cannot decode PNG '" + path + "': " + sink.message);
  }
  return std::move(*out);
}

bool encode_png(std::FILE* fp, int width, int height, int color_type, int bit_depth, const std::uint8_t* data,
                std::size_t rowbytes, bool swap, ErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, on_error, on_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 1);
  png_write_info(png, info);
  if (swap) png_set_swap(png);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * rowbytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_any(const std::string& path, int width, int height, int color_type, int bit_depth, const std::uint8_t* data,
               std::size_t rowbytes, bool swap) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Parameter, "cannot write empty image '" + path + "'");
  FilePtr f = open_file(path, "wb");
  ErrorSink sink;
  if (!encode_png(f.get(), width, height, color_type, bit_depth, data, rowbytes, swap, &sink)) {
    throw Error(ErrorKind::Io, "cannot encode PNG '" + path + "': " + sink.message);
  }
  if (std::fflush(f.get()) != 0) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace

RgbImage read_png_rgb(const std::string& path) {
  Decoded d = read_any(path, Want::Rgb8);
  RgbImage img(d.width, d.height);
  std::memcpy(img.pixels.data(), d.data.data(), d.data.size());
  return img;
}

GrayImage read_png_gray(const std::string& path) {
  Decoded d = read_any(path, Want::Gray8);
  GrayImage img(d.height, d.width);
  std::memcpy(img.data(), d.data.data(), d.data.size());
  return img;
}

Depth16 read_png_u16(const std::string& path) {
  Decoded d = read_any(path, Want::Gray16);
  Depth16 img(d.height, d.width);
  std::memcpy(img.data(), d.data.data(), d.data.size());
  return img;
}

void write_png_rgb(const std::string& path, const RgbImage& image) {
  write_any(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, image.pixels.data(),
            static_cast<std::size_t>(image.width) * 3, false);
}

void write_png_gray(const std::string& path, const GrayImage& image) {
  write_any(path, static_cast<int>(image.cols()), static_cast<int>(image.rows()), PNG_COLOR_TYPE_GRAY, 8, image.data(),
            static_cast<std::size_t>(image.cols()), false);
}

void write_png_u16(const std::string& path, const Depth16& image) {
  write_any(path, static_cast<int>(image.cols()), static_cast<int>(image.rows()), PNG_COLOR_TYPE_GRAY, 16,
            reinterpret_cast<const std::uint8_t*>(image.data()), static_cast<std::size_t>(image.cols()) * 2, true);
}

DepthMap depth_from_u16(const Depth16& raw, double depth_scale) {
  return raw.cast<float>() * static_cast<float>(depth_scale);
}

Depth16 depth_to_u16(const DepthMap& depth, double depth_scale) {
  Depth16 out(depth.rows(), depth.cols());
  for (Eigen::Index i = 0; i < depth.size(); ++i) {
    const double d = depth.data()[i];
    const double units = std::isfinite(d) && d > 0.0 ? std::round(d / depth_scale) : 0.0;
    out.data()[i] = units >= 1.0 && units <= 65535.0 ? static_cast<std::uint16_t>(units) : 0;
  }
  return out;
}

GrayImage mask_to_gray(const BoolGrid& mask) { return mask.select(GrayImage::Constant(mask.rows(), mask.cols(), 255), GrayImage::Zero(mask.rows(), mask.cols())); }

}  // namespace parkingtwin
