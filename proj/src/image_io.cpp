#include "clearsim/image_io.h"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "clearsim/error.h"

namespace clearsim {

namespace {

constexpr int64_t max_dimension = 1 << 20;

void check_dimensions(int width, int height, int channels, int bytes_per_sample) {
  if (width <= 0 || height <= 0 || width > max_dimension || height > max_dimension)
    throw domain_error("raster dimensions out of range");
  auto total = static_cast<int64_t>(width) * height * channels * bytes_per_sample;
  if (total > std::numeric_limits<int32_t>::max())
    throw domain_error("raster too large to encode");
}

// -----------------------------------------------------------------------------
// PNG
// -----------------------------------------------------------------------------

struct png_read_cursor {
  const byte_buffer* bytes;
  size_t offset;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<byte_buffer*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* cursor = static_cast<png_read_cursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) png_error(png, "truncated png");
  std::memcpy(data, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

// Records the message instead of printing it; the caller's setjmp turns it into an exception.
void png_raise(png_structp png, png_const_charp message) {
  if (auto* out = static_cast<std::string*>(png_get_error_ptr(png))) *out = message;
  png_longjmp(png, 1);
}

void png_quiet_warning(png_structp, png_const_charp) {}

// `rows` holds big-endian sample bytes, tightly packed.
byte_buffer write_png(int width, int height, int color_type, int bit_depth,
    const std::vector<uint8_t>& rows) {
  auto out = byte_buffer{};
  auto row_bytes = rows.size() / height;
  auto row_pointers = std::vector<png_bytep>(height);
  for (int y = 0; y < height; y++)
    row_pointers[y] = const_cast<png_bytep>(rows.data() + y * row_bytes);

  auto message = std::string{};
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_raise, png_quiet_warning);
  if (!png) throw io_error("png: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw io_error("png: cannot allocate info");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("png: encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_vector, nullptr);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
      PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_pointers.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct decoded_png {
  int width = 0, height = 0, color_type = 0, bit_depth = 0;
  std::vector<uint8_t> rows;
};

decoded_png read_png(const byte_buffer& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw parse_error("png: bad signature");
  auto result = decoded_png{};
  auto cursor = png_read_cursor{&bytes, 0};
  auto row_pointers = std::vector<png_bytep>{};

  auto message = std::string{};
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_raise, png_quiet_warning);
  if (!png) throw io_error("png: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw io_error("png: cannot allocate info");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw parse_error("png: decode failed: " + message);
  }
  png_set_read_fn(png, &cursor, png_read_from_vector);
  png_read_info(png, info);
  result.width = static_cast<int>(png_get_image_width(png, info));
  result.height = static_cast<int>(png_get_image_height(png, info));
  result.color_type = png_get_color_type(png, info);
  result.bit_depth = png_get_bit_depth(png, info);
  auto row_bytes = png_get_rowbytes(png, info);
  result.rows.resize(row_bytes * result.height);
  row_pointers.resize(result.height);
  for (int y = 0; y < result.height; y++) row_pointers[y] = result.rows.data() + y * row_bytes;
  png_read_image(png, row_pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return result;
}

// -----------------------------------------------------------------------------
// PFM
// -----------------------------------------------------------------------------

byte_buffer write_pfm(int width, int height, int channels, const float* data) {
  check_dimensions(width, height, channels, 4);
  auto header = std::string(channels == 3 ? "PF\n" : "Pf\n") + std::to_string(width) + " " +
                std::to_string(height) + "\n-1.0\n";
  auto out = byte_buffer(header.begin(), header.end());
  auto row_floats = static_cast<size_t>(width) * channels;
  for (int y = height - 1; y >= 0; y--) {
    const auto* row = data + y * row_floats;
    for (size_t i = 0; i < row_floats; i++) {
      uint32_t bits;
      std::memcpy(&bits, &row[i], 4);
      for (int b = 0; b < 4; b++) out.push_back(static_cast<uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

std::vector<float> read_pfm(const byte_buffer& bytes, int expected_channels, int& width,
    int& height) {
  auto pos = size_t{0};
  auto next_token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) pos++;
    auto start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) pos++;
    if (start == pos) throw parse_error("pfm: truncated header");
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  };
  auto magic = next_token();
  auto channels = magic == "PF" ? 3 : magic == "Pf" ? 1 : 0;
  if (channels == 0) throw parse_error("pfm: bad magic '" + magic + "'");
  if (channels != expected_channels)
    throw parse_error("pfm: expected " + std::to_string(expected_channels) + " channels");
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
  } catch (const std::logic_error&) {
    throw parse_error("pfm: bad dimensions");
  }
  double scale = 0;
  try {
    scale = std::stod(next_token());
  } catch (const std::logic_error&) {
    throw parse_error("pfm: bad scale");
  }
  check_dimensions(width, height, channels, 4);
  pos++;  // single whitespace byte after the scale
  auto count = static_cast<size_t>(width) * height * channels;
  if (bytes.size() - pos < count * 4) throw parse_error("pfm: truncated data");
  auto little = scale < 0;
  auto row_floats = static_cast<size_t>(width) * channels;
  auto data = std::vector<float>(count);
  for (int y = height - 1; y >= 0; y--) {
    for (size_t i = 0; i < row_floats; i++) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; b++) {
        auto byte = static_cast<uint32_t>(bytes[pos + b]);
        bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
      }
      pos += 4;
      std::memcpy(&data[y * row_floats + i], &bits, 4);
    }
  }
  return data;
}

}  // namespace

byte_buffer encode_png8(const image<uint8_t>& gray) {
  check_dimensions(gray.width, gray.height, 1, 1);
  return write_png(gray.width, gray.height, PNG_COLOR_TYPE_GRAY, 8, gray.pixels);
}

byte_buffer encode_png8(const image<rgb8>& rgb) {
  check_dimensions(rgb.width, rgb.height, 3, 1);
  auto rows = std::vector<uint8_t>();
  rows.reserve(rgb.size() * 3);
  for (auto& p : rgb.pixels) rows.insert(rows.end(), {p.r, p.g, p.b});
  return write_png(rgb.width, rgb.height, PNG_COLOR_TYPE_RGB, 8, rows);
}

byte_buffer encode_png16(const image<uint16_t>& gray) {
  check_dimensions(gray.width, gray.height, 1, 2);
  auto rows = std::vector<uint8_t>();
  rows.reserve(gray.size() * 2);
  for (auto v : gray.pixels) {
    rows.push_back(static_cast<uint8_t>(v >> 8));
    rows.push_back(static_cast<uint8_t>(v & 0xff));
  }
  return write_png(gray.width, gray.height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

byte_buffer encode_png16(const image<float>& normalized) {
  auto quantized = image<uint16_t>(normalized.width, normalized.height);
  for (size_t i = 0; i < normalized.size(); i++) {
    auto v = normalized.pixels[i];
    if (!std::isfinite(v)) throw domain_error("png16: non-finite texel");
    quantized.pixels[i] =
        static_cast<uint16_t>(std::lround(std::clamp(double(v), 0.0, 1.0) * 65535.0));
  }
  return encode_png16(quantized);
}

image<uint8_t> decode_png8_gray(const byte_buffer& bytes) {
  auto png = read_png(bytes);
  if (png.color_type != PNG_COLOR_TYPE_GRAY || png.bit_depth != 8)
    throw parse_error("png: expected 8-bit gray");
  auto img = image<uint8_t>(png.width, png.height);
  img.pixels = std::move(png.rows);
  return img;
}

image<rgb8> decode_png8_rgb(const byte_buffer& bytes) {
  auto png = read_png(bytes);
  if (png.color_type != PNG_COLOR_TYPE_RGB || png.bit_depth != 8)
    throw parse_error("png: expected 8-bit RGB");
  auto img = image<rgb8>(png.width, png.height);
  for (size_t i = 0; i < img.size(); i++)
    img.pixels[i] = {png.rows[3 * i], png.rows[3 * i + 1], png.rows[3 * i + 2]};
  return img;
}

image<uint16_t> decode_png16(const byte_buffer& bytes) {
  auto png = read_png(bytes);
  if (png.color_type != PNG_COLOR_TYPE_GRAY || png.bit_depth != 16)
    throw parse_error("png: expected 16-bit gray");
  auto img = image<uint16_t>(png.width, png.height);
  for (size_t i = 0; i < img.size(); i++)
    img.pixels[i] = static_cast<uint16_t>((png.rows[2 * i] << 8) | png.rows[2 * i + 1]);
  return img;
}

byte_buffer encode_pfm(const image<float>& gray) {
  return write_pfm(gray.width, gray.height, 1, gray.pixels.data());
}

byte_buffer encode_pfm(const image<rgb32f>& rgb) {
  static_assert(sizeof(rgb32f) == 3 * sizeof(float));
  return write_pfm(rgb.width, rgb.height, 3, reinterpret_cast<const float*>(rgb.pixels.data()));
}

image<float> decode_pfm_gray(const byte_buffer& bytes) {
  auto img = image<float>{};
  img.pixels = read_pfm(bytes, 1, img.width, img.height);
  return img;
}

image<rgb32f> decode_pfm_rgb(const byte_buffer& bytes) {
  int width = 0, height = 0;
  auto data = read_pfm(bytes, 3, width, height);
  auto img = image<rgb32f>(width, height);
  for (size_t i = 0; i < img.size(); i++)
    img.pixels[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
  return img;
}

byte_buffer read_file(const std::filesystem::path& path) {
  auto stream = std::ifstream(path, std::ios::binary);
  if (!stream) throw io_error("cannot open " + path.string());
  return byte_buffer(
      std::istreambuf_iterator<char>(stream), std::istreambuf_iterator<char>());
}

namespace {
template <typename Bytes>
void write_atomic(const std::filesystem::path& path, const Bytes& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto stream = std::ofstream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw io_error("cannot write " + tmp.string());
    stream.write(reinterpret_cast<const char*>(bytes.data()),
        static_cast<std::streamsize>(bytes.size()));
    if (!stream) throw io_error("write failed for " + tmp.string());
  }
  auto ec = std::error_code{};
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename to " + path.string() + ": " + ec.message());
}
}  // namespace

void write_file_atomic(const std::filesystem::path& path, const byte_buffer& bytes) {
  write_atomic(path, bytes);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_atomic(path, text);
}

}  // namespace clearsim
