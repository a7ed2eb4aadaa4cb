//
// Raster encoders. PNG goes through libpng (8-bit gray/RGB, 16-bit gray);
// PFM is written little-endian, bottom row first, as the format expects.
//

#ifndef CLEARSIM_IMAGE_IO_H_
#define CLEARSIM_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clearsim/image.h"

namespace clearsim {

using byte_buffer = std::vector<uint8_t>;

byte_buffer encode_png8(const image<uint8_t>& gray);
byte_buffer encode_png8(const image<rgb8>& rgb);
byte_buffer encode_png16(const image<uint16_t>& gray);
// Quantizes values in [0,1] to round(65535 v); non-finite texels are an error.
byte_buffer encode_png16(const image<float>& normalized);

image<uint8_t> decode_png8_gray(const byte_buffer& bytes);
image<rgb8> decode_png8_rgb(const byte_buffer& bytes);
image<uint16_t> decode_png16(const byte_buffer& bytes);

byte_buffer encode_pfm(const image<float>& gray);
byte_buffer encode_pfm(const image<rgb32f>& rgb);
image<float> decode_pfm_gray(const byte_buffer& bytes);
image<rgb32f> decode_pfm_rgb(const byte_buffer& bytes);

byte_buffer read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames, so readers never see a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, const byte_buffer& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace clearsim

#endif
