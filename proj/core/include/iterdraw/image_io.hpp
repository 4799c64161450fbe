/* Copyright 2026 The iterdraw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ITERDRAW_IMAGE_IO_HPP_
#define ITERDRAW_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iterdraw/types.hpp"

namespace iterdraw {

// Pixel mapping between 8-bit storage and the in-memory [-1, 1] range.
std::uint8_t quantize_pixel(float value);
inline float dequantize_pixel(std::uint8_t pixel) {
  return static_cast<float>(pixel) / 127.5f - 1.0f;
}

std::vector<std::uint8_t> encode_png(const ImageGrid& image);
ImageGrid decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const ImageGrid& image, const std::filesystem::path& path);
ImageGrid read_png(const std::filesystem::path& path);

// Bilinear resampling with half-pixel centers.
ImageGrid resize_image(const ImageGrid& image, int height, int width);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Throws std::invalid_argument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace iterdraw

#endif  // ITERDRAW_IMAGE_IO_HPP_
