#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <zlib.h>

#include "image.hpp"
#include "io.hpp"

namespace microct {

namespace detail {

inline void png_put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

inline void png_chunk(std::string& out, const char type[4], const std::string& data) {
    png_put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                     static_cast<uInt>(body.size()));
    png_put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// 16-bit grayscale PNG from normalized samples in [0,1].
inline void write_png16(const std::filesystem::path& path, const std::vector<double>& normalized,
                        std::size_t width, std::size_t height) {
    std::string raw;
    raw.reserve(height * (1 + 2 * width));
    for (std::size_t i = 0; i < height; ++i) {
        raw.push_back('\0');  // filter type 0 per scanline
        for (std::size_t j = 0; j < width; ++j) {
            double v = std::clamp(normalized[i * width + j], 0.0, 1.0);
            auto s = static_cast<std::uint16_t>(v * 65535.0 + 0.5);
            raw.push_back(static_cast<char>((s >> 8) & 0xff));
            raw.push_back(static_cast<char>(s & 0xff));
        }
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(comp_len, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &comp_len,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK)
        throw IoError("png deflate failed for " + path.string());
    compressed.resize(comp_len);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    detail::png_put_u32(ihdr, static_cast<std::uint32_t>(width));
    detail::png_put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(16);   // bit depth
    ihdr.push_back(0);    // grayscale
    ihdr.push_back(0);    // deflate
    ihdr.push_back(0);    // adaptive filtering
    ihdr.push_back(0);    // no interlace
    detail::png_chunk(out, "IHDR", ihdr);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", "");
    write_text(path, out);
}

// Image PNG with per-image min/max normalization; the window goes to a JSON
// sidecar so raw floats stay the ground truth.
inline void write_image_png(const std::filesystem::path& path, const Image& u) {
    auto [lo, hi] = std::minmax_element(u.data.begin(), u.data.end());
    double span = (*hi > *lo) ? (*hi - *lo) : 1.0;
    std::vector<double> norm(u.data.size());
    for (std::size_t i = 0; i < u.data.size(); ++i) norm[i] = (u.data[i] - *lo) / span;
    write_png16(path, norm, u.side, u.side);
    nlohmann::json j{{"min", *lo}, {"max", *hi}};
    write_text(std::filesystem::path(path).concat(".json"), j.dump(2) + "\n");
}

}  // namespace microct
