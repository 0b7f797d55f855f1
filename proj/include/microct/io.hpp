#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace microct {

// Arrays are persisted as flat 32-bit little-endian floats. Doubles are
// narrowed on write; files are the interchange format, not the working one.
inline void write_f32(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    std::vector<float> buf(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) buf[i] = static_cast<float>(values[i]);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_f32(const std::filesystem::path& path, std::size_t expected_count) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    f.seekg(0, std::ios::end);
    auto bytes = static_cast<std::size_t>(f.tellg());
    f.seekg(0, std::ios::beg);
    if (bytes != expected_count * sizeof(float))
        throw CorruptDataset("unexpected length of " + path.string() + ": " + std::to_string(bytes) +
                             " bytes, expected " + std::to_string(expected_count * sizeof(float)));
    std::vector<float> buf(expected_count);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!f) throw IoError("read failed: " + path.string());
    std::vector<double> out(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) out[i] = static_cast<double>(buf[i]);
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

// Portable bitmap, P1: boolean masks for eyeballing against filter sketches.
inline void write_pbm(const std::filesystem::path& path, const std::vector<bool>& bits,
                      std::size_t width, std::size_t height) {
    std::string s = "P1\n" + std::to_string(width) + " " + std::to_string(height) + "\n";
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            s += bits[i * width + j] ? '1' : '0';
            s += (j + 1 == width) ? '\n' : ' ';
        }
    }
    write_text(path, s);
}

}  // namespace microct
