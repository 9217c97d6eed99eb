// Binary PGM (P5) input/output. 8-bit rasters carry input masks, 16-bit
// rasters carry detector frames and accumulated images (big-endian sample
// order per the format).
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eitmem {

template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> pixels; // row-major, top row first

    T at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    T& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

using Raster8 = Raster<std::uint8_t>;
using Raster16 = Raster<std::uint16_t>;

namespace pgm_detail {

inline int next_token(std::istream& in)
{
    // skips whitespace and '#' comments, returns the next integer token
    for (;;) {
        int c = in.peek();
        if (c == EOF)
            throw std::runtime_error("pgm: truncated header");
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        int value = 0;
        if (!(in >> value))
            throw std::runtime_error("pgm: malformed header token");
        return value;
    }
}

} // namespace pgm_detail

inline Raster8 read_pgm8(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("pgm: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        throw std::runtime_error("pgm: not a binary P5 graymap: " + path);
    const int width = pgm_detail::next_token(in);
    const int height = pgm_detail::next_token(in);
    const int maxval = pgm_detail::next_token(in);
    if (width <= 0 || height <= 0)
        throw std::runtime_error("pgm: bad dimensions in " + path);
    if (maxval != 255)
        throw std::runtime_error("pgm: expected maxval 255 in " + path);
    in.get(); // single whitespace byte after maxval
    Raster8 raster;
    raster.width = width;
    raster.height = height;
    raster.pixels.resize(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raster.pixels.data()),
            static_cast<std::streamsize>(raster.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(raster.pixels.size()))
        throw std::runtime_error("pgm: truncated pixel data in " + path);
    return raster;
}

inline void write_pgm8(const std::string& path, const Raster8& raster)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("pgm: cannot write " + path);
    out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()),
              static_cast<std::streamsize>(raster.pixels.size()));
}

inline Raster16 read_pgm16(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("pgm: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        throw std::runtime_error("pgm: not a binary P5 graymap: " + path);
    const int width = pgm_detail::next_token(in);
    const int height = pgm_detail::next_token(in);
    const int maxval = pgm_detail::next_token(in);
    if (width <= 0 || height <= 0)
        throw std::runtime_error("pgm: bad dimensions in " + path);
    if (maxval != 65535)
        throw std::runtime_error("pgm: expected maxval 65535 in " + path);
    in.get();
    Raster16 raster;
    raster.width = width;
    raster.height = height;
    raster.pixels.resize(static_cast<std::size_t>(width) * height);
    std::vector<std::uint8_t> bytes(raster.pixels.size() * 2);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw std::runtime_error("pgm: truncated pixel data in " + path);
    for (std::size_t i = 0; i < raster.pixels.size(); ++i)
        raster.pixels[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    return raster;
}

inline void write_pgm16(const std::string& path, const Raster16& raster)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("pgm: cannot write " + path);
    out << "P5\n" << raster.width << " " << raster.height << "\n65535\n";
    std::vector<std::uint8_t> bytes(raster.pixels.size() * 2);
    for (std::size_t i = 0; i < raster.pixels.size(); ++i) {
        bytes[2 * i] = static_cast<std::uint8_t>(raster.pixels[i] >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(raster.pixels[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace eitmem
