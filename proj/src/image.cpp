#include "pmn/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

struct PnmHeader {
    std::string magic;
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 0;
};

std::string read_token(std::istream& in, const std::filesystem::path& path) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(ch));
        }
        ch = in.get();
    }
    if (tok.empty()) throw FormatError(path.string() + ": truncated PNM header");
    return tok;
}

std::size_t parse_positive(const std::string& tok, const char* field, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        const unsigned long v = std::stoul(tok, &pos);
        if (pos != tok.size() || v == 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad PNM " + field + " '" + tok + "'");
    }
}

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
    PnmHeader h;
    h.magic = read_token(in, path);
    h.width = parse_positive(read_token(in, path), "width", path);
    h.height = parse_positive(read_token(in, path), "height", path);
    h.maxval = static_cast<unsigned>(parse_positive(read_token(in, path), "maxval", path));
    if (h.maxval > 65535) throw FormatError(path.string() + ": PNM maxval above 65535");
    return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

std::vector<unsigned> read_samples(std::istream& in, const PnmHeader& h, std::size_t count,
                                   const std::filesystem::path& path) {
    const std::size_t bytes_per = h.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError(path.string() + ": truncated PNM payload");
    }
    std::vector<unsigned> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
    }
    return out;
}

unsigned char to_byte(Real v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

BinaryMask SegMask::binarize(Real threshold) const {
    BinaryMask out(height, width);
    for (std::size_t i = 0; i < values.size(); ++i) out.bits[i] = values[i] >= threshold ? 1 : 0;
    return out;
}

SegMask to_soft(const BinaryMask& mask) {
    SegMask out{mask.height, mask.width, std::vector<Real>(mask.bits.size())};
    for (std::size_t i = 0; i < mask.bits.size(); ++i) out.values[i] = mask.bits[i] ? 1.0 : 0.0;
    return out;
}

Image read_ppm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const PnmHeader h = read_header(in, path);
    if (h.magic != "P6") throw FormatError(path.string() + ": expected P6 magic, found '" + h.magic + "'");
    const auto samples = read_samples(in, h, h.width * h.height * 3, path);
    Image img(h.height, h.width);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        img.pixels[i] = static_cast<Real>(samples[i]) / static_cast<Real>(h.maxval);
    }
    return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    auto out = open_out(path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> raw(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), raw.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

std::vector<Real> read_pgm(const std::filesystem::path& path, std::size_t& height, std::size_t& width) {
    auto in = open_in(path);
    const PnmHeader h = read_header(in, path);
    if (h.magic != "P5") throw FormatError(path.string() + ": expected P5 magic, found '" + h.magic + "'");
    const auto samples = read_samples(in, h, h.width * h.height, path);
    height = h.height;
    width = h.width;
    std::vector<Real> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = static_cast<Real>(samples[i]) / static_cast<Real>(h.maxval);
    }
    return out;
}

BinaryMask read_mask_pgm(const std::filesystem::path& path) {
    std::size_t h = 0, w = 0;
    const auto values = read_pgm(path, h, w);
    BinaryMask mask(h, w);
    for (std::size_t i = 0; i < values.size(); ++i) mask.bits[i] = values[i] > 0.0 ? 1 : 0;
    return mask;
}

void write_mask_pgm(const std::filesystem::path& path, const SegMask& mask) {
    auto out = open_out(path);
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<unsigned char> raw(mask.values.size());
    std::transform(mask.values.begin(), mask.values.end(), raw.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
    write_mask_pgm(path, to_soft(mask));
}

void write_pgm16(const std::filesystem::path& path, std::size_t height, std::size_t width,
                 const std::vector<std::uint16_t>& levels) {
    if (levels.size() != height * width) {
        throw DimensionError("write_pgm16: " + std::to_string(levels.size()) + " levels for " +
                             std::to_string(height) + "x" + std::to_string(width));
    }
    auto out = open_out(path);
    out << "P5\n" << width << " " << height << "\n65535\n";
    std::vector<unsigned char> raw(levels.size() * 2);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        raw[2 * i] = static_cast<unsigned char>(levels[i] >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(levels[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

std::vector<std::uint16_t> read_pgm16_levels(const std::filesystem::path& path, std::size_t& height,
                                             std::size_t& width) {
    auto in = open_in(path);
    const PnmHeader h = read_header(in, path);
    if (h.magic != "P5") throw FormatError(path.string() + ": expected P5 magic, found '" + h.magic + "'");
    const auto samples = read_samples(in, h, h.width * h.height, path);
    height = h.height;
    width = h.width;
    return {samples.begin(), samples.end()};
}

}  // namespace pmn
