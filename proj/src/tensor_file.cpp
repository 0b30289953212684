#include "pmn/tensor_file.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pmn/errors.hpp"

namespace pmn {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");
static_assert(sizeof(Real) == 8);

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
    return v;
}

std::uint32_t crc32_of(const char* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

Shape parse_shape(const std::string& text, const std::string& name) {
    Shape shape;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('x', pos), text.size());
        const std::string part = text.substr(pos, end - pos);
        if (part.empty() || !std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw FormatError("manifest: tensor '" + name + "' has malformed shape '" + text + "'");
        }
        const auto d = std::stoull(part);
        if (d == 0) throw FormatError("manifest: tensor '" + name + "' has a zero dimension");
        shape.push_back(d);
        pos = end + 1;
    }
    return shape;
}

}  // namespace

void TensorFile::add(std::string name, Tensor tensor) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
        throw ParameterError("tensor name '" + name + "' must be non-empty without whitespace");
    }
    if (contains(name)) throw ParameterError("duplicate tensor name '" + name + "'");
    entries_.push_back({std::move(name), std::move(tensor)});
}

bool TensorFile::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

const Tensor& TensorFile::get(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw FormatError("missing tensor '" + name + "'");
}

Tensor& TensorFile::get(const std::string& name) {
    for (auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw FormatError("missing tensor '" + name + "'");
}

std::string TensorFile::encode() const {
    std::string manifest;
    for (const auto& e : entries_) {
        manifest += e.name + " f64 ";
        for (std::size_t i = 0; i < e.tensor.rank(); ++i) {
            if (i) manifest += "x";
            manifest += std::to_string(e.tensor.dim(i));
        }
        manifest += "\n";
    }
    std::string out(kTensorMagic, sizeof(kTensorMagic));
    put_u32(out, static_cast<std::uint32_t>(manifest.size()));
    out += manifest;
    const std::size_t payload_start = out.size();
    for (const auto& e : entries_) {
        const auto* bytes = reinterpret_cast<const char*>(e.tensor.data());
        out.append(bytes, e.tensor.size() * sizeof(Real));
    }
    put_u32(out, crc32_of(out.data() + payload_start, out.size() - payload_start));
    return out;
}

TensorFile TensorFile::decode(const std::string& bytes) {
    if (bytes.size() < sizeof(kTensorMagic) + 8) throw FormatError("container truncated: header");
    if (std::memcmp(bytes.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
        throw FormatError("container magic mismatch: expected PMNTNSR1");
    }
    const std::uint32_t manifest_len = get_u32(bytes, 8);
    if (12 + std::size_t{manifest_len} + 4 > bytes.size()) throw FormatError("container truncated: manifest");
    std::istringstream manifest(bytes.substr(12, manifest_len));

    struct Pending {
        std::string name;
        Shape shape;
    };
    std::vector<Pending> pending;
    std::size_t payload_bytes = 0;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string name, dtype, shape_text, extra;
        if (!(fields >> name >> dtype >> shape_text) || (fields >> extra)) {
            throw FormatError("manifest: malformed line '" + line + "'");
        }
        if (dtype != "f64") throw FormatError("manifest: tensor '" + name + "' has unsupported dtype '" + dtype + "'");
        Shape shape = parse_shape(shape_text, name);
        payload_bytes += shape_size(shape) * sizeof(Real);
        pending.push_back({std::move(name), std::move(shape)});
    }

    const std::size_t payload_start = 12 + manifest_len;
    if (payload_start + payload_bytes + 4 > bytes.size()) throw FormatError("container truncated: payload");
    if (payload_start + payload_bytes + 4 < bytes.size()) throw FormatError("container has trailing bytes after crc");
    const std::uint32_t stored = get_u32(bytes, payload_start + payload_bytes);
    if (stored != crc32_of(bytes.data() + payload_start, payload_bytes)) {
        throw FormatError("container crc mismatch over payload");
    }

    TensorFile file;
    std::size_t at = payload_start;
    for (auto& p : pending) {
        std::vector<Real> values(shape_size(p.shape));
        std::memcpy(values.data(), bytes.data() + at, values.size() * sizeof(Real));
        at += values.size() * sizeof(Real);
        file.add(std::move(p.name), Tensor(std::move(p.shape), std::move(values)));
    }
    return file;
}

void TensorFile::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    const std::string bytes = encode();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TensorFile TensorFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace pmn
