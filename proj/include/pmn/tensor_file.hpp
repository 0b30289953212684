#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pmn/tensor.hpp"

namespace pmn {

/// Ordered collection of named tensors, serialized as
///
///   "PMNTNSR1"                     8-byte magic
///   u32 LE                         manifest byte length
///   manifest                       UTF-8, one line per tensor: "<name> f64 <d0>x<d1>...\n"
///   payloads                       little-endian f64, manifest order
///   u32 LE                         CRC-32 of the payload bytes
class TensorFile {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
    };

    void add(std::string name, Tensor tensor);
    bool contains(const std::string& name) const;
    const Tensor& get(const std::string& name) const;
    Tensor& get(const std::string& name);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::vector<Entry>& entries() noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::string encode() const;
    static TensorFile decode(const std::string& bytes);

    void save(const std::filesystem::path& path) const;
    static TensorFile load(const std::filesystem::path& path);

private:
    std::vector<Entry> entries_;
};

inline constexpr char kTensorMagic[8] = {'P', 'M', 'N', 'T', 'N', 'S', 'R', '1'};

}  // namespace pmn
