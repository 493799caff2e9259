#pragma once

// Tensor archive: one UTF-8 JSON header line
//   {"format_version":1,"tensor_directory":[{name,shape,dtype,byte_offset}...],
//    "metadata":{...}}
// followed by raw little-endian IEEE-754 payloads in directory order.
// byte_offset counts from the first byte after the header's newline.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "bwet/numerics/tensor.hpp"

namespace bwet {

enum class Dtype { float32, float64 };

inline const char* dtype_name(Dtype d) { return d == Dtype::float32 ? "float32" : "float64"; }
inline std::size_t dtype_bytes(Dtype d) { return d == Dtype::float32 ? 4 : 8; }

template <typename T>
constexpr Dtype dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? Dtype::float32 : Dtype::float64;
}

class TensorArchive {
 public:
  static constexpr int kFormatVersion = 1;

  struct Entry {
    std::string name;
    Shape shape;
    Dtype dtype = Dtype::float32;
    std::vector<double> values;  // widened; float32 round-trips exactly
  };

  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }
  const std::vector<Entry>& entries() const { return entries_; }

  template <typename T>
  void put(const std::string& name, const Tensor<T>& t) {
    if (index_.count(name)) throw UsageError("archive: duplicate tensor name '" + name + "'");
    index_[name] = entries_.size();
    entries_.push_back({name, t.shape(), dtype_of<T>(),
                        std::vector<double>(t.buffer().begin(), t.buffer().end())});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  template <typename T>
  Tensor<T> get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw FormatError("archive: missing tensor '" + name + "'");
    const Entry& e = entries_[it->second];
    return Tensor<T>(e.shape, std::vector<T>(e.values.begin(), e.values.end()));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out);
    if (!out) throw IoError("write failed for '" + path + "'");
  }

  void write(std::ostream& out) const {
    nlohmann::json dir = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& e : entries_) {
      dir.push_back({{"name", e.name},
                     {"shape", e.shape},
                     {"dtype", dtype_name(e.dtype)},
                     {"byte_offset", offset}});
      offset += e.values.size() * dtype_bytes(e.dtype);
    }
    nlohmann::json header = {{"format_version", kFormatVersion},
                             {"tensor_directory", dir},
                             {"metadata", metadata_}};
    out << header.dump() << '\n';
    for (const auto& e : entries_) {
      for (double v : e.values) {
        if (e.dtype == Dtype::float32) {
          write_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
          write_le(out, std::bit_cast<std::uint64_t>(v));
        }
      }
    }
  }

  static TensorArchive load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read(in, path);
  }

  static TensorArchive read(std::istream& in, const std::string& label = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(label + ": missing archive header");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(label + ": header is not valid JSON: " + ex.what());
    }
    if (!header.contains("format_version") || header["format_version"] != kFormatVersion) {
      throw FormatError(label + ": unsupported archive format_version");
    }
    TensorArchive ar;
    if (header.contains("metadata")) ar.metadata_ = header["metadata"];
    std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (const auto& d : header.at("tensor_directory")) {
      Entry e;
      e.name = d.at("name").get<std::string>();
      e.shape = d.at("shape").get<Shape>();
      const std::string dt = d.at("dtype").get<std::string>();
      if (dt == "float32") e.dtype = Dtype::float32;
      else if (dt == "float64") e.dtype = Dtype::float64;
      else throw FormatError(label + ": unknown dtype '" + dt + "' for tensor '" + e.name + "'");
      const std::size_t offset = d.at("byte_offset").get<std::size_t>();
      const std::size_t count = shape_size(e.shape);
      const std::size_t width = dtype_bytes(e.dtype);
      if (offset + count * width > payload.size()) {
        throw FormatError(label + ": payload truncated for tensor '" + e.name + "'");
      }
      e.values.resize(count);
      const char* p = payload.data() + offset;
      for (std::size_t i = 0; i < count; ++i, p += width) {
        if (e.dtype == Dtype::float32) {
          e.values[i] = std::bit_cast<float>(read_le<std::uint32_t>(p));
        } else {
          e.values[i] = std::bit_cast<double>(read_le<std::uint64_t>(p));
        }
      }
      if (ar.index_.count(e.name)) throw FormatError(label + ": duplicate tensor '" + e.name + "'");
      ar.index_[e.name] = ar.entries_.size();
      ar.entries_.push_back(std::move(e));
    }
    return ar;
  }

 private:
  template <typename U>
  static void write_le(std::ostream& out, U bits) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(U));
  }

  template <typename U>
  static U read_le(const char* p) {
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
    return bits;
  }

  nlohmann::json metadata_ = nlohmann::json::object();
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace bwet
