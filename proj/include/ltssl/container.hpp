#ifndef LTSSL_CONTAINER_HPP
#define LTSSL_CONTAINER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ltssl {

struct NamedArray {
  std::vector<int> shape;
  std::vector<double> values;
};

// Versioned container of named arrays plus small string metadata, used for
// checkpoints. Binary little-endian layout: magic 'LTCK', version, metadata
// (count, key/value strings), f64 arrays (count, name, ndim, dims, raw
// values), u64 arrays (count, name, length, raw values). Loading validates
// magic/version and throws IoError on truncation without partial effects;
// save/load round-trips bit-exactly.
struct ArrayStore {
  std::map<std::string, std::string> meta;
  std::map<std::string, NamedArray> f64;
  std::map<std::string, std::vector<std::uint64_t>> u64;

  void save(const std::string& path) const;
  static ArrayStore load(const std::string& path);
};

}  // namespace ltssl

#endif
