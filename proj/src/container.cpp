#include "ltssl/container.hpp"

#include "io_util.hpp"

namespace ltssl {

namespace {
constexpr std::uint32_t kStoreMagic = 0x4C54434B;  // "LTCK"
constexpr std::uint32_t kStoreVersion = 1;
}  // namespace

void ArrayStore::save(const std::string& path) const {
  io::Writer w(path);
  w.u32(kStoreMagic);
  w.u32(kStoreVersion);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(f64.size()));
  for (const auto& [name, arr] : f64) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(arr.shape.size()));
    for (int d : arr.shape) w.u32(static_cast<std::uint32_t>(d));
    w.f64s(arr.values);
  }
  w.u32(static_cast<std::uint32_t>(u64.size()));
  for (const auto& [name, arr] : u64) {
    w.str(name);
    w.u64(arr.size());
    w.bytes(arr.data(), arr.size() * 8);
  }
}

ArrayStore ArrayStore::load(const std::string& path) {
  io::Reader r(path);
  if (r.u32() != kStoreMagic) throw IoError("not a checkpoint container: " + path);
  if (const auto v = r.u32(); v != kStoreVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(v) + ": " + path);
  ArrayStore store;
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    const std::string k = r.str();
    store.meta[k] = r.str();
  }
  const std::uint32_t n_f64 = r.u32();
  for (std::uint32_t i = 0; i < n_f64; ++i) {
    const std::string name = r.str();
    NamedArray arr;
    const std::uint32_t ndim = r.u32();
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      arr.shape.push_back(static_cast<int>(r.u32()));
      count *= static_cast<std::size_t>(arr.shape.back());
    }
    arr.values = r.f64s(count);
    store.f64[name] = std::move(arr);
  }
  const std::uint32_t n_u64 = r.u32();
  for (std::uint32_t i = 0; i < n_u64; ++i) {
    const std::string name = r.str();
    const std::uint64_t count = r.u64();
    std::vector<std::uint64_t> arr(count);
    r.bytes(arr.data(), count * 8);
    store.u64[name] = std::move(arr);
  }
  return store;
}

}  // namespace ltssl
