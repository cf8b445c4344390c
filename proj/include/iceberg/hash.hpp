#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace iceberg {

// FNV-1a 64-bit, streamed. Used for diffusion-cache staleness checks and
// run manifests; not cryptographic.
class Fnv1a {
 public:
  void update(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }

  void update_u64(std::uint64_t v) { update(&v, sizeof(v)); }
  void update_i64(std::int64_t v) { update(&v, sizeof(v)); }
  void update_int(int v) { update(&v, sizeof(v)); }

  void update_double(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    update_u64(bits);
  }

  template <typename T>
  void update_vec(const std::vector<T>& v) {
    update_u64(v.size());
    if (!v.empty()) update(v.data(), v.size() * sizeof(T));
  }

  void update_str(const std::string& s) {
    update_u64(s.size());
    update(s.data(), s.size());
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace iceberg
