#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "cognatree/error.hpp"

namespace cognatree {

// 64-bit FNV-1a; used for cache keys and input fingerprints, not security.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 1099511628211ull;
    }
    return *this;
  }
  // Field separator so that ("ab","c") and ("a","bc") differ.
  Fnv1a& field(std::string_view bytes) {
    update(bytes);
    return update(std::string_view("\x1f", 1));
  }
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 1469598103934665603ull;
};

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  Fnv1a h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  return h.hex();
}

}  // namespace cognatree
