#include "moldflux/fingerprint.hpp"

#include <cstdio>

namespace moldflux {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

FingerprintBuilder& FingerprintBuilder::add(const std::string& key, double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  text_ += key;
  text_ += '=';
  text_ += buf;
  text_ += ';';
  return *this;
}

FingerprintBuilder& FingerprintBuilder::add(const std::string& key, std::int64_t value) {
  text_ += key;
  text_ += '=';
  text_ += std::to_string(value);
  text_ += ';';
  return *this;
}

FingerprintBuilder& FingerprintBuilder::add(const std::string& key, const std::string& value) {
  text_ += key;
  text_ += '=';
  text_ += value;
  text_ += ';';
  return *this;
}

std::string FingerprintBuilder::digest() const { return to_hex(fnv1a(text_)); }

}  // namespace moldflux
