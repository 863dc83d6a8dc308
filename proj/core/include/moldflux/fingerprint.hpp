#pragma once

#include <cstdint>
#include <string>

namespace moldflux {

// FNV-1a over the canonical text of the inputs that shape an offline dataset.
std::uint64_t fnv1a(const std::string& text);
std::string to_hex(std::uint64_t v);

class FingerprintBuilder {
 public:
  FingerprintBuilder& add(const std::string& key, double value);
  FingerprintBuilder& add(const std::string& key, std::int64_t value);
  FingerprintBuilder& add(const std::string& key, const std::string& value);
  std::string digest() const;
  const std::string& canonical_text() const { return text_; }

 private:
  std::string text_;
};

}  // namespace moldflux
