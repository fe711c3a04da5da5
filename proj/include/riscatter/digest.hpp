#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace riscatter {

// 64-bit FNV-1a content digest, reported as 16 hex chars. Used for ensemble
// verification and run-manifest reproducibility checks, not for security.
class Digest {
  public:
    Digest() = default;

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }

    void update(const std::string& s) { update(s.data(), s.size()); }

    void update_double(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        update(&bits, sizeof bits);
    }

    void update_u64(std::uint64_t v) { update(&v, sizeof v); }

    std::uint64_t value() const { return h_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 0; i < 16; ++i) out[15 - i] = digits[(h_ >> (4 * i)) & 0xf];
        return out;
    }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string digest_file_hex(const std::string& path);

}  // namespace riscatter
