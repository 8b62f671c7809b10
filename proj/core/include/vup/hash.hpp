#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace vup {

// 64-bit FNV-1a; used only for provenance fingerprints, not security.
class Fnv1a {
public:
    Fnv1a& bytes(const void* data, std::size_t size) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& text(std::string_view s) noexcept {
        bytes(s.data(), s.size());
        return byte_(0xff);
    }
    Fnv1a& real(double v) noexcept {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return integer(bits);
    }
    Fnv1a& integer(std::uint64_t v) noexcept {
        for (int i = 0; i < 8; ++i) byte_(static_cast<unsigned char>(v >> (8 * i)));
        return *this;
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    Fnv1a& byte_(unsigned char b) noexcept { return bytes(&b, 1); }
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace vup
