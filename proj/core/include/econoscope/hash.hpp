#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace econoscope {

/// 64-bit FNV-1a, used for data fingerprints and model checksums.
class Fnv1a {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 0x100000001B3ULL;
        }
    }
    template <typename T>
    void update_value(const T& value) noexcept {
        char buf[sizeof(T)];
        std::memcpy(buf, &value, sizeof(T));
        update(std::string_view(buf, sizeof(T)));
    }
    std::uint64_t digest() const noexcept { return hash_; }
    std::string hex() const;

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline std::string Fnv1a::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = hash_;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::string fnv1a_hex(std::string_view bytes) {
    Fnv1a h;
    h.update(bytes);
    return h.hex();
}

}  // namespace econoscope
