#include "semcom/baselines/fixed5.hpp"

namespace semcom::baselines {

int Fixed5Codec::code_of(char c) {
    if (c >= 'a' && c <= 'z') return c - 'a';
    if (c == ' ') return kSpace;
    return kSubstitution;
}

Bits Fixed5Codec::encode(std::string_view text) const {
    Bits out;
    out.reserve(text.size() * kBitsPerChar);
    for (char c : text) {
        const int code = code_of(c);
        for (int i = kBitsPerChar - 1; i >= 0; --i)
            out.push_back(static_cast<std::uint8_t>((code >> i) & 1));
    }
    return out;
}

SourceDecodeResult Fixed5Codec::decode_prefix(const Bits& bits) const {
    SourceDecodeResult r;
    const std::size_t whole = bits.size() / kBitsPerChar;
    for (std::size_t s = 0; s < whole; ++s) {
        int code = 0;
        for (int i = 0; i < kBitsPerChar; ++i) code = (code << 1) | (bits[s * kBitsPerChar + i] & 1);
        if (code < 26)
            r.text.push_back(static_cast<char>('a' + code));
        else if (code == kSpace)
            r.text.push_back(' ');
        else if (code != kPad)
            r.text.push_back(kSubstitutionChar);
    }
    r.truncated = bits.size() % kBitsPerChar != 0;
    return r;
}

}  // namespace semcom::baselines
