#pragma once

#include "semcom/baselines/bits.hpp"

namespace semcom::baselines {

// Fixed 5-bit character code: a-z -> 0..25, space -> 26, then reserved codes
// 27 (substitution), 28 (pad) and 29..31 (spare). Characters outside the
// alphabet are sent as the substitution code and decode as '?'; pad decodes to
// nothing; spare codes (only reachable through channel errors) decode as '?'.
class Fixed5Codec final : public SourceCodec {
public:
    static constexpr int kBitsPerChar = 5;
    static constexpr int kSpace = 26;
    static constexpr int kSubstitution = 27;
    static constexpr int kPad = 28;
    static constexpr char kSubstitutionChar = '?';

    static int code_of(char c);
    Bits encode(std::string_view text) const override;
    SourceDecodeResult decode_prefix(const Bits& bits) const override;
    std::string name() const override { return "fixed5"; }
};

}  // namespace semcom::baselines
