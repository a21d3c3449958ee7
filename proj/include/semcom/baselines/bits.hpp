#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semcom::baselines {

using Bits = std::vector<std::uint8_t>;

struct SourceDecodeResult {
    std::string text;
    // Set when the stream ended inside a symbol; text holds everything up to the
    // last complete symbol.
    bool truncated = false;
};

class SourceCodec {
public:
    virtual ~SourceCodec() = default;
    virtual Bits encode(std::string_view text) const = 0;
    // Never throws on malformed input; reports a partial trailing symbol instead.
    virtual SourceDecodeResult decode_prefix(const Bits& bits) const = 0;
    // Strict decode: throws DecodeError on a truncated stream.
    std::string decode(const Bits& bits) const;
    virtual std::string name() const = 0;
};

}  // namespace semcom::baselines
