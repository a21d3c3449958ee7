#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "semcom/baselines/bits.hpp"

namespace semcom::baselines {

// Canonical Huffman code over bytes. An optional escape symbol covers bytes
// outside the trained alphabet: escape followed by the raw 8-bit byte.
class HuffmanCodebook final : public SourceCodec {
public:
    static constexpr int kEscape = 256;

    // weights: byte -> frequency (> 0). with_escape adds the escape symbol with
    // weight equal to the smallest byte weight.
    static HuffmanCodebook from_frequencies(const std::map<unsigned char, double>& weights,
                                            bool with_escape);
    static HuffmanCodebook from_text(const std::vector<std::string>& corpus);

    Bits encode(std::string_view text) const override;
    SourceDecodeResult decode_prefix(const Bits& bits) const override;
    std::string name() const override { return "huffman"; }

    // Code length per symbol (bytes 0..255, kEscape); absent when unused.
    std::optional<int> code_length(int symbol) const;
    const Bits& code(int symbol) const;
    std::size_t alphabet_size() const { return codes_.size(); }
    bool has_escape() const { return codes_.contains(kEscape); }

    // Expected bits per character under the given weights (normalized internally).
    double mean_length(const std::map<unsigned char, double>& weights) const;

private:
    std::map<int, Bits> codes_;
    // (length, canonical code value) -> symbol
    std::map<std::pair<int, std::uint64_t>, int> decode_table_;
    int max_length_ = 0;
};

}  // namespace semcom::baselines
