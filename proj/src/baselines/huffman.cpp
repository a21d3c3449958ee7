#include "semcom/baselines/huffman.hpp"

#include <algorithm>
#include <queue>

#include "semcom/errors.hpp"

namespace semcom::baselines {

std::string SourceCodec::decode(const Bits& bits) const {
    auto r = decode_prefix(bits);
    if (r.truncated) throw DecodeError(name() + ": bitstream ends inside a symbol");
    return std::move(r.text);
}

namespace {

struct Node {
    double weight;
    int order;  // creation order; deterministic tie-break
    int left = -1;
    int right = -1;
    int symbol = -1;
};

void write_bits(Bits& out, std::uint64_t value, int n) {
    for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

}  // namespace

HuffmanCodebook HuffmanCodebook::from_frequencies(const std::map<unsigned char, double>& weights,
                                                  bool with_escape) {
    std::vector<std::pair<int, double>> symbols;
    double min_weight = 0.0;
    for (const auto& [c, w] : weights) {
        if (!(w > 0.0)) continue;
        symbols.emplace_back(c, w);
        min_weight = symbols.size() == 1 ? w : std::min(min_weight, w);
    }
    if (with_escape) symbols.emplace_back(kEscape, symbols.empty() ? 1.0 : min_weight);
    if (symbols.empty()) throw ConfigError("huffman: empty alphabet");

    std::map<int, int> lengths;
    if (symbols.size() == 1) {
        lengths[symbols.front().first] = 1;
    } else {
        std::vector<Node> nodes;
        auto cmp = [&](int a, int b) {
            if (nodes[a].weight != nodes[b].weight) return nodes[a].weight > nodes[b].weight;
            return nodes[a].order > nodes[b].order;
        };
        std::priority_queue<int, std::vector<int>, decltype(cmp)> heap(cmp);
        for (const auto& [sym, w] : symbols) {
            nodes.push_back({w, static_cast<int>(nodes.size()), -1, -1, sym});
            heap.push(static_cast<int>(nodes.size()) - 1);
        }
        while (heap.size() > 1) {
            const int a = heap.top();
            heap.pop();
            const int b = heap.top();
            heap.pop();
            nodes.push_back({nodes[a].weight + nodes[b].weight, static_cast<int>(nodes.size()), a, b});
            heap.push(static_cast<int>(nodes.size()) - 1);
        }
        std::vector<std::pair<int, int>> stack{{heap.top(), 0}};
        while (!stack.empty()) {
            auto [n, depth] = stack.back();
            stack.pop_back();
            if (nodes[n].symbol >= 0) {
                lengths[nodes[n].symbol] = depth;
                continue;
            }
            stack.emplace_back(nodes[n].left, depth + 1);
            stack.emplace_back(nodes[n].right, depth + 1);
        }
    }

    // Canonical assignment: sort by (length, symbol).
    std::vector<std::pair<int, int>> order;  // (length, symbol)
    for (const auto& [sym, len] : lengths) order.emplace_back(len, sym);
    std::sort(order.begin(), order.end());
    if (order.back().first > 63) throw ConfigError("huffman: code length exceeds 63 bits");

    HuffmanCodebook cb;
    std::uint64_t code = 0;
    int prev_len = order.front().first;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto [len, sym] = order[i];
        if (i > 0) code = (code + 1) << (len - prev_len);
        prev_len = len;
        Bits bits;
        write_bits(bits, code, len);
        cb.codes_[sym] = std::move(bits);
        cb.decode_table_[{len, code}] = sym;
        cb.max_length_ = std::max(cb.max_length_, len);
    }
    return cb;
}

HuffmanCodebook HuffmanCodebook::from_text(const std::vector<std::string>& corpus) {
    std::map<unsigned char, double> counts;
    for (const auto& s : corpus)
        for (char c : s) counts[static_cast<unsigned char>(c)] += 1.0;
    return from_frequencies(counts, true);
}

std::optional<int> HuffmanCodebook::code_length(int symbol) const {
    auto it = codes_.find(symbol);
    if (it == codes_.end()) return std::nullopt;
    return static_cast<int>(it->second.size());
}

const Bits& HuffmanCodebook::code(int symbol) const {
    auto it = codes_.find(symbol);
    if (it == codes_.end()) throw RangeError("huffman: symbol has no code");
    return it->second;
}

Bits HuffmanCodebook::encode(std::string_view text) const {
    Bits out;
    for (char ch : text) {
        const int c = static_cast<unsigned char>(ch);
        auto it = codes_.find(c);
        if (it != codes_.end()) {
            out.insert(out.end(), it->second.begin(), it->second.end());
            continue;
        }
        auto esc = codes_.find(kEscape);
        if (esc == codes_.end())
            throw RangeError("huffman: character outside the alphabet and no escape symbol");
        out.insert(out.end(), esc->second.begin(), esc->second.end());
        write_bits(out, static_cast<std::uint64_t>(c), 8);
    }
    return out;
}

SourceDecodeResult HuffmanCodebook::decode_prefix(const Bits& bits) const {
    SourceDecodeResult r;
    std::size_t i = 0;
    while (i < bits.size()) {
        std::uint64_t code = 0;
        int len = 0;
        int sym = -1;
        std::size_t j = i;
        while (j < bits.size() && len < max_length_) {
            code = (code << 1) | (bits[j++] & 1U);
            ++len;
            auto it = decode_table_.find({len, code});
            if (it != decode_table_.end()) {
                sym = it->second;
                break;
            }
        }
        if (sym < 0) {
            // Either the stream ran out mid-symbol or (for incomplete codes) no
            // codeword matches; both leave an undecodable tail.
            r.truncated = true;
            return r;
        }
        if (sym == kEscape) {
            if (j + 8 > bits.size()) {
                r.truncated = true;
                return r;
            }
            unsigned v = 0;
            for (int k = 0; k < 8; ++k) v = (v << 1) | (bits[j++] & 1U);
            r.text.push_back(static_cast<char>(v));
        } else {
            r.text.push_back(static_cast<char>(sym));
        }
        i = j;
    }
    return r;
}

double HuffmanCodebook::mean_length(const std::map<unsigned char, double>& weights) const {
    double total = 0.0, acc = 0.0;
    for (const auto& [c, w] : weights) {
        total += w;
        if (auto len = code_length(c))
            acc += w * *len;
        else
            acc += w * (*code_length(kEscape) + 8);
    }
    return total > 0.0 ? acc / total : 0.0;
}

}  // namespace semcom::baselines
