#pragma once

// Byte-pair encoding over normalized IR words.
//
// Words are split into code points plus a trailing end-of-word unit `</w>`,
// so merges never cross word boundaries and decoding can restore them.
// Sentinels such as `<i>` are atomic: they enter the vocabulary whole.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace irmatch::bpe {

enum SpecialId : int { kCls = 0, kSep = 1, kEos = 2, kMask = 3, kPad = 4, kUnk = 5 };
inline constexpr int kNumSpecials = 6;
inline constexpr std::array<std::string_view, kNumSpecials> kSpecialTokens = {
    "[CLS]", "[SEP]", "[EOS]", "[MASK]", "[PAD]", "[UNK]"};
inline constexpr std::string_view kEndOfWord = "</w>";

using Merge = std::pair<std::string, std::string>;

class Vocabulary {
public:
    Vocabulary() = default;

    /// `base` holds every unmerged symbol (code points, `</w>`, atomic words).
    Vocabulary(std::vector<std::string> base, std::vector<Merge> merges);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<Merge>& merges() const { return merges_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::optional<int> id(std::string_view token) const;
    /// Throws UnknownId for ids outside [0, size()).
    const std::string& token(int id) const;

    bool is_atomic(std::string_view word) const { return atomic_.contains(word); }
    bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
    /// Merge priority of (left, right), or nullopt if the pair is never merged.
    std::optional<std::size_t> rank(const std::string& left, const std::string& right) const;

    /// Text form: `irmatch-bpe v1`, merges as `left<TAB>right`, then `#tokens`.
    std::string serialize() const;
    static Vocabulary parse(std::string_view text);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_ && a.merges_ == b.merges_;
    }

private:
    std::vector<std::string> tokens_;
    std::vector<Merge> merges_;
    std::unordered_map<std::string, int> ids_;
    std::map<Merge, std::size_t> ranks_;
    std::set<std::string, std::less<>> atomic_;
};

inline const std::vector<std::string>& default_atomic_words() {
    static const std::vector<std::string> words = {"<i>", "<f>"};
    return words;
}

/// Greedy most-frequent-pair merging until `vocab_size` tokens exist or no
/// pair reaches `min_freq`. Ties go to the lexicographically smallest pair.
/// Throws EmptyCorpus or VocabTooSmall.
Vocabulary train_bpe(const std::vector<std::vector<std::string>>& corpus, int vocab_size,
                     int min_freq, const std::vector<std::string>& atomic = default_atomic_words());

/// Splits a word into its initial BPE units.
std::vector<std::string> split_word(std::string_view word);

std::vector<int> encode(const Vocabulary& vocab, std::span<const std::string> words);
std::vector<std::string> decode(const Vocabulary& vocab, std::span<const int> ids);

struct TokenSequence {
    std::vector<int> ids;
    int length = 0;  // non-pad positions
    std::vector<std::uint8_t> attention_mask;
};

/// [CLS] a ([SEP] b) [EOS] then [PAD] up to max_len. The longer segment is
/// truncated first (segment b on ties). max_len must be at least 4.
TokenSequence build_model_input(std::span<const int> a, std::optional<std::span<const int>> b,
                                int max_len);

}  // namespace irmatch::bpe
