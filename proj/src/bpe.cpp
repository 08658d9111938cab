#include "irmatch/bpe.hpp"

#include <algorithm>
#include <set>

#include "irmatch/error.hpp"

namespace irmatch::bpe {

namespace {

std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;  // stray continuation byte: keep it as its own unit
}

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); i += utf8_length(static_cast<unsigned char>(s[i]))) ++n;
    return n;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default: out += s[i];
        }
    }
    return out;
}

/// Applies merges to one sequence of units in priority order.
void apply_merges(const Vocabulary& vocab, std::vector<std::string>& units) {
    while (units.size() > 1) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i + 1 < units.size(); ++i) {
            const auto r = vocab.rank(units[i], units[i + 1]);
            if (r && (!best || *r < *best)) best = r;
        }
        if (!best) break;
        const auto& [left, right] = vocab.merges()[*best];
        std::vector<std::string> next;
        next.reserve(units.size());
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (i + 1 < units.size() && units[i] == left && units[i + 1] == right) {
                next.push_back(left + right);
                ++i;
            } else {
                next.push_back(std::move(units[i]));
            }
        }
        units = std::move(next);
    }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> base, std::vector<Merge> merges)
    : merges_(std::move(merges)) {
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    auto add = [this](const std::string& token) {
        if (ids_.try_emplace(token, static_cast<int>(tokens_.size())).second) {
            tokens_.push_back(token);
        }
    };
    for (auto s : kSpecialTokens) add(std::string(s));
    for (const auto& b : base) {
        if (b != kEndOfWord && code_points(b) > 1) atomic_.insert(b);
        add(b);
    }
    for (std::size_t r = 0; r < merges_.size(); ++r) {
        ranks_.try_emplace(merges_[r], r);
        add(merges_[r].first + merges_[r].second);
    }
}

std::optional<int> Vocabulary::id(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw UnknownId("token id " + std::to_string(id) + " outside vocabulary");
    return tokens_[static_cast<std::size_t>(id)];
}

std::optional<std::size_t> Vocabulary::rank(const std::string& left, const std::string& right) const {
    const auto it = ranks_.find(Merge{left, right});
    if (it == ranks_.end()) return std::nullopt;
    return it->second;
}

std::string Vocabulary::serialize() const {
    std::string out = "irmatch-bpe v1\n";
    for (const auto& [l, r] : merges_) out += escape(l) + "\t" + escape(r) + "\n";
    out += "#tokens\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out += escape(tokens_[i]) + "\t" + std::to_string(i) + "\n";
    }
    return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    if (lines.empty() || lines[0] != "irmatch-bpe v1") throw FormatError("missing 'irmatch-bpe v1' header");

    std::vector<Merge> merges;
    std::size_t i = 1;
    for (; i < lines.size() && lines[i] != "#tokens"; ++i) {
        const auto tab = lines[i].find('\t');
        if (tab == std::string_view::npos) {
            throw FormatError("vocabulary line " + std::to_string(i + 1) + ": expected left<TAB>right");
        }
        merges.emplace_back(unescape(lines[i].substr(0, tab)), unescape(lines[i].substr(tab + 1)));
    }
    if (i == lines.size()) throw FormatError("missing '#tokens' section");

    std::vector<std::string> listed;
    for (++i; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto tab = lines[i].rfind('\t');
        if (tab == std::string_view::npos) {
            throw FormatError("vocabulary line " + std::to_string(i + 1) + ": expected token<TAB>id");
        }
        const std::string id_text(lines[i].substr(tab + 1));
        if (id_text != std::to_string(listed.size())) {
            throw FormatError("vocabulary ids must be dense and ordered, got " + id_text);
        }
        listed.push_back(unescape(lines[i].substr(0, tab)));
    }

    std::set<std::string> merged;
    for (const auto& [l, r] : merges) merged.insert(l + r);
    std::vector<std::string> base;
    for (std::size_t k = kNumSpecials; k < listed.size(); ++k) {
        if (!merged.contains(listed[k])) base.push_back(listed[k]);
    }
    Vocabulary vocab(std::move(base), std::move(merges));
    if (vocab.tokens_ != listed) throw FormatError("token table does not match the merge list");
    return vocab;
}

std::vector<std::string> split_word(std::string_view word) {
    std::vector<std::string> units;
    for (std::size_t i = 0; i < word.size();) {
        const std::size_t n = std::min(utf8_length(static_cast<unsigned char>(word[i])), word.size() - i);
        units.emplace_back(word.substr(i, n));
        i += n;
    }
    units.emplace_back(kEndOfWord);
    return units;
}

Vocabulary train_bpe(const std::vector<std::vector<std::string>>& corpus, int vocab_size, int min_freq,
                     const std::vector<std::string>& atomic) {
    const std::set<std::string> atomic_set(atomic.begin(), atomic.end());
    std::map<std::string, long long> word_counts;
    for (const auto& stream : corpus) {
        for (const auto& w : stream) {
            if (!atomic_set.contains(w)) ++word_counts[w];
        }
    }
    if (word_counts.empty()) throw EmptyCorpus("no words to learn merges from");

    struct Word {
        std::vector<std::string> units;
        long long count;
    };
    std::vector<Word> words;
    std::set<std::string> base(atomic_set.begin(), atomic_set.end());
    for (const auto& [w, c] : word_counts) {
        auto units = split_word(w);
        base.insert(units.begin(), units.end());
        words.push_back({std::move(units), c});
    }
    const int minimum = kNumSpecials + static_cast<int>(base.size());
    if (vocab_size < minimum) {
        throw VocabTooSmall("vocab_size " + std::to_string(vocab_size) + " is below the " +
                            std::to_string(minimum) + " specials and base symbols");
    }

    std::set<std::string> known(base.begin(), base.end());
    for (auto s : kSpecialTokens) known.insert(std::string(s));
    int size = minimum;
    std::vector<Merge> merges;
    std::set<Merge> banned;
    while (size < vocab_size) {
        std::map<Merge, long long> pairs;
        for (const auto& w : words) {
            for (std::size_t i = 0; i + 1 < w.units.size(); ++i) pairs[{w.units[i], w.units[i + 1]}] += w.count;
        }
        const Merge* best = nullptr;
        long long best_count = 0;
        for (const auto& [pair, count] : pairs) {  // map order gives the lexicographic tie-break
            if (count > best_count && !banned.contains(pair)) {
                best = &pair;
                best_count = count;
            }
        }
        if (!best || best_count < min_freq) break;
        const std::string joined = best->first + best->second;
        if (std::find(kSpecialTokens.begin(), kSpecialTokens.end(), joined) != kSpecialTokens.end() ||
            atomic_set.contains(joined)) {
            banned.insert(*best);
            continue;
        }
        const Merge merge = *best;
        for (auto& w : words) {
            std::vector<std::string> next;
            next.reserve(w.units.size());
            for (std::size_t i = 0; i < w.units.size(); ++i) {
                if (i + 1 < w.units.size() && w.units[i] == merge.first && w.units[i + 1] == merge.second) {
                    next.push_back(joined);
                    ++i;
                } else {
                    next.push_back(std::move(w.units[i]));
                }
            }
            w.units = std::move(next);
        }
        merges.push_back(merge);
        if (known.insert(joined).second) ++size;
    }
    return Vocabulary(std::vector<std::string>(base.begin(), base.end()), std::move(merges));
}

std::vector<int> encode(const Vocabulary& vocab, std::span<const std::string> words) {
    std::unordered_map<std::string, std::vector<int>> cache;
    std::vector<int> out;
    for (const auto& w : words) {
        if (vocab.is_atomic(w)) {
            out.push_back(*vocab.id(w));
            continue;
        }
        auto [it, inserted] = cache.try_emplace(w);
        if (inserted) {
            auto units = split_word(w);
            apply_merges(vocab, units);
            for (const auto& u : units) it->second.push_back(vocab.id(u).value_or(kUnk));
        }
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

std::vector<std::string> decode(const Vocabulary& vocab, std::span<const int> ids) {
    std::vector<std::string> out;
    std::string current;
    bool open = false;
    auto flush = [&] {
        if (open) out.push_back(std::move(current));
        current.clear();
        open = false;
    };
    for (int id : ids) {
        const std::string& tok = vocab.token(id);
        if (vocab.is_special(id) || vocab.is_atomic(tok)) {
            flush();
            out.push_back(tok);
            continue;
        }
        current += tok;
        open = true;
        if (tok.ends_with(kEndOfWord)) {
            current.resize(current.size() - kEndOfWord.size());
            flush();
        }
    }
    flush();
    return out;
}

TokenSequence build_model_input(std::span<const int> a, std::optional<std::span<const int>> b, int max_len) {
    if (max_len < 4) throw LengthExceeded("max_len must be at least 4");
    const std::size_t specials = b ? 3 : 2;
    const std::size_t budget = static_cast<std::size_t>(max_len) - specials;
    std::size_t keep_a = a.size();
    std::size_t keep_b = b ? b->size() : 0;
    while (keep_a + keep_b > budget) {
        if (keep_a > keep_b) {
            --keep_a;
        } else {
            --keep_b;
        }
    }

    TokenSequence seq;
    seq.ids.reserve(static_cast<std::size_t>(max_len));
    seq.ids.push_back(kCls);
    seq.ids.insert(seq.ids.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(keep_a));
    if (b) {
        seq.ids.push_back(kSep);
        seq.ids.insert(seq.ids.end(), b->begin(), b->begin() + static_cast<std::ptrdiff_t>(keep_b));
    }
    seq.ids.push_back(kEos);
    seq.length = static_cast<int>(seq.ids.size());
    seq.attention_mask.assign(seq.ids.size(), 1);
    seq.ids.resize(static_cast<std::size_t>(max_len), kPad);
    seq.attention_mask.resize(static_cast<std::size_t>(max_len), 0);
    return seq;
}

}  // namespace irmatch::bpe
