#include "irmatch/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "irmatch/error.hpp"
#include "irmatch/keyvalue.hpp"

namespace irmatch::match {

namespace {

constexpr std::string_view kIndexMagic = "irmatch-idx v1\n";

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_string(std::string& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        const auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
        return v;
    }

    std::string_view take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw FormatError("index file truncated");
        const auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::string_view line() {
        const auto nl = bytes_.find('\n', pos_);
        if (nl == std::string_view::npos) throw FormatError("index header truncated");
        const auto s = bytes_.substr(pos_, nl - pos_);
        pos_ = nl + 1;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string header_value(Reader& in, std::string_view key) {
    const auto line = in.line();
    const auto kv = parse_key_values(line);
    if (kv.size() != 1 || kv[0].first != key) throw FormatError("index header: expected '" + std::string(key) + "'");
    return kv[0].second;
}

}  // namespace

double cosine(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cannot compare vectors of length " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of an all-zero vector is undefined");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

MatchResult match_pair(const Vector& a, const Vector& b, double threshold) {
    if (!(threshold >= -1.0 && threshold <= 1.0)) throw Error("threshold must lie in [-1, 1]");
    const double score = cosine(a, b);
    return {score, score >= threshold};
}

Embedding embed_ids(const nn::EncoderModel& model, std::span<const int> ids) {
    const auto input = bpe::build_model_input(ids, std::nullopt, model.config.max_len);
    const auto n = static_cast<std::size_t>(input.length);
    const std::span<const int> live(input.ids.data(), n);
    const std::span<const std::uint8_t> mask(input.attention_mask.data(), n);
    const auto hidden = nn::forward(model, live, mask, false, nullptr);
    return nn::pool(hidden, mask, model.config.pooling);
}

Embedding embed_document(const nn::EncoderModel& model, const bpe::Vocabulary& vocab,
                         std::span<const std::string> words) {
    const auto ids = bpe::encode(vocab, words);
    return embed_ids(model, ids);
}

void EmbeddingIndex::add(IndexEntry entry) {
    if (entry.embedding.size() != dim_) {
        throw DimensionMismatch("index holds " + std::to_string(dim_) + "-dim vectors, got " +
                                std::to_string(entry.embedding.size()));
    }
    entries_.push_back(std::move(entry));
}

std::string EmbeddingIndex::serialize() const {
    std::string out(kIndexMagic);
    out += "fingerprint=" + fingerprint_ + "\n";
    out += "dim=" + std::to_string(dim_) + "\n";
    out += "count=" + std::to_string(entries_.size()) + "\n";
    for (const auto& e : entries_) {
        put_string(out, e.doc_id);
        put_string(out, ir::to_string(e.origin));
        put_string(out, e.language_tag);
        for (Eigen::Index i = 0; i < e.embedding.size(); ++i) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.embedding(i))));
        }
    }
    return out;
}

EmbeddingIndex EmbeddingIndex::parse(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(kIndexMagic.size()) != kIndexMagic) throw FormatError("not an irmatch-idx v1 file");
    std::string fp = header_value(in, "fingerprint");
    const auto dim = parse_int_value("dim", header_value(in, "dim"));
    const auto count = parse_int_value("count", header_value(in, "count"));
    if (dim <= 0 || count < 0) throw FormatError("index header has invalid dim or count");

    EmbeddingIndex index(std::move(fp), static_cast<int>(dim));
    for (long long r = 0; r < count; ++r) {
        IndexEntry e;
        e.doc_id = std::string(in.take(in.u32()));
        e.origin = ir::parse_origin(in.take(in.u32()));
        e.language_tag = std::string(in.take(in.u32()));
        e.embedding.resize(dim);
        for (long long i = 0; i < dim; ++i) e.embedding(i) = static_cast<double>(std::bit_cast<float>(in.u32()));
        index.add(std::move(e));
    }
    if (!in.done()) throw FormatError("trailing bytes after the last index record");
    return index;
}

std::vector<Hit> search(const Vector& query, const EmbeddingIndex& index, int k,
                        std::optional<std::string_view> model_fingerprint) {
    if (k < 1) throw Error("top-k must be at least 1");
    if (index.size() == 0) throw EmptyIndex("cannot search an empty index");
    if (model_fingerprint && *model_fingerprint != index.fingerprint()) {
        throw FingerprintMismatch("query model " + std::string(*model_fingerprint) + " differs from index model " +
                                  index.fingerprint());
    }
    std::vector<Hit> hits;
    hits.reserve(index.size());
    for (const auto& e : index.entries()) hits.push_back({e.doc_id, cosine(query, e.embedding)});
    const auto keep = std::min(hits.size(), static_cast<std::size_t>(k));
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                      [](const Hit& a, const Hit& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.doc_id < b.doc_id;
                      });
    hits.resize(keep);
    return hits;
}

}  // namespace irmatch::match
