#pragma once

// Cosine scoring, threshold decisions and exact top-k search over a
// fingerprinted embedding index.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irmatch/bpe.hpp"
#include "irmatch/encoder.hpp"
#include "irmatch/ir.hpp"

namespace irmatch::match {

using nn::Embedding;
using nn::Vector;

inline constexpr double kDefaultThreshold = 0.8;

/// Throws DimensionMismatch or ZeroVector.
double cosine(const Vector& a, const Vector& b);

struct MatchResult {
    double score;
    bool matched;
};

/// matched is score >= threshold. Throws irmatch::Error if threshold is outside [-1, 1].
MatchResult match_pair(const Vector& a, const Vector& b, double threshold = kDefaultThreshold);

/// Eval-mode embedding of a document given as BPE ids (no specials). The ids
/// are wrapped as [CLS] ids [EOS] and truncated to the model's max_len.
Embedding embed_ids(const nn::EncoderModel& model, std::span<const int> ids);

/// BPE-encodes a normalized word stream and embeds it.
Embedding embed_document(const nn::EncoderModel& model, const bpe::Vocabulary& vocab,
                         std::span<const std::string> words);

struct IndexEntry {
    std::string doc_id;
    Vector embedding;
    ir::Origin origin = ir::Origin::source;
    std::string language_tag;
};

class EmbeddingIndex {
public:
    EmbeddingIndex() = default;
    EmbeddingIndex(std::string model_fingerprint, int dim) : fingerprint_(std::move(model_fingerprint)), dim_(dim) {}

    /// Throws DimensionMismatch when the vector length differs from dim().
    void add(IndexEntry entry);

    const std::string& fingerprint() const { return fingerprint_; }
    int dim() const { return dim_; }
    const std::vector<IndexEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// `irmatch-idx v1` container; see docs/index-format.md.
    std::string serialize() const;
    static EmbeddingIndex parse(std::string_view bytes);

private:
    std::string fingerprint_;
    int dim_ = 0;
    std::vector<IndexEntry> entries_;
};

struct Hit {
    std::string doc_id;
    double score;
};

/// Exact top-k by cosine, descending; ties go to the smaller doc_id.
/// When `model_fingerprint` is given it must equal the index's.
/// Throws EmptyIndex, FingerprintMismatch, DimensionMismatch, irmatch::Error (k < 1).
std::vector<Hit> search(const Vector& query, const EmbeddingIndex& index, int k,
                        std::optional<std::string_view> model_fingerprint = std::nullopt);

}  // namespace irmatch::match
