#pragma once

// JSON-lines corpus and pair files, and the text-to-record preparation step.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irmatch/bpe.hpp"
#include "irmatch/ir.hpp"
#include "irmatch/triplet.hpp"

namespace irmatch::corpus {

/// One corpus.jsonl line: {doc_id, origin, language_tag, tokens}.
struct Record {
    std::string doc_id;
    ir::Origin origin = ir::Origin::source;
    std::string language_tag;
    std::vector<std::string> tokens;

    friend bool operator==(const Record&, const Record&) = default;
};

/// One pairs.jsonl line: {binary_id, source_id, group_id}.
struct PairRecord {
    std::string binary_id;
    std::string source_id;
    std::string group_id;

    friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

std::string write_records(const std::vector<Record>& records);
/// Throws FormatError naming the offending line.
std::vector<Record> read_records(std::string_view text);

std::string write_pairs(const std::vector<PairRecord>& pairs);
std::vector<PairRecord> read_pairs(std::string_view text);

/// Settings from a `; irmatch: origin=... language=... group=...` comment
/// within the first lines of a .ll file.
struct Provenance {
    std::optional<ir::Origin> origin;
    std::optional<std::string> language;
    std::optional<std::string> group;
};

Provenance read_provenance(std::string_view ir_text);

/// Parses, normalizes and flattens one document. Unknown opcodes are kept.
Record prepare_document(std::string_view ir_text, std::string doc_id, const ir::NormalizePolicy& policy,
                        ir::Origin default_origin = ir::Origin::source, std::string default_language = "unknown");

/// BPE-encodes every record and resolves pair ids to document indices.
/// Throws irmatch::Error for duplicate ids, a pair naming an unknown document, or a
/// pair whose sides have the wrong origin (synthetic is accepted on either side).
triplet::PairedCorpus build_paired_corpus(const std::vector<Record>& records, const std::vector<PairRecord>& pairs,
                                          const bpe::Vocabulary& vocab);

}  // namespace irmatch::corpus
