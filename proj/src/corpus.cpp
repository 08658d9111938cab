#include "irmatch/corpus.hpp"

#include <json.hpp>
#include <map>
#include <sstream>

#include "irmatch/error.hpp"

namespace irmatch::corpus {

namespace {

using nlohmann::json;

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            f(json::parse(line));
        } catch (const json::exception& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

std::string write_records(const std::vector<Record>& records) {
    std::string out;
    for (const auto& r : records) {
        out += json{{"doc_id", r.doc_id},
                    {"origin", ir::to_string(r.origin)},
                    {"language_tag", r.language_tag},
                    {"tokens", r.tokens}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::vector<Record> read_records(std::string_view text) {
    std::vector<Record> out;
    for_each_line(text, [&](const json& j) {
        out.push_back({j.at("doc_id").get<std::string>(), ir::parse_origin(j.at("origin").get<std::string>()),
                       j.value("language_tag", std::string("unknown")), j.at("tokens").get<std::vector<std::string>>()});
    });
    return out;
}

std::string write_pairs(const std::vector<PairRecord>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += json{{"binary_id", p.binary_id}, {"source_id", p.source_id}, {"group_id", p.group_id}}.dump();
        out += '\n';
    }
    return out;
}

std::vector<PairRecord> read_pairs(std::string_view text) {
    std::vector<PairRecord> out;
    for_each_line(text, [&](const json& j) {
        out.push_back({j.at("binary_id").get<std::string>(), j.at("source_id").get<std::string>(),
                       j.at("group_id").get<std::string>()});
    });
    return out;
}

Provenance read_provenance(std::string_view ir_text) {
    Provenance p;
    constexpr std::string_view tag = "; irmatch:";
    for (int i = 0; i < 5 && !ir_text.empty(); ++i) {
        const auto nl = ir_text.find('\n');
        std::string_view line = ir_text.substr(0, nl);
        ir_text = nl == std::string_view::npos ? std::string_view{} : ir_text.substr(nl + 1);
        if (!line.starts_with(tag)) continue;
        std::istringstream items{std::string(line.substr(tag.size()))};
        for (std::string item; items >> item;) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) continue;
            const auto key = item.substr(0, eq);
            auto value = item.substr(eq + 1);
            if (key == "origin") p.origin = ir::parse_origin(value);
            else if (key == "language") p.language = std::move(value);
            else if (key == "group") p.group = std::move(value);
        }
        break;
    }
    return p;
}

Record prepare_document(std::string_view ir_text, std::string doc_id, const ir::NormalizePolicy& policy,
                        ir::Origin default_origin, std::string default_language) {
    const auto prov = read_provenance(ir_text);
    const auto doc = ir::normalize(ir::parse_ir_text(ir_text), policy);
    return {std::move(doc_id), prov.origin.value_or(default_origin), prov.language.value_or(std::move(default_language)),
            ir::to_token_stream(doc)};
}

triplet::PairedCorpus build_paired_corpus(const std::vector<Record>& records, const std::vector<PairRecord>& pairs,
                                          const bpe::Vocabulary& vocab) {
    triplet::PairedCorpus out;
    std::map<std::string, int> index;
    std::vector<ir::Origin> origins;
    for (const auto& r : records) {
        if (!index.emplace(r.doc_id, static_cast<int>(out.docs.size())).second) {
            throw Error("duplicate document id '" + r.doc_id + "'");
        }
        origins.push_back(r.origin);
        out.docs.push_back(bpe::encode(vocab, r.tokens));
    }
    auto find = [&](const std::string& id) {
        const auto it = index.find(id);
        if (it == index.end()) throw Error("pair refers to unknown document '" + id + "'");
        return it->second;
    };
    // A synthetic document may stand in for either side.
    auto check = [&](int doc, ir::Origin want, const std::string& id) {
        const auto got = origins[static_cast<std::size_t>(doc)];
        if (got != want && got != ir::Origin::synthetic) {
            throw Error("document '" + id + "' has origin " + std::string(ir::to_string(got)) + ", expected " +
                        std::string(ir::to_string(want)));
        }
        return doc;
    };
    for (const auto& p : pairs) {
        out.pairs.push_back({check(find(p.binary_id), ir::Origin::binary, p.binary_id),
                             check(find(p.source_id), ir::Origin::source, p.source_id), p.group_id});
    }
    return out;
}

}  // namespace irmatch::corpus
