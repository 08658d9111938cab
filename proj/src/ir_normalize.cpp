#include <algorithm>
#include <map>
#include <string>

#include "irmatch/error.hpp"
#include "irmatch/ir.hpp"
#include "irmatch/keyvalue.hpp"

namespace irmatch::ir {

namespace {

/// First-seen renaming table, e.g. %a -> %v0, %b -> %v1.
class Renamer {
public:
    explicit Renamer(std::string prefix) : prefix_(std::move(prefix)) {}

    const std::string& operator()(const std::string& name) {
        auto [it, inserted] = names_.try_emplace(name);
        if (inserted) it->second = prefix_ + std::to_string(names_.size() - 1);
        return it->second;
    }

    const std::string* find(const std::string& name) const {
        const auto it = names_.find(name);
        return it == names_.end() ? nullptr : &it->second;
    }

private:
    std::string prefix_;
    std::map<std::string, std::string> names_;
};

bool denied(const std::string& name, const std::vector<std::string>& denylist) {
    return std::any_of(denylist.begin(), denylist.end(), [&](const std::string& pattern) {
        if (!pattern.empty() && pattern.back() == '*') {
            return name.starts_with(std::string_view(pattern).substr(0, pattern.size() - 1));
        }
        return name == pattern;
    });
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '$' || c == '.' ||
           c == '_';
}

/// Rewrites every `%name` inside a compact type string through `types`.
std::string rewrite_type_names(const std::string& type, const Renamer& types) {
    std::string out;
    std::size_t i = 0;
    while (i < type.size()) {
        if (type[i] != '%') {
            out += type[i++];
            continue;
        }
        std::size_t j = i + 1;
        if (j < type.size() && type[j] == '"') {
            j = type.find('"', j + 1);
            j = j == std::string::npos ? type.size() : j + 1;
        } else {
            while (j < type.size() && is_name_char(type[j])) ++j;
        }
        const std::string name = type.substr(i, j - i);
        const std::string* renamed = types.find(name);
        out += renamed ? *renamed : name;
        i = j;
    }
    return out;
}

bool is_intrinsic(const std::string& global) { return global.starts_with("@llvm."); }

}  // namespace

std::size_t IRFunction::instruction_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.instructions.size();
    return n;
}

std::size_t IRDocument::instruction_count() const {
    std::size_t n = 0;
    for (const auto& f : functions) n += f.instruction_count();
    return n;
}

std::vector<std::string> IRInstruction::operand_tokens() const {
    std::vector<std::string> out;
    if (result) out.push_back(*result);
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::type || t.kind == TokenKind::punct) continue;
        if (t.kind == TokenKind::metadata && t.text == ",") continue;
        out.push_back(t.text);
    }
    return out;
}

std::vector<std::string> IRInstruction::type_tokens() const {
    std::vector<std::string> out;
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::type) out.push_back(t.text);
    }
    return out;
}

IRDocument normalize(const IRDocument& doc, const NormalizePolicy& policy) {
    IRDocument out;
    out.doc_id = doc.doc_id;
    out.origin = doc.origin;
    out.language_tag = doc.language_tag;
    out.side_channel = doc.side_channel;
    out.unknown_opcodes = doc.unknown_opcodes;

    Renamer types("%T");
    for (const auto& t : doc.named_types) {
        out.named_types.push_back(policy.rename_globals ? types(t) : t);
    }
    Renamer globals("@g");

    for (const auto& src_fn : doc.functions) {
        if (denied(src_fn.source_name, policy.function_denylist)) continue;
        IRFunction fn;
        fn.canonical_name = "fn" + std::to_string(out.functions.size());
        fn.source_name = src_fn.source_name;

        std::map<std::string, std::string> labels;
        for (std::size_t i = 0; i < src_fn.blocks.size(); ++i) {
            if (!src_fn.blocks[i].source_label.empty()) {
                labels[src_fn.blocks[i].source_label] = "%bb" + std::to_string(i);
            }
        }
        Renamer registers("%v");
        auto local = [&](const std::string& name) {
            return policy.rename_registers ? registers(name) : name;
        };
        for (const auto& p : src_fn.params) fn.params.push_back(local(p));

        for (std::size_t b = 0; b < src_fn.blocks.size(); ++b) {
            const auto& src_block = src_fn.blocks[b];
            IRBlock block;
            block.canonical_label = "bb" + std::to_string(b);
            block.source_label = policy.rename_registers && !src_block.source_label.empty()
                                     ? labels[src_block.source_label]
                                     : src_block.source_label;
            for (const auto& src_inst : src_block.instructions) {
                IRInstruction inst;
                inst.opcode = src_inst.opcode;
                inst.known_opcode = src_inst.known_opcode;
                inst.line = src_inst.line;
                if (src_inst.result) inst.result = local(*src_inst.result);
                for (const auto& tok : src_inst.tokens) {
                    IRToken t = tok;
                    switch (tok.kind) {
                        case TokenKind::type:
                            if (!policy.keep_opcode_types) continue;
                            if (policy.rename_globals) t.text = rewrite_type_names(tok.text, types);
                            break;
                        case TokenKind::local: t.text = local(tok.text); break;
                        case TokenKind::label:
                            if (policy.rename_registers) t.text = labels.at(tok.text);
                            break;
                        case TokenKind::global:
                            if (policy.rename_globals && !is_intrinsic(tok.text)) t.text = globals(tok.text);
                            break;
                        case TokenKind::int_literal:
                            if (policy.fold_constants_to_class) t.text = kIntClass;
                            break;
                        case TokenKind::float_literal:
                            if (policy.fold_constants_to_class) t.text = kFloatClass;
                            break;
                        case TokenKind::string_literal:
                            if (policy.fold_constants_to_class) t.text = kStringClass;
                            break;
                        case TokenKind::metadata:
                            if (policy.strip_metadata) continue;
                            break;
                        case TokenKind::keyword:
                        case TokenKind::punct: break;
                    }
                    inst.tokens.push_back(std::move(t));
                }
                block.instructions.push_back(std::move(inst));
            }
            fn.blocks.push_back(std::move(block));
        }
        out.functions.push_back(std::move(fn));
    }
    return out;
}

std::vector<std::string> to_token_stream(const IRDocument& doc) {
    std::vector<std::string> out;
    for (std::size_t f = 0; f < doc.functions.size(); ++f) {
        if (f > 0) out.emplace_back(kFunctionSentinel);
        bool first = true;
        for (const auto& block : doc.functions[f].blocks) {
            for (const auto& inst : block.instructions) {
                if (!first) out.emplace_back(kInstructionSentinel);
                first = false;
                out.push_back(inst.opcode);
                for (auto& t : inst.type_tokens()) out.push_back(std::move(t));
                for (auto& t : inst.operand_tokens()) out.push_back(std::move(t));
            }
        }
    }
    return out;
}

std::string render_instruction(const IRInstruction& inst) {
    std::string out;
    if (inst.result) out = *inst.result + " = ";
    out += inst.opcode;
    const IRToken* prev = nullptr;
    for (const auto& t : inst.tokens) {
        const bool tight_before = (t.kind == TokenKind::punct || t.kind == TokenKind::metadata) &&
                                  (t.text == "," || t.text == ")" || t.text == "]" || t.text == "}" ||
                                   t.text == ">");
        const bool tight_after = prev && prev->kind == TokenKind::punct &&
                                 (prev->text == "(" || prev->text == "[" || prev->text == "<");
        const bool call_paren = prev && prev->kind == TokenKind::global && t.text == "(";
        if (!tight_before && !tight_after && !call_paren) out += ' ';
        out += t.text;
        prev = &t;
    }
    return out;
}

NormalizePolicy parse_policy(std::string_view text) {
    NormalizePolicy policy;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "rename_registers") {
            policy.rename_registers = parse_bool_value(key, value);
        } else if (key == "rename_globals") {
            policy.rename_globals = parse_bool_value(key, value);
        } else if (key == "strip_metadata") {
            policy.strip_metadata = parse_bool_value(key, value);
        } else if (key == "fold_constants_to_class") {
            policy.fold_constants_to_class = parse_bool_value(key, value);
        } else if (key == "keep_opcode_types") {
            policy.keep_opcode_types = parse_bool_value(key, value);
        } else if (key == "function_denylist") {
            policy.function_denylist = parse_list_value(value);
        } else {
            throw FormatError("unknown policy key '" + key + "'");
        }
    }
    return policy;
}

}  // namespace irmatch::ir
