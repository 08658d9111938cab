#pragma once

// Textual LLVM-IR parsing and name-erasing canonicalization.
//
// A document is parsed into functions, blocks and instructions. Every
// instruction keeps its operand tokens in source order together with a kind
// tag, so normalization can rename registers, labels, globals and named types
// and fold literals without re-lexing.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irmatch::ir {

enum class Origin { source, binary, synthetic };

std::string_view to_string(Origin origin);
/// Throws irmatch::FormatError for anything but "source", "binary", "synthetic".
Origin parse_origin(std::string_view text);

enum class TokenKind {
    type,
    local,     // SSA register or argument
    label,     // reference to a basic block
    global,    // @name
    int_literal,
    float_literal,
    string_literal,
    keyword,   // flags, predicates, `to`, `null`, ...
    punct,
    metadata,  // !dbg !3, call-site #0 attribute refs
};

struct IRToken {
    TokenKind kind;
    std::string text;

    friend bool operator==(const IRToken&, const IRToken&) = default;
};

struct IRInstruction {
    std::optional<std::string> result;
    std::string opcode;
    /// All operand-side tokens in source order, including types and punctuation.
    std::vector<IRToken> tokens;
    bool known_opcode = true;
    std::size_t line = 0;

    /// Result register (if any) followed by every non-type value token.
    std::vector<std::string> operand_tokens() const;
    std::vector<std::string> type_tokens() const;

    friend bool operator==(const IRInstruction& a, const IRInstruction& b) {
        return a.result == b.result && a.opcode == b.opcode && a.tokens == b.tokens;
    }
};

struct IRBlock {
    std::string canonical_label;
    std::string source_label;  // empty for an implicit entry block
    std::vector<IRInstruction> instructions;

    friend bool operator==(const IRBlock&, const IRBlock&) = default;
};

struct IRFunction {
    std::string canonical_name;
    std::string source_name;  // without the leading '@'
    std::vector<std::string> params;
    std::vector<IRBlock> blocks;

    std::size_t instruction_count() const;

    friend bool operator==(const IRFunction&, const IRFunction&) = default;
};

struct IRDocument {
    std::string doc_id;
    Origin origin = Origin::source;
    std::optional<std::string> language_tag;
    std::vector<IRFunction> functions;

    /// Comments, module-level metadata, attribute groups, declarations and
    /// excluded debug intrinsics, verbatim.
    std::vector<std::string> side_channel;
    std::vector<std::string> named_types;
    std::vector<std::string> unknown_opcodes;

    std::size_t instruction_count() const;
};

struct ParseOptions {
    /// Opcodes accepted in addition to the LLVM instruction set.
    std::vector<std::string> extra_opcodes;
};

struct NormalizePolicy {
    bool rename_registers = true;
    bool rename_globals = true;
    bool strip_metadata = true;
    bool fold_constants_to_class = true;
    bool keep_opcode_types = true;
    /// Functions dropped before renaming. Exact names, or prefixes ending in '*'.
    std::vector<std::string> function_denylist;
};

inline constexpr std::string_view kInstructionSentinel = "<i>";
inline constexpr std::string_view kFunctionSentinel = "<f>";
inline constexpr std::string_view kIntClass = "INT";
inline constexpr std::string_view kFloatClass = "FLOAT";
inline constexpr std::string_view kStringClass = "STR";

bool is_llvm_opcode(std::string_view opcode);

/// Throws ParseError on malformed syntax, EmptyDocument if no function body exists.
IRDocument parse_ir_text(std::string_view text, const ParseOptions& options = {});

IRDocument normalize(const IRDocument& doc, const NormalizePolicy& policy);

/// [opcode, types..., operands...] per instruction, `<i>` between
/// instructions and `<f>` between functions.
std::vector<std::string> to_token_stream(const IRDocument& doc);

/// Human-readable form, e.g. "%v2 = add i32 %v0, %v1".
std::string render_instruction(const IRInstruction& inst);

/// Reads `key = value` lines. Unknown keys raise FormatError.
NormalizePolicy parse_policy(std::string_view text);

}  // namespace irmatch::ir
