#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_set>

#include "irmatch/error.hpp"
#include "irmatch/ir.hpp"

namespace irmatch::ir {

namespace {

constexpr std::array kLlvmOpcodes = {
    "ret",           "br",           "switch",      "indirectbr",  "invoke",
    "resume",        "unreachable",  "cleanupret",  "catchret",    "catchswitch",
    "callbr",        "fneg",         "add",         "fadd",        "sub",
    "fsub",          "mul",          "fmul",        "udiv",        "sdiv",
    "fdiv",          "urem",         "srem",        "frem",        "shl",
    "lshr",          "ashr",         "and",         "or",          "xor",
    "extractelement", "insertelement", "shufflevector", "extractvalue", "insertvalue",
    "alloca",        "load",         "store",       "fence",       "cmpxchg",
    "atomicrmw",     "getelementptr", "trunc",      "zext",        "sext",
    "fptrunc",       "fpext",        "fptoui",      "fptosi",      "uitofp",
    "sitofp",        "ptrtoint",     "inttoptr",    "bitcast",     "addrspacecast",
    "icmp",          "fcmp",         "phi",         "select",      "freeze",
    "call",          "va_arg",       "landingpad",  "catchpad",    "cleanuppad",
};

constexpr std::array kCallModifiers = {"tail", "musttail", "notail"};

enum class Lex { newline, local, global, meta, attr, integer, real, string, word, label_def, punct, end };

struct LexToken {
    Lex kind;
    std::string text;
    std::size_t line;
    std::size_t column;
    std::size_t begin;
    std::size_t end;
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '$' || c == '.' ||
           c == '_';
}

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '.';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '$' || c == '.' || c == '_';
}

class Lexer {
public:
    Lexer(std::string_view src, std::vector<std::string>& comments)
        : src_(src), comments_(comments) {}

    std::vector<LexToken> run() {
        std::vector<LexToken> out;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                push(out, Lex::newline, pos_, pos_ + 1);
                advance(1);
                line_++;
                col_ = 1;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance(1);
                continue;
            }
            if (c == ';') {
                const auto nl = src_.find('\n', pos_);
                const auto stop = nl == std::string_view::npos ? src_.size() : nl;
                comments_.emplace_back(src_.substr(pos_, stop - pos_));
                advance(stop - pos_);
                continue;
            }
            lex_one(out);
        }
        push(out, Lex::end, src_.size(), src_.size());
        return out;
    }

private:
    void advance(std::size_t n) {
        pos_ += n;
        col_ += n;
    }

    void push(std::vector<LexToken>& out, Lex kind, std::size_t begin, std::size_t end) {
        out.push_back({kind, std::string(src_.substr(begin, end - begin)), line_, col_, begin, end});
    }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, col_); }

    char peek(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    std::size_t scan_quoted(std::size_t at) const {
        // `at` points at the opening quote; returns one past the closing quote.
        const auto close = src_.find('"', at + 1);
        if (close == std::string_view::npos) fail("unterminated string literal");
        const auto nl = src_.find('\n', at + 1);
        if (nl != std::string_view::npos && nl < close) fail("unterminated string literal");
        return close + 1;
    }

    std::size_t scan_while(std::size_t at, bool (*pred)(char)) const {
        while (at < src_.size() && pred(src_[at])) ++at;
        return at;
    }

    void emit_advance(std::vector<LexToken>& out, Lex kind, std::size_t end) {
        push(out, kind, pos_, end);
        advance(end - pos_);
    }

    void lex_one(std::vector<LexToken>& out) {
        const char c = peek();
        const std::size_t start = pos_;

        if (c == '%' || c == '@') {
            std::size_t end;
            if (peek(1) == '"') {
                end = scan_quoted(start + 1);
            } else {
                end = scan_while(start + 1, is_ident_char);
                if (end == start + 1) fail(std::string("expected identifier after '") + c + "'");
            }
            emit_advance(out, c == '%' ? Lex::local : Lex::global, end);
            return;
        }
        if (c == '!') {
            std::size_t end = start + 1;
            if (peek(1) == '"') {
                end = scan_quoted(start + 1);
            } else {
                end = scan_while(start + 1, [](char ch) { return is_ident_char(ch) || ch == '\\'; });
            }
            emit_advance(out, Lex::meta, end);
            return;
        }
        if (c == '#') {
            if (std::isdigit(static_cast<unsigned char>(peek(1)))) {
                emit_advance(out, Lex::attr, scan_while(start + 1, is_word_char));
            } else if (is_word_start(peek(1))) {
                // Debug records such as #dbg_value(...).
                emit_advance(out, Lex::word, scan_while(start + 1, is_word_char));
            } else {
                fail("unexpected '#'");
            }
            return;
        }
        if (c == '"') {
            const auto end = scan_quoted(start);
            if (end < src_.size() && src_[end] == ':') {
                out.push_back({Lex::label_def, "%" + std::string(src_.substr(start, end - start)),
                               line_, col_, start, end + 1});
                advance(end + 1 - start);
                return;
            }
            emit_advance(out, Lex::string, end);
            return;
        }
        if (c == 'c' && peek(1) == '"') {
            emit_advance(out, Lex::string, scan_quoted(start + 1));
            return;
        }
        if (c == '.' && peek(1) == '.' && peek(2) == '.') {
            emit_advance(out, Lex::punct, start + 3);
            return;
        }
        const bool negative = c == '-' && std::isdigit(static_cast<unsigned char>(peek(1)));
        if (std::isdigit(static_cast<unsigned char>(c)) || negative) {
            lex_number(out);
            return;
        }
        if (is_word_start(c)) {
            const auto end = scan_while(start, is_word_char);
            if (end < src_.size() && src_[end] == ':') {
                out.push_back({Lex::label_def, "%" + std::string(src_.substr(start, end - start)),
                               line_, col_, start, end + 1});
                advance(end + 1 - start);
                return;
            }
            emit_advance(out, Lex::word, end);
            return;
        }
        static constexpr std::string_view kPunct = "=,()[]{}<>*:|^&+-/";
        if (kPunct.find(c) != std::string_view::npos) {
            emit_advance(out, Lex::punct, start + 1);
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void lex_number(std::vector<LexToken>& out) {
        const std::size_t start = pos_;
        std::size_t at = start;
        if (src_[at] == '-') ++at;
        if (src_[at] == '0' && at + 1 < src_.size() && (src_[at + 1] == 'x' || src_[at + 1] == 'X')) {
            at += 2;
            if (at < src_.size() && std::string_view("KLMHR").find(src_[at]) != std::string_view::npos) {
                ++at;
            }
            const auto end = scan_while(at, [](char ch) {
                return std::isxdigit(static_cast<unsigned char>(ch)) != 0;
            });
            if (end == at) fail("malformed hexadecimal literal");
            emit_advance(out, Lex::real, end);
            return;
        }
        auto digits = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
        at = scan_while(at, digits);
        bool is_real = false;
        if (at < src_.size() && src_[at] == '.' && !(at + 1 < src_.size() && src_[at + 1] == '.')) {
            is_real = true;
            at = scan_while(at + 1, digits);
        }
        if (at < src_.size() && (src_[at] == 'e' || src_[at] == 'E')) {
            std::size_t exp = at + 1;
            if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
            if (exp < src_.size() && digits(src_[exp])) {
                is_real = true;
                at = scan_while(exp, digits);
            }
        }
        if (!is_real && at < src_.size() && src_[at] == ':' && src_[start] != '-') {
            out.push_back({Lex::label_def, "%" + std::string(src_.substr(start, at - start)), line_,
                           col_, start, at + 1});
            advance(at + 1 - start);
            return;
        }
        if (at < src_.size() && is_word_char(src_[at])) fail("malformed numeric literal");
        emit_advance(out, is_real ? Lex::real : Lex::integer, at);
    }

    std::string_view src_;
    std::vector<std::string>& comments_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

bool is_open(const LexToken& t) {
    return t.kind == Lex::punct && (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "<");
}

bool is_close(const LexToken& t) {
    return t.kind == Lex::punct && (t.text == ")" || t.text == "]" || t.text == "}" || t.text == ">");
}

bool is_punct(const LexToken& t, std::string_view p) { return t.kind == Lex::punct && t.text == p; }

bool is_word(const LexToken& t, std::string_view w) { return t.kind == Lex::word && t.text == w; }

bool is_primitive_type(std::string_view w) {
    static const std::unordered_set<std::string_view> kTypes = {
        "void",     "half",      "bfloat", "float", "double", "x86_fp80", "fp128",
        "ppc_fp128", "x86_mmx", "x86_amx", "ptr",  "label",  "metadata", "token",
    };
    if (kTypes.contains(w)) return true;
    if (w.size() >= 2 && w[0] == 'i') {
        return std::all_of(w.begin() + 1, w.end(),
                           [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    }
    return false;
}

/// Parses types over a token span that is known to be balanced.
class TypeParser {
public:
    TypeParser(const std::vector<LexToken>& toks, std::size_t end,
               const std::set<std::string>& named_types)
        : toks_(toks), end_(end), named_(named_types) {}

    std::optional<std::string> parse(std::size_t& p) const {
        std::size_t q = p;
        auto base = parse_base(q);
        if (!base) return std::nullopt;
        std::string s = std::move(*base);
        while (q < end_) {
            if (is_punct(toks_[q], "*")) {
                s += "*";
                ++q;
            } else if (is_word(toks_[q], "addrspace") && q + 3 < end_ && is_punct(toks_[q + 1], "(") &&
                       toks_[q + 2].kind == Lex::integer && is_punct(toks_[q + 3], ")")) {
                s += "addrspace(" + toks_[q + 2].text + ")";
                q += 4;
            } else if (is_punct(toks_[q], "(")) {
                auto params = parse_param_types(q);
                if (!params) break;
                s += *params;
            } else {
                break;
            }
        }
        p = q;
        return s;
    }

private:
    bool at(std::size_t q, Lex kind) const { return q < end_ && toks_[q].kind == kind; }
    bool at_punct(std::size_t q, std::string_view t) const { return q < end_ && is_punct(toks_[q], t); }
    bool at_word(std::size_t q, std::string_view t) const { return q < end_ && is_word(toks_[q], t); }

    std::optional<std::string> parse_base(std::size_t& q) const {
        if (q >= end_) return std::nullopt;
        const auto& t = toks_[q];
        if (t.kind == Lex::word && is_primitive_type(t.text)) {
            ++q;
            return t.text;
        }
        if (t.kind == Lex::local && named_.contains(t.text)) {
            ++q;
            return t.text;
        }
        if (is_punct(t, "[")) {
            std::size_t r = q + 1;
            if (!at(r, Lex::integer) || !at_word(r + 1, "x")) return std::nullopt;
            const std::string count = toks_[r].text;
            r += 2;
            auto elem = parse(r);
            if (!elem || !at_punct(r, "]")) return std::nullopt;
            q = r + 1;
            return "[" + count + "x" + *elem + "]";
        }
        if (is_punct(t, "<")) {
            std::size_t r = q + 1;
            if (at_punct(r, "{")) {
                auto body = parse_struct(r);
                if (!body || !at_punct(r, ">")) return std::nullopt;
                q = r + 1;
                return "<" + *body + ">";
            }
            std::string prefix;
            if (at_word(r, "vscale") && at_word(r + 1, "x")) {
                prefix = "vscalex";
                r += 2;
            }
            if (!at(r, Lex::integer) || !at_word(r + 1, "x")) return std::nullopt;
            const std::string count = toks_[r].text;
            r += 2;
            auto elem = parse(r);
            if (!elem || !at_punct(r, ">")) return std::nullopt;
            q = r + 1;
            return "<" + prefix + count + "x" + *elem + ">";
        }
        if (is_punct(t, "{")) {
            std::size_t r = q;
            auto body = parse_struct(r);
            if (!body) return std::nullopt;
            q = r;
            return body;
        }
        return std::nullopt;
    }

    std::optional<std::string> parse_struct(std::size_t& q) const {
        std::size_t r = q + 1;
        std::string s = "{";
        if (at_punct(r, "}")) {
            q = r + 1;
            return std::string("{}");
        }
        while (true) {
            auto elem = parse(r);
            if (!elem) return std::nullopt;
            s += *elem;
            if (at_punct(r, ",")) {
                s += ",";
                ++r;
                continue;
            }
            if (at_punct(r, "}")) break;
            return std::nullopt;
        }
        q = r + 1;
        return s + "}";
    }

    std::optional<std::string> parse_param_types(std::size_t& q) const {
        std::size_t r = q + 1;
        std::string s = "(";
        if (at_punct(r, ")")) {
            q = r + 1;
            return std::string("()");
        }
        while (true) {
            if (at_punct(r, "...")) {
                s += "...";
                ++r;
            } else {
                auto elem = parse(r);
                if (!elem) return std::nullopt;
                s += *elem;
            }
            if (at_punct(r, ",")) {
                s += ",";
                ++r;
                continue;
            }
            if (at_punct(r, ")")) break;
            return std::nullopt;
        }
        q = r + 1;
        return s + ")";
    }

    const std::vector<LexToken>& toks_;
    std::size_t end_;
    const std::set<std::string>& named_;
};

class Parser {
public:
    Parser(std::string_view src, const ParseOptions& options) : src_(src), options_(options) {}

    IRDocument run() {
        std::vector<std::string> comments;
        toks_ = Lexer(src_, comments).run();
        for (auto& c : comments) doc_.side_channel.push_back(std::move(c));

        collect_named_types();

        std::size_t p = 0;
        while (toks_[p].kind != Lex::end) {
            if (toks_[p].kind == Lex::newline) {
                ++p;
                continue;
            }
            if (is_word(toks_[p], "define")) {
                p = parse_function(p);
            } else {
                p = parse_top_level(p);
            }
        }
        if (doc_.functions.empty()) throw EmptyDocument("no function bodies found");

        std::sort(doc_.unknown_opcodes.begin(), doc_.unknown_opcodes.end());
        doc_.unknown_opcodes.erase(
            std::unique(doc_.unknown_opcodes.begin(), doc_.unknown_opcodes.end()),
            doc_.unknown_opcodes.end());
        return std::move(doc_);
    }

private:
    [[noreturn]] void fail(const LexToken& at, const std::string& message) const {
        throw ParseError(message, at.line, at.column);
    }

    std::string raw_text(std::size_t first, std::size_t last) const {
        return std::string(src_.substr(toks_[first].begin, toks_[last].end - toks_[first].begin));
    }

    /// Named struct types are module-level `%T = type ...` lines; collecting
    /// them up front lets bodies refer to types defined later in the file.
    void collect_named_types() {
        bool line_start = true;
        for (std::size_t i = 0; i + 2 < toks_.size(); ++i) {
            if (line_start && toks_[i].kind == Lex::local && is_punct(toks_[i + 1], "=") &&
                is_word(toks_[i + 2], "type")) {
                if (named_types_.insert(toks_[i].text).second) {
                    doc_.named_types.push_back(toks_[i].text);
                }
            }
            line_start = toks_[i].kind == Lex::newline;
        }
    }

    /// Scans a statement ending at a depth-0 newline. Returns one past its last token.
    std::size_t statement_end(std::size_t p) const {
        int depth = 0;
        while (toks_[p].kind != Lex::end) {
            const auto& t = toks_[p];
            if (t.kind == Lex::newline && depth == 0) break;
            if (is_open(t)) ++depth;
            if (is_close(t)) {
                if (--depth < 0) fail(t, "unbalanced '" + t.text + "'");
            }
            ++p;
        }
        if (depth != 0) fail(toks_[p], "unbalanced brackets at end of statement");
        return p;
    }

    std::size_t parse_top_level(std::size_t p) {
        const auto& first = toks_[p];
        if (first.kind == Lex::label_def) fail(first, "label outside of a function body");
        const std::size_t end = statement_end(p);
        std::size_t last = end - 1;
        while (last > p && toks_[last].kind == Lex::newline) --last;
        doc_.side_channel.push_back(raw_text(p, last));
        return end;
    }

    std::size_t matching(std::size_t open) const {
        int depth = 0;
        for (std::size_t i = open; toks_[i].kind != Lex::end; ++i) {
            if (is_open(toks_[i])) ++depth;
            if (is_close(toks_[i]) && --depth == 0) return i;
        }
        fail(toks_[open], "unbalanced '" + toks_[open].text + "'");
    }

    std::size_t parse_function(std::size_t p) {
        const LexToken& define_tok = toks_[p];
        IRFunction fn;

        // Header: the first global is the function name, followed by its parameter list.
        std::size_t q = p + 1;
        while (toks_[q].kind != Lex::end && toks_[q].kind != Lex::global) {
            if (is_punct(toks_[q], "{") && !is_punct(toks_[q - 1], "<")) {
                q = matching(q) + 1;  // struct return type
                continue;
            }
            ++q;
        }
        if (toks_[q].kind != Lex::global) fail(define_tok, "expected function name after 'define'");
        fn.source_name = toks_[q].text.substr(1);
        ++q;
        if (!is_punct(toks_[q], "(")) fail(toks_[q], "expected '(' after function name");
        const std::size_t close = matching(q);
        parse_params(q + 1, close, fn);
        q = close + 1;
        int depth = 0;
        while (true) {
            const auto& t = toks_[q];
            if (t.kind == Lex::end) fail(define_tok, "expected '{' to open function body");
            if (depth == 0 && is_punct(t, "{")) break;
            if (is_punct(t, "(") || is_punct(t, "[")) ++depth;
            if (is_punct(t, ")") || is_punct(t, "]")) --depth;
            ++q;
        }
        doc_.side_channel.push_back(raw_text(p, q));
        ++q;

        // Body.
        std::set<std::string> labels;
        while (true) {
            const auto& t = toks_[q];
            if (t.kind == Lex::end) fail(define_tok, "unterminated function body");
            if (t.kind == Lex::newline) {
                ++q;
                continue;
            }
            if (is_punct(t, "}")) {
                ++q;
                break;
            }
            if (t.kind == Lex::label_def) {
                if (!labels.insert(t.text).second) fail(t, "duplicate label '" + t.text + "'");
                fn.blocks.push_back({{}, t.text, {}});
                ++q;
                continue;
            }
            if (fn.blocks.empty()) fn.blocks.push_back({});
            q = parse_instruction(q, fn.blocks.back());
        }

        if (fn.blocks.empty()) fn.blocks.push_back({});
        for (auto& block : fn.blocks) {
            for (auto& inst : block.instructions) {
                for (auto& tok : inst.tokens) {
                    if (tok.kind == TokenKind::local && labels.contains(tok.text)) {
                        tok.kind = TokenKind::label;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < fn.blocks.size(); ++i) {
            fn.blocks[i].canonical_label = "bb" + std::to_string(i);
        }
        fn.canonical_name = "fn" + std::to_string(doc_.functions.size());
        doc_.functions.push_back(std::move(fn));
        return q;
    }

    void parse_params(std::size_t begin, std::size_t end, IRFunction& fn) const {
        std::size_t implicit = 0;
        std::size_t seg_start = begin;
        int depth = 0;
        for (std::size_t i = begin; i <= end; ++i) {
            const bool boundary = i == end || (depth == 0 && is_punct(toks_[i], ","));
            if (!boundary) {
                if (is_open(toks_[i])) ++depth;
                if (is_close(toks_[i])) --depth;
                continue;
            }
            if (i > seg_start && !is_punct(toks_[seg_start], "...")) {
                if (toks_[i - 1].kind == Lex::local && !named_types_.contains(toks_[i - 1].text)) {
                    fn.params.push_back(toks_[i - 1].text);
                } else {
                    fn.params.push_back("%" + std::to_string(implicit));
                }
                ++implicit;
            }
            seg_start = i + 1;
        }
    }

    std::size_t parse_instruction(std::size_t p, IRBlock& block) {
        const std::size_t first = p;
        int depth = 0;
        while (true) {
            const auto& t = toks_[p];
            if (t.kind == Lex::end) break;
            if (depth == 0 && (t.kind == Lex::newline || t.kind == Lex::label_def || is_punct(t, "}"))) {
                break;
            }
            if (is_open(t)) ++depth;
            if (is_close(t)) {
                if (--depth < 0) fail(t, "unbalanced '" + t.text + "'");
            }
            ++p;
        }
        if (depth != 0) fail(toks_[first], "unbalanced brackets in instruction");
        const std::size_t end = p;

        IRInstruction inst;
        inst.line = toks_[first].line;
        std::size_t q = first;
        if (toks_[q].kind == Lex::local) {
            if (q + 1 >= end || !is_punct(toks_[q + 1], "=")) {
                fail(toks_[q], "expected '=' after result register");
            }
            inst.result = toks_[q].text;
            q += 2;
        }
        std::vector<IRToken> modifiers;
        while (q + 1 < end && toks_[q].kind == Lex::word &&
               std::find(kCallModifiers.begin(), kCallModifiers.end(), toks_[q].text) !=
                   kCallModifiers.end() &&
               toks_[q + 1].kind == Lex::word) {
            modifiers.push_back({TokenKind::keyword, toks_[q].text});
            ++q;
        }
        if (q >= end || toks_[q].kind != Lex::word) {
            fail(q < end ? toks_[q] : toks_[first], "expected opcode");
        }
        inst.opcode = toks_[q].text;
        ++q;

        if (inst.opcode.starts_with("#dbg_")) {
            doc_.side_channel.push_back(raw_text(first, end - 1));
            return end;
        }

        inst.tokens = std::move(modifiers);
        classify(q, end, inst.tokens);

        if (inst.opcode == "call") {
            for (const auto& tok : inst.tokens) {
                if (tok.kind == TokenKind::global && tok.text.starts_with("@llvm.dbg.")) {
                    doc_.side_channel.push_back(raw_text(first, end - 1));
                    return end;
                }
            }
        }
        inst.known_opcode = is_llvm_opcode(inst.opcode) ||
                            std::find(options_.extra_opcodes.begin(), options_.extra_opcodes.end(),
                                      inst.opcode) != options_.extra_opcodes.end();
        if (!inst.known_opcode) doc_.unknown_opcodes.push_back(inst.opcode);
        block.instructions.push_back(std::move(inst));
        return end;
    }

    void classify(std::size_t q, std::size_t end, std::vector<IRToken>& out) const {
        const TypeParser types(toks_, end, named_types_);
        while (q < end) {
            if (auto ty = types.parse(q)) {
                out.push_back({TokenKind::type, std::move(*ty)});
                continue;
            }
            const auto& t = toks_[q];
            switch (t.kind) {
                case Lex::local: out.push_back({TokenKind::local, t.text}); break;
                case Lex::global: out.push_back({TokenKind::global, t.text}); break;
                case Lex::integer: out.push_back({TokenKind::int_literal, t.text}); break;
                case Lex::real: out.push_back({TokenKind::float_literal, t.text}); break;
                case Lex::string: out.push_back({TokenKind::string_literal, t.text}); break;
                case Lex::word:
                case Lex::label_def: out.push_back({TokenKind::keyword, t.text}); break;
                case Lex::attr: out.push_back({TokenKind::metadata, t.text}); break;
                case Lex::meta: {
                    std::string text = t.text;
                    if (q + 1 < end && (is_punct(toks_[q + 1], "{") || is_punct(toks_[q + 1], "("))) {
                        const std::size_t close = matching(q + 1);
                        text = raw_text(q, close);
                        q = close;
                    }
                    if (!out.empty() && out.back().kind == TokenKind::punct && out.back().text == ",") {
                        out.back().kind = TokenKind::metadata;
                    }
                    out.push_back({TokenKind::metadata, std::move(text)});
                    break;
                }
                default: out.push_back({TokenKind::punct, t.text}); break;
            }
            ++q;
        }
    }

    std::string_view src_;
    const ParseOptions& options_;
    std::vector<LexToken> toks_;
    std::set<std::string> named_types_;
    IRDocument doc_;
};

}  // namespace

std::string_view to_string(Origin origin) {
    switch (origin) {
        case Origin::source: return "source";
        case Origin::binary: return "binary";
        case Origin::synthetic: return "synthetic";
    }
    return "source";
}

Origin parse_origin(std::string_view text) {
    if (text == "source") return Origin::source;
    if (text == "binary") return Origin::binary;
    if (text == "synthetic") return Origin::synthetic;
    throw FormatError("unknown origin '" + std::string(text) + "'");
}

bool is_llvm_opcode(std::string_view opcode) {
    return std::find(kLlvmOpcodes.begin(), kLlvmOpcodes.end(), opcode) != kLlvmOpcodes.end();
}

IRDocument parse_ir_text(std::string_view text, const ParseOptions& options) {
    return Parser(text, options).run();
}

}  // namespace irmatch::ir
