#include "irmatch/synth.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>

#include "irmatch/error.hpp"
#include "irmatch/random.hpp"

namespace irmatch::synth {

namespace {

// ---------------------------------------------------------------------------
// Abstract module

struct Piece {
    enum Kind { raw, local_ref, label_ref, symbol_ref, int_lit, float_lit } kind;
    std::string text;    // literal spelling, or raw text
    int id = -1;         // value, block or symbol id
    std::string prefix;  // type written in front of a typed operand, e.g. "i32 "
};

struct Inst {
    int def = -1;
    std::string stem;  // source-style name stem of the defined value
    std::vector<Piece> pieces;
    bool memory = false;
    bool terminator = false;
    bool phi = false;

    bool uses(int value) const {
        return std::any_of(pieces.begin(), pieces.end(),
                           [&](const Piece& p) { return p.kind == Piece::local_ref && p.id == value; });
    }
};

struct Block {
    std::string hint;  // source-style label
    std::vector<Inst> insts;
};

struct Function {
    int symbol = 0;
    std::string ret_type;
    int n_params = 0;
    std::vector<std::string> value_types;  // params first
    std::vector<Block> blocks;
};

struct Symbol {
    enum Kind { variable, constant, external, function } kind;
    std::string name;  // source-style name
    std::string type;  // value type, or return type for callables
    std::string init;
    int array_len = 0;
    std::vector<std::string> params = {};
};

struct Module {
    std::vector<Symbol> symbols;
    std::vector<Function> functions;
};

Piece text(std::string s) { return {Piece::raw, std::move(s), -1, {}}; }
Piece local(int id, std::string prefix = {}) { return {Piece::local_ref, {}, id, std::move(prefix)}; }
Piece label(int id) { return {Piece::label_ref, {}, id, "label "}; }
Piece incoming(int id) { return {Piece::label_ref, {}, id, {}}; }
Piece symbol(int id, std::string prefix = {}) { return {Piece::symbol_ref, {}, id, std::move(prefix)}; }

std::string align_of(const std::string& type) { return type == "i32" ? "4" : "8"; }

std::string float_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[rng.below(items.size())];
}

// ---------------------------------------------------------------------------
// Skeleton generation

class Builder {
public:
    explicit Builder(Rng& rng) : rng_(rng) {}

    Module build() {
        static const std::vector<std::string> var_names = {"counter", "total", "limit", "state", "scale", "seed"};
        static const std::vector<std::string> ext_names = {"printf", "abs", "rand", "sqrt", "atoi", "labs", "puts"};
        static const std::vector<std::string> types = {"i32", "i32", "i32", "i64", "double"};

        const int n_vars = 2 + static_cast<int>(rng_.below(3));
        for (int i = 0; i < n_vars; ++i) {
            const auto& type = pick(types, rng_);
            m_.symbols.push_back({Symbol::variable, var_names[static_cast<std::size_t>(i)], type,
                                  type == "double" ? float_text(0.0) : "0"});
        }
        if (rng_.below(2) == 0) {
            const int len = 8 << rng_.below(3);
            m_.symbols.push_back({Symbol::variable, "table", "i32", "zeroinitializer", len});
        }
        const int n_ext = 1 + static_cast<int>(rng_.below(3));
        for (int i = 0; i < n_ext; ++i) {
            Symbol s{Symbol::external, ext_names[static_cast<std::size_t>(i)], pick(types, rng_), {}};
            const int n_args = 1 + static_cast<int>(rng_.below(2));
            for (int a = 0; a < n_args; ++a) s.params.push_back(pick(types, rng_));
            m_.symbols.push_back(std::move(s));
        }

        const int n_functions = 1 + static_cast<int>(rng_.below(2));
        static const std::vector<std::string> fn_names = {"compute", "update", "step", "solve"};
        for (int f = 0; f < n_functions; ++f) {
            const auto& ret = rng_.below(5) == 0 ? std::string("void") : pick(types, rng_);
            m_.symbols.push_back({Symbol::function, fn_names[static_cast<std::size_t>(f)], ret, {}});
            build_function(static_cast<int>(m_.symbols.size()) - 1);
        }
        return std::move(m_);
    }

private:
    using Scope = std::vector<int>;

    int new_value(const std::string& type) {
        fn_->value_types.push_back(type);
        return static_cast<int>(fn_->value_types.size()) - 1;
    }

    Inst& emit(Inst inst) {
        fn_->blocks.back().insts.push_back(std::move(inst));
        return fn_->blocks.back().insts.back();
    }

    int define(const std::string& type, std::string stem, std::vector<Piece> pieces, Scope& scope,
               bool memory = false) {
        const int v = new_value(type);
        emit({v, std::move(stem), std::move(pieces), memory});
        scope.push_back(v);
        return v;
    }

    std::vector<int> of_type(const Scope& scope, const std::string& type) const {
        std::vector<int> out;
        for (int v : scope) {
            if (fn_->value_types[static_cast<std::size_t>(v)] == type) out.push_back(v);
        }
        return out;
    }

    /// A visible value of `type`, created by a cast or compare when none exists.
    int value_of(const std::string& type, Scope& scope) {
        const auto have = of_type(scope, type);
        if (!have.empty()) return pick(have, rng_);
        if (type == "i1") {
            const int a = value_of("i32", scope);
            return define("i1", "cmp", {text("icmp sgt i32 "), local(a), text(", "), int_literal()}, scope);
        }
        static const std::vector<std::string> sources = {"i32", "i64", "double"};
        for (const auto& from : sources) {
            if (from == type || of_type(scope, from).empty()) continue;
            const int a = pick(of_type(scope, from), rng_);
            std::string op;
            if (type == "double") op = "sitofp";
            else if (from == "double") op = "fptosi";
            else if (type == "i64") op = rng_.below(2) ? "sext" : "zext";
            else op = "trunc";
            return define(type, "conv", {text(op + " " + from + " "), local(a), text(" to " + type)}, scope);
        }
        throw Error("synthetic function has no value to convert");  // params guarantee one exists
    }

    Piece int_literal(std::string prefix = {}) {
        static const std::vector<int> values = {0, 1, 2, 3, 4, 5, 7, 8, 10, 16, 31, 64, 100, 255, 1000};
        return {Piece::int_lit, std::to_string(pick(values, rng_)), -1, std::move(prefix)};
    }

    Piece float_literal(std::string prefix = {}) {
        static const std::vector<double> values = {0.5, 1.0, 1.5, 2.0, 2.5, 3.25, 10.0, 0.125};
        return {Piece::float_lit, float_text(pick(values, rng_)), -1, std::move(prefix)};
    }

    /// A typed operand: mostly a value, sometimes a literal.
    Piece typed_operand(const std::string& type, Scope& scope) {
        const std::string prefix = type + " ";
        if (type != "i1" && rng_.below(3) == 0) {
            return type == "double" ? float_literal(prefix) : int_literal(prefix);
        }
        return local(value_of(type, scope), prefix);
    }

    Piece bare_operand(const std::string& type, Scope& scope) {
        if (rng_.below(2) == 0) return type == "double" ? float_literal() : int_literal();
        return local(value_of(type, scope));
    }

    void random_instruction(Scope& scope) {
        static const std::vector<std::string> int_ops = {"add", "sub", "mul", "and", "or", "xor", "shl", "ashr", "sdiv", "srem"};
        static const std::vector<std::string> fp_ops = {"fadd", "fsub", "fmul", "fdiv"};
        static const std::vector<std::string> preds = {"eq", "ne", "slt", "sgt", "sle", "sge"};
        static const std::vector<std::string> int_types = {"i32", "i32", "i32", "i64"};

        switch (rng_.below(10)) {
            case 0:
            case 1:
            case 2: {
                const auto& ty = pick(int_types, rng_);
                const auto& op = pick(int_ops, rng_);
                const bool nsw = (op == "add" || op == "sub" || op == "mul") && rng_.below(2) == 0;
                const int a = value_of(ty, scope);
                define(ty, op, {text(op + (nsw ? " nsw " : " ") + ty + " "), local(a), text(", "), bare_operand(ty, scope)},
                       scope);
                break;
            }
            case 3: {
                const auto& op = pick(fp_ops, rng_);
                const int a = value_of("double", scope);
                define("double", op, {text(op + " double "), local(a), text(", "), bare_operand("double", scope)}, scope);
                break;
            }
            case 4: {
                const auto& ty = pick(int_types, rng_);
                const int a = value_of(ty, scope);
                define("i1", "cmp", {text("icmp " + pick(preds, rng_) + " " + ty + " "), local(a), text(", "),
                                     bare_operand(ty, scope)},
                       scope);
                break;
            }
            case 5: {
                const auto& ty = pick(int_types, rng_);
                const int c = value_of("i1", scope);
                define(ty, "cond", {text("select i1 "), local(c), text(", "), typed_operand(ty, scope), text(", "),
                                    typed_operand(ty, scope)},
                       scope);
                break;
            }
            case 6: {
                const auto g = pick_symbol(Symbol::variable);
                const auto& s = m_.symbols[static_cast<std::size_t>(g)];
                if (s.array_len > 0) {
                    const int idx = value_of("i64", scope);
                    const std::string arr = "[" + std::to_string(s.array_len) + " x i32]";
                    const int p = define("ptr", "arrayidx",
                                         {text("getelementptr inbounds " + arr + ", "), symbol(g, "ptr "),
                                          text(", i64 0, "), local(idx, "i64 ")},
                                         scope);
                    define("i32", "elt", {text("load i32, "), local(p, "ptr "), text(", align 4")}, scope, true);
                } else {
                    define(s.type, "val", {text("load " + s.type + ", "), symbol(g, "ptr "), text(", align " + align_of(s.type))},
                           scope, true);
                }
                break;
            }
            case 7: {
                const auto g = pick_symbol(Symbol::variable);
                const auto& s = m_.symbols[static_cast<std::size_t>(g)];
                if (s.array_len > 0) return;
                emit({-1, {}, {text("store "), typed_operand(s.type, scope), text(", "), symbol(g, "ptr "),
                               text(", align " + align_of(s.type))},
                      true});
                break;
            }
            case 8: {
                const auto e = pick_symbol(Symbol::external);
                const auto s = m_.symbols[static_cast<std::size_t>(e)];
                std::vector<Piece> pieces = {text("call " + s.type + " "), symbol(e), text("(")};
                for (std::size_t a = 0; a < s.params.size(); ++a) {
                    if (a) pieces.push_back(text(", "));
                    pieces.push_back(typed_operand(s.params[a], scope));
                }
                pieces.push_back(text(")"));
                define(s.type, "call", std::move(pieces), scope, true);
                break;
            }
            default: {
                static const std::vector<std::string> targets = {"i32", "i64", "double"};
                value_of(pick(targets, rng_), scope);
                const auto& ty = pick(int_types, rng_);
                const int a = value_of(ty, scope);
                define(ty, "inc", {text("add nsw " + ty + " "), local(a), text(", "), int_literal()}, scope);
                break;
            }
        }
    }

    int pick_symbol(Symbol::Kind kind) {
        std::vector<int> ids;
        for (std::size_t i = 0; i < m_.symbols.size(); ++i) {
            if (m_.symbols[i].kind == kind) ids.push_back(static_cast<int>(i));
        }
        return pick(ids, rng_);
    }

    void fill(Scope& scope) {
        const int n = 1 + static_cast<int>(rng_.below(4));
        for (int i = 0; i < n; ++i) random_instruction(scope);
    }

    void ret(Scope& scope) {
        if (fn_->ret_type == "void") {
            emit({-1, {}, {text("ret void")}, false, true});
        } else {
            emit({-1, {}, {text("ret "), local(value_of(fn_->ret_type, scope), fn_->ret_type + " ")}, false, true});
        }
    }

    void open(std::string hint) { fn_->blocks.push_back({std::move(hint), {}}); }

    void build_function(int sym) {
        static const std::vector<std::string> types = {"i32", "i32", "i64", "double"};
        m_.functions.push_back({sym, m_.symbols[static_cast<std::size_t>(sym)].type, 0, {}, {}});
        fn_ = &m_.functions.back();
        fn_->n_params = 1 + static_cast<int>(rng_.below(3));
        Scope entry;
        for (int p = 0; p < fn_->n_params; ++p) entry.push_back(new_value(pick(types, rng_)));
        if (of_type(entry, "i32").empty()) entry.push_back(new_value("i32"));
        fn_->n_params = static_cast<int>(entry.size());

        open("entry");
        fill(entry);
        switch (rng_.below(3)) {
            case 0:
                ret(entry);
                break;
            case 1: {  // if-then with a join
                const std::string ty = fn_->ret_type == "void" ? "i32" : fn_->ret_type;
                const int from_entry = value_of(ty, entry);
                const int c = value_of("i1", entry);
                emit({-1, {}, {text("br "), local(c, "i1 "), text(", "), label(1), text(", "), label(2)}, false, true});
                open("if.then");
                Scope then_scope = entry;
                fill(then_scope);
                const int from_then = value_of(ty, then_scope);
                emit({-1, {}, {text("br "), label(2)}, false, true});
                open("if.end");
                Scope join = entry;
                const int merged = new_value(ty);
                fn_->blocks.back().insts.insert(
                    fn_->blocks.back().insts.begin(),
                    {merged, "merge",
                     {text("phi " + ty + " [ "), local(from_then), text(", "), incoming(1), text(" ], [ "),
                      local(from_entry), text(", "), incoming(0), text(" ]")},
                     false, false, true});
                join.push_back(merged);
                fill(join);
                ret(join);
                break;
            }
            default: {  // counted loop
                emit({-1, {}, {text("br "), label(1)}, false, true});
                open("for.body");
                Scope body = entry;
                const int i = new_value("i32");
                emit({i, "i", {}, false, false, true});
                body.push_back(i);
                fill(body);
                const int next = define("i32", "inc", {text("add nsw i32 "), local(i), text(", 1")}, body);
                Inst& phi = fn_->blocks.back().insts.front();
                phi.pieces = {text("phi i32 [ 0, "), incoming(0), text(" ], [ "), local(next), text(", "), incoming(1),
                              text(" ]")};
                const int c = define("i1", "cmp", {text("icmp slt i32 "), local(next), text(", "), bare_operand("i32", entry)},
                                     body);
                emit({-1, {}, {text("br "), local(c, "i1 "), text(", "), label(1), text(", "), label(2)}, false, true});
                open("for.end");
                fill(body);
                ret(body);
                break;
            }
        }
    }

    Rng& rng_;
    Module m_;
    Function* fn_ = nullptr;
};

// ---------------------------------------------------------------------------
// Binary-style rewrites

class Lifter {
public:
    Lifter(Module& m, Rng& rng, double strength) : m_(m), rng_(rng), s_(strength) {}

    void run() {
        if (s_ <= 0.0) return;
        for (auto& fn : m_.functions) {
            for (auto& block : fn.blocks) {
                rewrite_literals(fn, block);
                add_temporaries(fn, block);
                drop_flags(block);
                reorder(block);
            }
        }
    }

private:
    bool chance(double p) { return rng_.uniform() < p; }

    void rewrite_literals(Function& fn, Block& block) {
        std::vector<Inst> out;
        for (auto& inst : block.insts) {
            if (!inst.phi) {
                for (auto& p : inst.pieces) {
                    if (p.kind == Piece::float_lit && !p.prefix.empty() && chance(0.5 * s_)) {
                        const double v = std::stod(p.text);
                        p = {Piece::int_lit, std::to_string(static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(v))), -1,
                             "i64 "};
                    } else if (p.kind == Piece::int_lit && chance(0.5 * s_)) {
                        const std::string type = literal_type(fn, inst, p);
                        if (type.empty()) continue;
                        m_.symbols.push_back({Symbol::constant, "c" + std::to_string(m_.symbols.size()), type, p.text});
                        const int v = static_cast<int>(fn.value_types.size());
                        fn.value_types.push_back(type);
                        out.push_back({v, "k",
                                       {text("load " + type + ", "), symbol(static_cast<int>(m_.symbols.size()) - 1, "ptr "),
                                        text(", align " + align_of(type))},
                                       true});
                        p = local(v, p.prefix);
                    }
                }
            }
            out.push_back(std::move(inst));
        }
        block.insts = std::move(out);
    }

    /// The integer type of a literal operand, or "" when it cannot be recovered.
    static std::string literal_type(const Function& fn, const Inst& inst, const Piece& p) {
        if (!p.prefix.empty()) return p.prefix.substr(0, p.prefix.size() - 1);
        if (inst.def >= 0 && inst.pieces.front().text.starts_with("icmp")) {
            return inst.pieces.front().text.find("i64") != std::string::npos ? "i64" : "i32";
        }
        if (inst.def >= 0) {
            const auto& t = fn.value_types[static_cast<std::size_t>(inst.def)];
            if (t == "i32" || t == "i64") return t;
        }
        return {};
    }

    void add_temporaries(Function& fn, Block& block) {
        std::vector<Inst> out;
        for (auto& inst : block.insts) {
            if (!inst.phi) {
                for (auto& p : inst.pieces) {
                    if (p.kind != Piece::local_ref || !chance(0.25 * s_)) continue;
                    const std::string type = fn.value_types[static_cast<std::size_t>(p.id)];
                    if (type != "i32" && type != "i64" && type != "double") continue;
                    const int v = static_cast<int>(fn.value_types.size());
                    fn.value_types.push_back(type);
                    if (type == "double") {
                        out.push_back({v, "t", {text("fadd double "), local(p.id), text(", " + float_text(0.0))}});
                    } else {
                        out.push_back({v, "t", {text((rng_.below(2) ? "or " : "add ") + type + " "), local(p.id), text(", 0")}});
                    }
                    p.id = v;
                }
            }
            out.push_back(std::move(inst));
        }
        block.insts = std::move(out);
    }

    void drop_flags(Block& block) {
        for (auto& inst : block.insts) {
            if (inst.pieces.empty() || inst.pieces.front().kind != Piece::raw) continue;
            auto& t = inst.pieces.front().text;
            const auto at = t.find(" nsw");
            if (at != std::string::npos && chance(s_)) t.erase(at, 4);
        }
    }

    void reorder(Block& block) {
        auto& insts = block.insts;
        for (std::size_t i = 0; i + 1 < insts.size(); ++i) {
            const Inst& a = insts[i];
            const Inst& b = insts[i + 1];
            if (a.phi || b.phi || a.terminator || b.terminator) continue;
            if (a.memory && b.memory) continue;
            if (a.def >= 0 && b.uses(a.def)) continue;
            if (!chance(0.5 * s_)) continue;
            std::swap(insts[i], insts[i + 1]);
            ++i;
        }
    }

    Module& m_;
    Rng& rng_;
    double s_;
};

// ---------------------------------------------------------------------------
// Rendering

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(v));
    return buf;
}

class Renderer {
public:
    Renderer(const Module& m, bool binary, std::uint64_t base) : m_(m), binary_(binary), base_(base) {}

    std::string symbol_name(int id) const {
        const auto& s = m_.symbols[static_cast<std::size_t>(id)];
        if (!binary_ || s.kind == Symbol::external) return "@" + s.name;
        const auto addr = base_ + 0x1000 * static_cast<std::uint64_t>(id + 1);
        return s.kind == Symbol::function ? "@function_" + hex(addr) : "@global_var_" + hex(addr + 0x8000);
    }

    std::string render() {
        std::string out;
        for (std::size_t i = 0; i < m_.symbols.size(); ++i) {
            const auto& s = m_.symbols[i];
            const auto name = symbol_name(static_cast<int>(i));
            if (s.kind == Symbol::variable) {
                const std::string type = s.array_len ? "[" + std::to_string(s.array_len) + " x i32]" : s.type;
                out += name + " = global " + type + " " + s.init + ", align " + (s.array_len ? "16" : align_of(s.type)) + "\n";
            } else if (s.kind == Symbol::constant) {
                out += name + " = constant " + s.type + " " + s.init + ", align " + align_of(s.type) + "\n";
            }
        }
        out += "\n";
        for (const auto& fn : m_.functions) render_function(fn, out);
        for (std::size_t i = 0; i < m_.symbols.size(); ++i) {
            const auto& s = m_.symbols[i];
            if (s.kind != Symbol::external) continue;
            out += "declare " + s.type + " " + symbol_name(static_cast<int>(i)) + "(";
            for (std::size_t a = 0; a < s.params.size(); ++a) out += (a ? ", " : "") + s.params[a];
            out += ")\n";
        }
        if (!binary_) out += "\nattributes #0 = { noinline nounwind optnone uwtable }\n";
        return out;
    }

private:
    void render_function(const Function& fn, std::string& out) {
        names_.clear();
        stems_.clear();
        fn_ = &fn;
        for (const auto& block : fn.blocks) {
            for (const auto& inst : block.insts) {
                if (inst.def >= 0) stem_of_[inst.def] = inst.stem;
            }
        }
        const auto& sym = m_.symbols[static_cast<std::size_t>(fn.symbol)];
        out += "define " + sym.type + " " + symbol_name(fn.symbol) + "(";
        for (int p = 0; p < fn.n_params; ++p) {
            if (p) out += ", ";
            out += fn.value_types[static_cast<std::size_t>(p)] + " " + value_name(p);
        }
        out += binary_ ? ") {\n" : ") #0 {\n";
        for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
            out += label_name(static_cast<int>(b)) + ":\n";
            for (const auto& inst : fn.blocks[b].insts) {
                out += "  ";
                if (inst.def >= 0) out += value_name(inst.def) + " = ";
                for (const auto& p : inst.pieces) out += piece(p);
                if (!binary_ && inst.memory) out += ", !tbaa !" + std::to_string(3 + (inst.def & 3));
                out += "\n";
            }
        }
        out += "}\n\n";
        stem_of_.clear();
    }

    std::string piece(const Piece& p) {
        switch (p.kind) {
            case Piece::raw: return p.text;
            case Piece::local_ref: return p.prefix + value_name(p.id);
            case Piece::label_ref: return p.prefix + "%" + label_name(p.id);
            case Piece::symbol_ref: return p.prefix + symbol_name(p.id);
            case Piece::int_lit:
            case Piece::float_lit: return p.prefix + p.text;
        }
        return {};
    }

    std::string label_name(int b) const {
        if (binary_) return "dec_label_pc_" + hex(base_ + 0x400 + 0x20 * static_cast<std::uint64_t>(b));
        return fn_->blocks[static_cast<std::size_t>(b)].hint;
    }

    std::string value_name(int v) {
        auto it = names_.find(v);
        if (it != names_.end()) return it->second;
        std::string name;
        if (binary_) {
            name = v < fn_->n_params ? "%a" + std::to_string(v + 1)
                                     : "%v" + std::to_string(names_.size()) + "_" + hex(base_ + 0x10 * static_cast<std::uint64_t>(v));
        } else {
            static const std::vector<std::string> params = {"x", "y", "n", "k", "m"};
            std::string stem = v < fn_->n_params ? params[static_cast<std::size_t>(v) % params.size()] : stem_of_[v];
            const int seen = stems_[stem]++;
            name = "%" + stem + (seen ? std::to_string(seen) : "");
        }
        names_.emplace(v, name);
        return name;
    }

    const Module& m_;
    bool binary_;
    std::uint64_t base_;
    const Function* fn_ = nullptr;
    std::map<int, std::string> names_;
    std::map<int, std::string> stem_of_;
    std::map<std::string, int> stems_;
};

std::string group_name(int g) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "g%03d", g);
    return buf;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_groups < 2) throw Error("synthetic corpus needs at least two groups");
    if (variants_per_group < 2) throw Error("synthetic corpus needs at least two variants per group");
    if (!(transform_strength >= 0.0 && transform_strength <= 1.0)) throw Error("transform_strength must lie in [0, 1]");
}

std::string provenance_comment(const SynthDoc& doc) {
    return "; irmatch: origin=" + std::string(ir::to_string(doc.origin)) + " language=" + doc.language_tag +
           " group=" + doc.group_id;
}

SynthCorpus generate(const SynthSpec& spec) {
    spec.validate();
    static const std::vector<std::string> source_langs = {"c", "cpp", "java"};
    static const std::vector<std::string> binary_langs = {"c", "cpp"};
    SynthCorpus corpus;
    for (int g = 0; g < spec.n_groups; ++g) {
        const auto gid = group_name(g);
        Rng skeleton_rng = Rng::derive(spec.seed, static_cast<std::uint64_t>(g), 0);
        const Module skeleton = Builder(skeleton_rng).build();
        const auto& source_lang = pick(source_langs, skeleton_rng);

        for (int v = 0; v < spec.variants_per_group; ++v) {
            SynthDoc doc;
            doc.doc_id = gid + "_v" + std::to_string(v);
            doc.group_id = gid;
            Module variant = skeleton;
            Rng rng = Rng::derive(spec.seed, static_cast<std::uint64_t>(g), 1 + static_cast<std::uint64_t>(v));
            if (v == 0) {
                doc.origin = ir::Origin::source;
                doc.language_tag = source_lang;
            } else {
                doc.origin = ir::Origin::binary;
                doc.language_tag = pick(binary_langs, rng);
                Lifter(variant, rng, spec.transform_strength).run();
            }
            const std::uint64_t base = 0x401000 + 0x10000 * rng.below(64);
            const std::string file = doc.doc_id + (v == 0 ? "." + source_lang : ".bin");
            doc.ir_text = provenance_comment(doc) + "\n; ModuleID = '" + file + "'\nsource_filename = \"" + file +
                          "\"\ntarget triple = \"x86_64-pc-linux-gnu\"\n\n" + Renderer(variant, v != 0, base).render();
            if (v > 0) corpus.pairs.push_back({doc.doc_id, gid + "_v0", gid});
            corpus.docs.push_back(std::move(doc));
        }
    }
    return corpus;
}

}  // namespace irmatch::synth
