#pragma once

// Random well-formed IR programs rendered under interchangeable naming
// schemes. Two renderings of the same program differ only in register,
// label, global and type names plus comments and metadata.

#include <string>
#include <vector>

#include "irmatch/random.hpp"

namespace irmatch::testing {

struct Piece {
    enum Kind { text, local, label, global } kind;
    std::string value;  // literal text
    int id = 0;
};

struct AbstractInstruction {
    std::vector<Piece> pieces;
};

struct AbstractBlock {
    std::vector<AbstractInstruction> instructions;
};

struct AbstractFunction {
    int global_id;
    int n_params;
    std::vector<AbstractBlock> blocks;
};

struct AbstractProgram {
    std::vector<AbstractFunction> functions;
    int n_globals = 0;
};

inline AbstractProgram random_program(Rng& rng) {
    AbstractProgram prog;
    prog.n_globals = 3 + static_cast<int>(rng.below(3));
    const int n_functions = 1 + static_cast<int>(rng.below(3));
    static const std::vector<std::string> binops = {"add", "sub", "mul", "xor", "shl", "and"};
    static const std::vector<std::string> preds = {"eq", "ne", "slt", "sgt", "ule"};

    for (int f = 0; f < n_functions; ++f) {
        AbstractFunction fn;
        fn.global_id = prog.n_globals + f;
        fn.n_params = 1 + static_cast<int>(rng.below(3));
        const int n_blocks = 1 + static_cast<int>(rng.below(3));
        int next_value = fn.n_params;
        auto any_value = [&] { return static_cast<int>(rng.below(static_cast<std::uint64_t>(next_value))); };
        auto lit = [](std::string s) { return Piece{Piece::text, std::move(s)}; };
        auto val = [](int id) { return Piece{Piece::local, {}, id}; };

        for (int b = 0; b < n_blocks; ++b) {
            AbstractBlock block;
            const int n_inst = 1 + static_cast<int>(rng.below(5));
            for (int i = 0; i < n_inst; ++i) {
                AbstractInstruction inst;
                const int def = next_value;
                switch (rng.below(6)) {
                    case 0:
                        inst.pieces = {val(def), lit(" = " + binops[rng.below(binops.size())] + " i32 "),
                                       val(any_value()), lit(", "), val(any_value())};
                        ++next_value;
                        break;
                    case 1:
                        inst.pieces = {val(def), lit(" = add nsw i32 "), val(any_value()),
                                       lit(", " + std::to_string(rng.below(100)))};
                        ++next_value;
                        break;
                    case 2:
                        inst.pieces = {val(def), lit(" = icmp " + preds[rng.below(preds.size())] + " i32 "),
                                       val(any_value()), lit(", "), val(any_value())};
                        ++next_value;
                        break;
                    case 3:
                        inst.pieces = {lit("store i32 "), val(any_value()), lit(", ptr "),
                                       Piece{Piece::global, {}, static_cast<int>(rng.below(static_cast<std::uint64_t>(prog.n_globals)))},
                                       lit(", align 4")};
                        break;
                    case 4:
                        inst.pieces = {val(def), lit(" = load i32, ptr "),
                                       Piece{Piece::global, {}, static_cast<int>(rng.below(static_cast<std::uint64_t>(prog.n_globals)))},
                                       lit(", align 4")};
                        ++next_value;
                        break;
                    default:
                        inst.pieces = {val(def), lit(" = call i32 "),
                                       Piece{Piece::global, {}, prog.n_globals + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_functions)))},
                                       lit("(i32 "), val(any_value()), lit(", double 2.5)")};
                        ++next_value;
                        break;
                }
                block.instructions.push_back(std::move(inst));
            }
            AbstractInstruction term;
            if (b + 1 < n_blocks) {
                if (rng.below(2) == 0) {
                    term.pieces = {lit("br label "), Piece{Piece::label, {}, b + 1}};
                } else {
                    const int cond = next_value++;
                    block.instructions.push_back(
                        {{val(cond), lit(" = icmp eq i32 "), val(any_value()), lit(", 0")}});
                    term.pieces = {lit("br i1 "), val(cond), lit(", label "), Piece{Piece::label, {}, b + 1},
                                   lit(", label "), Piece{Piece::label, {}, n_blocks - 1}};
                }
            } else {
                term.pieces = {lit("ret i32 "), val(any_value())};
            }
            block.instructions.push_back(std::move(term));
            fn.blocks.push_back(std::move(block));
        }
        prog.functions.push_back(std::move(fn));
    }
    return prog;
}

struct NamingScheme {
    std::uint64_t seed = 0;
    bool decorate = false;  // add comments, metadata and attribute noise

    std::string local(int fn, int id) const { return "%" + stem(1, fn, id); }
    std::string label(int fn, int id) const { return stem(2, fn, id); }
    std::string global(int id) const { return "@" + stem(3, 0, id); }

    std::string stem(int space, int fn, int id) const {
        if (seed == 0) {
            static const char* prefix[] = {"", "r", "L", "G"};
            return std::string(prefix[space]) + std::to_string(fn) + "_" + std::to_string(id);
        }
        Rng r = Rng::derive(seed, static_cast<std::uint64_t>(space * 100000 + fn * 1000), static_cast<std::uint64_t>(id));
        std::string s;
        const int len = 1 + static_cast<int>(r.below(6));
        for (int i = 0; i < len; ++i) s += static_cast<char>('a' + r.below(26));
        return s + "." + std::to_string(space) + "." + std::to_string(fn) + "." + std::to_string(id);
    }
};

inline std::string render_program(const AbstractProgram& prog, const NamingScheme& names) {
    std::string out;
    if (names.decorate) out += "; ModuleID = 'decorated'\nsource_filename = \"x.c\"\n";
    for (int g = 0; g < prog.n_globals; ++g) {
        out += names.global(g) + " = global i32 0, align 4\n";
    }
    for (std::size_t f = 0; f < prog.functions.size(); ++f) {
        const auto& fn = prog.functions[f];
        const int fi = static_cast<int>(f);
        out += "define i32 " + names.global(fn.global_id) + "(";
        for (int p = 0; p < fn.n_params; ++p) {
            if (p) out += ", ";
            out += "i32 " + names.local(fi, p);
        }
        out += names.decorate ? ") #0 !dbg !7 {\n" : ") {\n";
        for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
            out += names.label(fi, static_cast<int>(b)) + ":";
            if (names.decorate) out += "  ; preds = whatever";
            out += "\n";
            int k = 0;
            for (const auto& inst : fn.blocks[b].instructions) {
                out += "  ";
                for (const auto& piece : inst.pieces) {
                    switch (piece.kind) {
                        case Piece::text: out += piece.value; break;
                        case Piece::local: out += names.local(fi, piece.id); break;
                        case Piece::label: out += "%" + names.label(fi, piece.id); break;
                        case Piece::global: out += names.global(piece.id); break;
                    }
                }
                if (names.decorate && (k++ % 2 == 0)) out += ", !dbg !" + std::to_string(10 + k);
                out += "\n";
                if (names.decorate && k == 1) {
                    out += "  call void @llvm.dbg.value(metadata i32 0, metadata !9, metadata !DIExpression()), !dbg !12\n";
                }
            }
        }
        out += "}\n\n";
    }
    if (names.decorate) {
        out += "declare void @llvm.dbg.value(metadata, metadata, metadata)\n";
        out += "attributes #0 = { noinline nounwind \"frame-pointer\"=\"all\" }\n";
        out += "!7 = distinct !DISubprogram(name: \"f\", line: 3)\n!9 = !{}\n";
    }
    return out;
}

inline std::size_t program_instruction_count(const AbstractProgram& prog) {
    std::size_t n = 0;
    for (const auto& f : prog.functions)
        for (const auto& b : f.blocks) n += b.instructions.size();
    return n;
}

}  // namespace irmatch::testing
