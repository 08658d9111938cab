#pragma once

// Seeded generator of paired "source-style" and "binary-style" IR documents.
//
// Every group is one random module. Variant 0 is rendered the way a
// front end would emit it; variants 1.. are rendered the way a lifter would,
// after decompiler-like rewrites applied at `transform_strength`:
//   - register, label and symbol renaming
//   - swaps of adjacent independent instructions
//   - integer literals loaded from constant globals, floating literals
//     passed as their i64 bit patterns
//   - spurious copy temporaries

#include <cstdint>
#include <string>
#include <vector>

#include "irmatch/ir.hpp"

namespace irmatch::synth {

struct SynthSpec {
    int n_groups = 50;
    int variants_per_group = 2;
    std::uint64_t seed = 7;
    double transform_strength = 0.5;

    /// Throws irmatch::Error unless n_groups >= 2, variants >= 2 and strength in [0, 1].
    void validate() const;
};

struct SynthDoc {
    std::string doc_id;
    ir::Origin origin;
    std::string language_tag;
    std::string group_id;
    std::string ir_text;
};

struct SynthPair {
    std::string binary_id;
    std::string source_id;
    std::string group_id;
};

struct SynthCorpus {
    std::vector<SynthDoc> docs;    // group-major, variant-minor
    std::vector<SynthPair> pairs;  // every binary variant with its group's source
};

SynthCorpus generate(const SynthSpec& spec);

/// `; irmatch: origin=<o> language=<l> group=<g>` header written on each document.
std::string provenance_comment(const SynthDoc& doc);

}  // namespace irmatch::synth
