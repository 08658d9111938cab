#pragma once

// Masked-language-model pre-training.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "irmatch/bpe.hpp"
#include "irmatch/encoder.hpp"
#include "irmatch/optim.hpp"
#include "irmatch/random.hpp"

namespace irmatch::mlm {

inline constexpr int kIgnore = -1;
inline constexpr double kMaskFraction = 0.15;

enum class MaskUnit { token, instruction };

std::string_view to_string(MaskUnit unit);
MaskUnit parse_mask_unit(std::string_view text);

enum class Replacement { mask, keep, random };

/// Vocabulary ids of the instruction and function sentinels; -1 if absent.
struct SentinelIds {
    int instruction = -1;
    int function = -1;

    static SentinelIds from(const bpe::Vocabulary& vocab);
    bool contains(int id) const { return id >= 0 && (id == instruction || id == function); }
};

struct MaskedExample {
    bpe::TokenSequence input;
    std::vector<int> labels;            // original id where selected, kIgnore elsewhere
    std::vector<int> positions;         // selected positions, ascending
    std::vector<Replacement> actions;   // parallel to positions
};

/// max(1, round(0.15 * maskable)). Throws NothingToMask when maskable == 0.
int selection_count(int maskable);

/// Selects units uniformly without replacement and corrupts each selected
/// position: 80% [MASK], 10% unchanged, 10% a uniform non-special id.
/// Specials ([CLS], [SEP], [EOS], [MASK], [PAD], [UNK]) are never selected.
/// With MaskUnit::instruction the units are the runs between sentinels and
/// every position of a chosen run is selected.
/// Throws NothingToMask.
MaskedExample mask_tokens(const bpe::TokenSequence& seq, Rng& rng, int vocab_size,
                          MaskUnit unit = MaskUnit::token, SentinelIds sentinels = {});

/// Logits over the vocabulary for the given hidden rows, using the tied
/// token-embedding projection plus the MLM bias.
nn::Matrix mlm_logits(const nn::EncoderModel& model, const nn::Matrix& rows);

/// Mean cross-entropy over every selected position in the batch. When
/// `grads` is set, the gradient of that mean is accumulated into it.
/// Throws NoMaskedPositions, NonFiniteLoss.
double mlm_loss(const nn::EncoderModel& model, std::span<const MaskedExample> batch,
                nn::Parameters* grads = nullptr, bool train_mode = false, Rng* rng = nullptr);

/// Formats a document (BPE ids without specials) as [CLS] c1 [SEP] c2 [EOS],
/// splitting at the instruction sentinel closest to the middle.
bpe::TokenSequence pretraining_input(std::span<const int> doc, int max_len, SentinelIds sentinels);

struct PretrainConfig {
    int steps = 500;
    int batch_size = 8;
    std::uint64_t seed = 0;
    MaskUnit unit = MaskUnit::token;
    nn::AdamConfig adam;
    int checkpoint_every = 0;  // 0 disables periodic checkpoints
};

struct StepLog {
    int step;
    double loss;
    double lr;
};

using StepCallback = std::function<void(const StepLog&)>;
using CheckpointCallback = std::function<void(int step, const nn::EncoderModel&)>;

/// Runs `config.steps` Adam updates on uniformly sampled documents.
/// Throws EmptyCorpus when no document has a maskable token.
nn::EncoderModel pretrain(nn::EncoderModel model, const std::vector<std::vector<int>>& docs,
                          const PretrainConfig& config, SentinelIds sentinels,
                          const StepCallback& on_step = {}, const CheckpointCallback& on_checkpoint = {});

}  // namespace irmatch::mlm
