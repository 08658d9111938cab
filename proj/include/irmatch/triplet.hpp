#pragma once

// Margin ranking fine-tuning over (binary anchor, source positive, source
// negative) triplets with cosine similarity.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irmatch/encoder.hpp"
#include "irmatch/optim.hpp"
#include "irmatch/random.hpp"

namespace irmatch::triplet {

inline constexpr double kDefaultMargin = 0.06;

struct Pair {
    int binary;  // index into PairedCorpus::docs
    int source;
    std::string group;
};

struct PairedCorpus {
    std::vector<std::vector<int>> docs;  // BPE ids per document, no specials
    std::vector<Pair> pairs;

    /// Throws irmatch::Error when a pair refers to a missing document.
    void validate() const;
};

struct Triplet {
    int anchor;
    int positive;
    int negative;
};

/// Draws negatives uniformly from all source documents outside a group.
class NegativeSampler {
public:
    /// Throws InsufficientGroups with fewer than two distinct groups.
    explicit NegativeSampler(const PairedCorpus& corpus);

    int sample(const std::string& anchor_group, Rng& rng) const;

private:
    std::vector<std::pair<int, std::string>> sources_;
};

/// `batch_size` triplets from uniformly drawn pairs. Throws InsufficientGroups.
std::vector<Triplet> sample_triplets(const PairedCorpus& corpus, const NegativeSampler& sampler,
                                     int batch_size, Rng& rng);

/// max(0, alpha - sim_pos + sim_neg).
double hinge(double sim_pos, double sim_neg, double alpha);

struct BatchStats {
    double loss = 0.0;
    double mean_pos = 0.0;
    double mean_neg = 0.0;
    int active = 0;  // triplets with a positive hinge
};

/// The encoder(s) being trained. `binary` is null when one encoder is shared.
struct Towers {
    const nn::EncoderModel* source;
    const nn::EncoderModel* binary = nullptr;

    const nn::EncoderModel& for_anchor() const { return binary ? *binary : *source; }
};

struct TowerGrads {
    nn::Parameters* source = nullptr;
    nn::Parameters* binary = nullptr;
};

/// Mean hinge over the batch with cosine of pooled embeddings. Each
/// document is encoded once per batch and tower, so a positive that is also
/// the negative yields two equal similarities even with dropout. Gradients
/// of the mean are accumulated into `grads` when given.
/// Throws EmptyBatch, irmatch::Error (alpha < 0).
BatchStats triplet_loss(const Towers& towers, const PairedCorpus& corpus, std::span<const Triplet> batch,
                        double alpha, const TowerGrads& grads = {}, bool train_mode = false,
                        Rng* rng = nullptr);

struct FinetuneConfig {
    int steps = 300;
    int batch_size = 32;
    double alpha = kDefaultMargin;
    std::uint64_t seed = 0;
    nn::AdamConfig adam;
};

struct EpochLog {
    int epoch;
    int last_step;
    double loss;
    double mean_pos;
    double mean_neg;
};

struct FinetuneResult {
    nn::EncoderModel source;
    std::optional<nn::EncoderModel> binary;
};

/// An epoch is ceil(pairs / batch_size) steps; one log entry per epoch and
/// one for a trailing partial epoch.
FinetuneResult finetune(nn::EncoderModel model, std::optional<nn::EncoderModel> binary_tower,
                        const PairedCorpus& corpus, const FinetuneConfig& config,
                        const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace irmatch::triplet
