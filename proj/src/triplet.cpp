#include "irmatch/triplet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "irmatch/error.hpp"
#include "irmatch/matcher.hpp"

namespace irmatch::triplet {

namespace {

struct Encoded {
    nn::ForwardCache cache;
    nn::Vector embedding;
    std::vector<std::uint8_t> mask;
};

Encoded encode_doc(const nn::EncoderModel& model, std::span<const int> doc, bool train_mode, Rng* rng,
                   bool keep_cache) {
    const auto input = bpe::build_model_input(doc, std::nullopt, model.config.max_len);
    const auto n = static_cast<std::size_t>(input.length);
    Encoded e;
    e.mask.assign(input.attention_mask.begin(), input.attention_mask.begin() + static_cast<std::ptrdiff_t>(n));
    const auto hidden = nn::forward(model, std::span<const int>(input.ids.data(), n), e.mask, train_mode, rng,
                                    keep_cache ? &e.cache : nullptr);
    e.embedding = nn::pool(hidden, e.mask, model.config.pooling).values;
    return e;
}

/// d cos(a, b) / d a.
nn::Vector cosine_grad(const nn::Vector& a, const nn::Vector& b, double cos) {
    const double na = a.norm();
    return b / (na * b.norm()) - cos * a / (na * na);
}

void backprop(const nn::EncoderModel& model, const Encoded& e, const nn::Vector& d_embedding, nn::Parameters& g) {
    const auto d_hidden = nn::pool_backward(d_embedding, e.mask.size(), e.mask, model.config.pooling);
    nn::backward(model, e.cache, d_hidden, g);
}

}  // namespace

void PairedCorpus::validate() const {
    const auto n = static_cast<int>(docs.size());
    for (const auto& p : pairs) {
        if (p.binary < 0 || p.binary >= n || p.source < 0 || p.source >= n) {
            throw Error("pair in group '" + p.group + "' refers to a missing document");
        }
    }
}

NegativeSampler::NegativeSampler(const PairedCorpus& corpus) {
    std::set<std::pair<int, std::string>> seen;
    std::set<std::string> groups;
    for (const auto& p : corpus.pairs) {
        if (seen.emplace(p.source, p.group).second) sources_.emplace_back(p.source, p.group);
        groups.insert(p.group);
    }
    if (groups.size() < 2) throw InsufficientGroups("negative sampling needs at least two groups");
}

int NegativeSampler::sample(const std::string& anchor_group, Rng& rng) const {
    // Rejection keeps the draw uniform over the foreign sources.
    while (true) {
        const auto& [doc, group] = sources_[rng.below(sources_.size())];
        if (group != anchor_group) return doc;
    }
}

std::vector<Triplet> sample_triplets(const PairedCorpus& corpus, const NegativeSampler& sampler, int batch_size,
                                     Rng& rng) {
    if (batch_size < 1) throw Error("batch_size must be at least 1");
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        const auto& p = corpus.pairs[rng.below(corpus.pairs.size())];
        out.push_back({p.binary, p.source, sampler.sample(p.group, rng)});
    }
    return out;
}

double hinge(double sim_pos, double sim_neg, double alpha) { return std::max(0.0, alpha - sim_pos + sim_neg); }

BatchStats triplet_loss(const Towers& towers, const PairedCorpus& corpus, std::span<const Triplet> batch,
                        double alpha, const TowerGrads& grads, bool train_mode, Rng* rng) {
    if (batch.empty()) throw EmptyBatch("triplet batch is empty");
    if (!(alpha >= 0.0)) throw Error("margin must be non-negative");
    const bool want_grads = grads.source != nullptr;
    if (want_grads && towers.binary && !grads.binary) throw Error("two-tower training needs binary gradients");

    // Each (tower, document) is encoded once per batch, in order of first use.
    struct Slot {
        const nn::EncoderModel* model;
        nn::Parameters* grads;
        Encoded encoded;
        nn::Vector d_embedding;
    };
    std::vector<Slot> slots;
    std::map<std::pair<const nn::EncoderModel*, int>, std::size_t> slot_of;
    auto slot = [&](const nn::EncoderModel& model, nn::Parameters* g, int doc) {
        const auto [it, fresh] = slot_of.try_emplace({&model, doc}, slots.size());
        if (fresh) {
            auto e = encode_doc(model, corpus.docs.at(static_cast<std::size_t>(doc)), train_mode, rng, want_grads);
            const auto dim = e.embedding.size();
            slots.push_back({&model, g, std::move(e), nn::Vector::Zero(dim)});
        }
        return it->second;
    };
    nn::Parameters* anchor_grads = towers.binary ? grads.binary : grads.source;
    struct Ref {
        std::size_t a, p, n;
    };
    std::vector<Ref> refs;
    for (const auto& t : batch) {
        const auto a = slot(towers.for_anchor(), anchor_grads, t.anchor);
        const auto p = slot(*towers.source, grads.source, t.positive);
        const auto n = slot(*towers.source, grads.source, t.negative);
        refs.push_back({a, p, n});
    }

    const double w = 1.0 / static_cast<double>(batch.size());
    BatchStats stats;
    for (const auto& r : refs) {
        const auto& a = slots[r.a].encoded.embedding;
        const auto& p = slots[r.p].encoded.embedding;
        const auto& n = slots[r.n].encoded.embedding;
        const double sp = match::cosine(a, p);
        const double sn = match::cosine(a, n);
        const double h = hinge(sp, sn, alpha);
        stats.loss += w * h;
        stats.mean_pos += w * sp;
        stats.mean_neg += w * sn;
        if (h <= 0.0) continue;
        ++stats.active;
        if (!want_grads) continue;
        slots[r.a].d_embedding += w * (cosine_grad(a, n, sn) - cosine_grad(a, p, sp));
        slots[r.p].d_embedding -= w * cosine_grad(p, a, sp);
        slots[r.n].d_embedding += w * cosine_grad(n, a, sn);
    }
    if (!std::isfinite(stats.loss)) throw NonFiniteLoss("triplet loss is not finite");
    if (want_grads && stats.active > 0) {
        for (const auto& s : slots) {
            if (!s.d_embedding.isZero(0.0)) backprop(*s.model, s.encoded, s.d_embedding, *s.grads);
        }
    }
    return stats;
}

FinetuneResult finetune(nn::EncoderModel model, std::optional<nn::EncoderModel> binary_tower,
                        const PairedCorpus& corpus, const FinetuneConfig& config,
                        const std::function<void(const EpochLog&)>& on_epoch) {
    corpus.validate();
    const NegativeSampler sampler(corpus);
    if (config.batch_size < 1) throw Error("batch_size must be at least 1");
    const int steps_per_epoch =
        static_cast<int>((corpus.pairs.size() + static_cast<std::size_t>(config.batch_size) - 1) /
                         static_cast<std::size_t>(config.batch_size));

    FinetuneResult result{std::move(model), std::move(binary_tower)};
    nn::Adam source_adam(result.source.config, config.adam);
    std::optional<nn::Adam> binary_adam;
    if (result.binary) binary_adam.emplace(result.binary->config, config.adam);
    nn::Parameters source_grads = nn::Parameters::zeros(result.source.config);
    std::optional<nn::Parameters> binary_grads;
    if (result.binary) binary_grads = nn::Parameters::zeros(result.binary->config);

    EpochLog acc{1, 0, 0.0, 0.0, 0.0};
    int in_epoch = 0;
    auto flush = [&] {
        if (in_epoch == 0) return;
        const double k = 1.0 / in_epoch;
        if (on_epoch) on_epoch({acc.epoch, acc.last_step, acc.loss * k, acc.mean_pos * k, acc.mean_neg * k});
        acc = {acc.epoch + 1, acc.last_step, 0.0, 0.0, 0.0};
        in_epoch = 0;
    };

    for (int step = 1; step <= config.steps; ++step) {
        const auto s = static_cast<std::uint64_t>(step);
        Rng pick = Rng::derive(config.seed, s, 0);
        const auto batch = sample_triplets(corpus, sampler, config.batch_size, pick);
        Rng dropout = Rng::derive(config.seed, s, 0xD0D0);
        source_grads.set_zero();
        if (binary_grads) binary_grads->set_zero();
        const Towers towers{&result.source, result.binary ? &*result.binary : nullptr};
        const auto stats = triplet_loss(towers, corpus, batch, config.alpha,
                                        {&source_grads, binary_grads ? &*binary_grads : nullptr}, true, &dropout);
        source_adam.step(result.source.params, source_grads);
        if (binary_adam) binary_adam->step(result.binary->params, *binary_grads);

        acc.last_step = step;
        acc.loss += stats.loss;
        acc.mean_pos += stats.mean_pos;
        acc.mean_neg += stats.mean_neg;
        if (++in_epoch == steps_per_epoch) flush();
    }
    flush();
    return result;
}

}  // namespace irmatch::triplet
