#include "irmatch/mlm.hpp"

#include <algorithm>
#include <cmath>

#include "irmatch/error.hpp"
#include "irmatch/ir.hpp"

namespace irmatch::mlm {

namespace {

constexpr double kMaskShare = 0.8;
constexpr double kKeepShare = 0.1;

std::vector<std::vector<int>> maskable_units(const bpe::TokenSequence& seq, MaskUnit unit, SentinelIds sentinels) {
    std::vector<std::vector<int>> units;
    std::vector<int> run;
    for (int i = 0; i < seq.length; ++i) {
        const int id = seq.ids[static_cast<std::size_t>(i)];
        const bool special = id < bpe::kNumSpecials;
        if (unit == MaskUnit::token) {
            if (!special) units.push_back({i});
            continue;
        }
        if (special || sentinels.contains(id)) {
            if (!run.empty()) units.push_back(std::move(run));
            run.clear();
        } else {
            run.push_back(i);
        }
    }
    if (!run.empty()) units.push_back(std::move(run));
    return units;
}

}  // namespace

std::string_view to_string(MaskUnit unit) { return unit == MaskUnit::token ? "token" : "instruction"; }

MaskUnit parse_mask_unit(std::string_view text) {
    if (text == "token") return MaskUnit::token;
    if (text == "instruction") return MaskUnit::instruction;
    throw FormatError("unknown masking unit '" + std::string(text) + "'");
}

SentinelIds SentinelIds::from(const bpe::Vocabulary& vocab) {
    return {vocab.id(ir::kInstructionSentinel).value_or(-1), vocab.id(ir::kFunctionSentinel).value_or(-1)};
}

int selection_count(int maskable) {
    if (maskable <= 0) throw NothingToMask("sequence has no maskable position");
    return std::max(1, static_cast<int>(std::lround(kMaskFraction * maskable)));
}

MaskedExample mask_tokens(const bpe::TokenSequence& seq, Rng& rng, int vocab_size, MaskUnit unit,
                          SentinelIds sentinels) {
    if (vocab_size <= bpe::kNumSpecials) throw Error("vocabulary has no non-special ids to sample");
    auto units = maskable_units(seq, unit, sentinels);
    const int count = selection_count(static_cast<int>(units.size()));

    // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
    for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
        const auto j = k + rng.below(units.size() - k);
        std::swap(units[k], units[j]);
    }
    MaskedExample ex{seq, std::vector<int>(seq.ids.size(), kIgnore), {}, {}};
    for (int k = 0; k < count; ++k) {
        const auto& u = units[static_cast<std::size_t>(k)];
        ex.positions.insert(ex.positions.end(), u.begin(), u.end());
    }
    std::sort(ex.positions.begin(), ex.positions.end());

    for (int pos : ex.positions) {
        const auto p = static_cast<std::size_t>(pos);
        ex.labels[p] = seq.ids[p];
        const double r = rng.uniform();
        if (r < kMaskShare) {
            ex.input.ids[p] = bpe::kMask;
            ex.actions.push_back(Replacement::mask);
        } else if (r < kMaskShare + kKeepShare) {
            ex.actions.push_back(Replacement::keep);
        } else {
            const auto span = static_cast<std::uint64_t>(vocab_size - bpe::kNumSpecials);
            ex.input.ids[p] = bpe::kNumSpecials + static_cast<int>(rng.below(span));
            ex.actions.push_back(Replacement::random);
        }
    }
    return ex;
}

nn::Matrix mlm_logits(const nn::EncoderModel& model, const nn::Matrix& rows) {
    nn::Matrix logits = rows * model.params.token_embedding.transpose();
    logits.rowwise() += model.params.mlm_bias.row(0);
    return logits;
}

double mlm_loss(const nn::EncoderModel& model, std::span<const MaskedExample> batch, nn::Parameters* grads,
                bool train_mode, Rng* rng) {
    std::size_t total = 0;
    for (const auto& ex : batch) total += ex.positions.size();
    if (total == 0) throw NoMaskedPositions("batch has no masked positions");
    const double scale = 1.0 / static_cast<double>(total);

    double loss_sum = 0.0;
    nn::ForwardCache cache;
    for (const auto& ex : batch) {
        if (ex.positions.empty()) continue;
        const auto n = static_cast<std::size_t>(ex.input.length);
        const std::span<const int> ids(ex.input.ids.data(), n);
        const std::span<const std::uint8_t> mask(ex.input.attention_mask.data(), n);
        const nn::Matrix hidden = nn::forward(model, ids, mask, train_mode, rng, grads ? &cache : nullptr);

        const auto m = static_cast<Eigen::Index>(ex.positions.size());
        nn::Matrix rows(m, hidden.cols());
        for (Eigen::Index r = 0; r < m; ++r) rows.row(r) = hidden.row(ex.positions[static_cast<std::size_t>(r)]);
        nn::Matrix logits = mlm_logits(model, rows);

        nn::Matrix d_logits(logits.rows(), logits.cols());
        for (Eigen::Index r = 0; r < m; ++r) {
            const int label = ex.labels[static_cast<std::size_t>(ex.positions[static_cast<std::size_t>(r)])];
            const double max = logits.row(r).maxCoeff();
            const auto shifted = (logits.row(r).array() - max).eval();
            const double log_z = std::log(shifted.exp().sum());
            loss_sum += log_z - shifted(label);
            if (grads) {
                d_logits.row(r) = (shifted - log_z).exp().matrix() * scale;
                d_logits(r, label) -= scale;
            }
        }
        if (!grads) continue;

        grads->token_embedding.noalias() += d_logits.transpose() * rows;
        grads->mlm_bias += d_logits.colwise().sum();
        const nn::Matrix d_rows = d_logits * model.params.token_embedding;
        nn::Matrix d_hidden = nn::Matrix::Zero(hidden.rows(), hidden.cols());
        for (Eigen::Index r = 0; r < m; ++r) d_hidden.row(ex.positions[static_cast<std::size_t>(r)]) += d_rows.row(r);
        nn::backward(model, cache, d_hidden, *grads);
    }
    const double loss = loss_sum * scale;
    if (!std::isfinite(loss)) throw NonFiniteLoss("MLM loss is not finite");
    return loss;
}

bpe::TokenSequence pretraining_input(std::span<const int> doc, int max_len, SentinelIds sentinels) {
    const std::size_t middle = doc.size() / 2;
    std::optional<std::size_t> split;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!sentinels.contains(doc[i])) continue;
        const auto dist = [&](std::size_t j) { return j > middle ? j - middle : middle - j; };
        if (!split || dist(i) < dist(*split)) split = i;
    }
    if (!split) return bpe::build_model_input(doc.first(middle), doc.subspan(middle), max_len);
    return bpe::build_model_input(doc.first(*split), doc.subspan(*split + 1), max_len);
}

nn::EncoderModel pretrain(nn::EncoderModel model, const std::vector<std::vector<int>>& docs,
                          const PretrainConfig& config, SentinelIds sentinels, const StepCallback& on_step,
                          const CheckpointCallback& on_checkpoint) {
    std::vector<bpe::TokenSequence> inputs;
    for (const auto& doc : docs) {
        auto input = pretraining_input(doc, model.config.max_len, sentinels);
        if (!maskable_units(input, config.unit, sentinels).empty()) inputs.push_back(std::move(input));
    }
    if (inputs.empty()) throw EmptyCorpus("pre-training corpus has no maskable document");
    if (config.batch_size < 1) throw Error("batch_size must be at least 1");

    nn::Adam adam(model.config, config.adam);
    nn::Parameters grads = nn::Parameters::zeros(model.config);
    std::vector<MaskedExample> batch;
    for (int step = 1; step <= config.steps; ++step) {
        const auto s = static_cast<std::uint64_t>(step);
        Rng pick = Rng::derive(config.seed, s, 0);
        batch.clear();
        for (int j = 0; j < config.batch_size; ++j) {
            const auto& input = inputs[pick.below(inputs.size())];
            Rng mask_rng = Rng::derive(config.seed, s, 1 + static_cast<std::uint64_t>(j));
            batch.push_back(mask_tokens(input, mask_rng, model.config.vocab_size, config.unit, sentinels));
        }
        Rng dropout = Rng::derive(config.seed, s, 0xD0D0);
        grads.set_zero();
        const double loss = mlm_loss(model, batch, &grads, true, &dropout);
        adam.step(model.params, grads);
        if (on_step) on_step({step, loss, config.adam.lr});
        if (on_checkpoint && config.checkpoint_every > 0 && step % config.checkpoint_every == 0) {
            on_checkpoint(step, model);
        }
    }
    return model;
}

}  // namespace irmatch::mlm
