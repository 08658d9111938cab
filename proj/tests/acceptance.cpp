// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "bpe_oracle.hpp"
#include "desk_pipeline.hpp"
#include "grad_check.hpp"
#include "ir_fixtures.hpp"
#include "irmatch/bpe.hpp"
#include "irmatch/error.hpp"
#include "irmatch/eval.hpp"
#include "irmatch/ir.hpp"
#include "irmatch/matcher.hpp"
#include "irmatch/mlm.hpp"
#include "irmatch/triplet.hpp"

using namespace irmatch;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

/// Collects failed expectations for one criterion.
class Verdict {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        failed_ |= !ok;
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    bool passed() const { return !failed_; }
    std::string detail() const {
        std::string out = notes_;
        for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + ("failed: " + f);
        return out;
    }

private:
    bool failed_ = false;
    std::vector<std::string> failures_;
    std::string notes_;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// ---- 1 ---------------------------------------------------------------------

Verdict normalization_suite() {
    Verdict v;
    const auto start = Clock::now();
    Rng rng(20240601);
    for (int i = 0; i < 1000; ++i) {
        const auto prog = testing::random_program(rng);
        const auto plain_text = testing::render_program(prog, {0, false});
        const auto twin_text = testing::render_program(prog, {1000 + static_cast<std::uint64_t>(i), true});
        const auto parsed = ir::parse_ir_text(plain_text);
        const auto once = ir::normalize(parsed, {});
        const auto twice = ir::normalize(once, {});
        v.expect(once.functions == twice.functions, "idempotence on fixture " + std::to_string(i));
        const auto again = ir::normalize(ir::parse_ir_text(plain_text), {});
        v.expect(ir::to_token_stream(again) == ir::to_token_stream(once), "determinism on fixture " + std::to_string(i));
        const auto twin = ir::normalize(ir::parse_ir_text(twin_text), {});
        v.expect(ir::to_token_stream(twin) == ir::to_token_stream(once), "name-blindness on fixture " + std::to_string(i));
    }
    const double t = seconds_since(start);
    v.expect(t < 10.0, "runtime " + fmt(t, 2) + " s >= 10 s");
    v.note("1000 fixtures in " + fmt(t, 2) + " s");
    return v;
}

// ---- 2 ---------------------------------------------------------------------

Verdict bpe_suite() {
    Verdict v;
    Rng rng(77);
    int compared = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<std::string>> corpus(1 + rng.below(4));
        for (auto& stream : corpus) {
            for (std::uint64_t i = 0, n = 3 + rng.below(12); i < n; ++i) {
                std::string w;
                for (std::uint64_t k = 0, len = 1 + rng.below(6); k < len; ++k) w += static_cast<char>('a' + rng.below(4));
                stream.push_back(w);
                if (rng.bernoulli(0.2)) stream.push_back("<i>");
            }
        }
        const auto tag = " on mini-corpus " + std::to_string(trial);
        const auto expected = testing::brute_force_merges(corpus, 10);
        const auto vocab = bpe::train_bpe(corpus, 1000, 1);
        v.expect(vocab.merges().size() >= expected.size(), "merge count" + tag);
        for (std::size_t i = 0; i < expected.size() && i < vocab.merges().size(); ++i) {
            v.expect(vocab.merges()[i] == expected[i], "merge " + std::to_string(i) + tag);
            ++compared;
        }
        const auto retrained = bpe::train_bpe(corpus, 1000, 1);
        v.expect(retrained == vocab && retrained.serialize() == vocab.serialize(), "retraining" + tag);
        v.expect(bpe::Vocabulary::parse(vocab.serialize()) == vocab, "file round-trip" + tag);
        for (const auto& stream : corpus) {
            v.expect(bpe::decode(vocab, bpe::encode(vocab, stream)) == stream, "encode/decode round-trip" + tag);
        }
        const auto oov = bpe::encode(vocab, std::vector<std::string>{"az"});
        v.expect(std::count(oov.begin(), oov.end(), bpe::kUnk) == 1, "OOV unit maps to [UNK]" + tag);
    }
    v.note(std::to_string(compared) + " merges matched the brute-force oracle");
    return v;
}

// ---- 3 ---------------------------------------------------------------------

Verdict encoder_suite() {
    Verdict v;
    const auto start = Clock::now();
    Rng rng(3);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        nn::Matrix logits(5, 9);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 100.0 * rng.normal();
        const auto p = nn::softmax_rows(logits);
        for (Eigen::Index r = 0; r < p.rows(); ++r) worst_sum = std::max(worst_sum, std::abs(p.row(r).sum() - 1.0));
    }
    v.expect(worst_sum < 1e-6, "softmax row sums");

    nn::Matrix q(1, 3), k(1, 3), val(1, 4);
    q << 0.5, -2.0, 1.0;
    k << 3.0, 0.1, -0.7;
    val << 1.5, -2.25, 0.0, 8.0;
    v.expect(nn::attention(q, k, val, 1.0 / std::sqrt(3.0)) == val, "single-key attention");

    // A zero query sees four equal logits: each value row gets weight exactly 1/4.
    nn::Matrix q0 = nn::Matrix::Zero(1, 2), k4(4, 2), v4(4, 2);
    k4 << 1, 0, 0, 1, -1, 0, 0, -1;
    v4 << 1, 2, 3, 4, 5, 6, 7, 8;
    const auto uniform = nn::attention(q0, k4, v4, 1.0 / std::sqrt(2.0));
    v.expect(uniform(0, 0) == 4.0 && uniform(0, 1) == 5.0, "uniform-symmetry attention");

    const auto mlm_model = testing::micro_model(11);
    const auto batch = testing::micro_mlm_batch(mlm_model.config.vocab_size);
    const auto mlm_check = testing::finite_difference_check(
        mlm_model, [&](const nn::EncoderModel& m, nn::Parameters* g) { return mlm::mlm_loss(m, batch, g); }, 20, 1e-4,
        21);
    v.expect(mlm_check.sampled >= 20 && mlm_check.max_rel_error < 1e-3, "MLM gradient check");

    const auto corpus = testing::micro_paired_corpus();
    const std::vector<triplet::Triplet> triplets = {{0, 1, 3}, {2, 3, 1}};
    double triplet_err = 0.0;
    for (auto pooling : {nn::Pooling::cls, nn::Pooling::mean}) {
        auto model = testing::micro_model(12);
        model.config.pooling = pooling;
        const auto check = testing::finite_difference_check(
            model,
            [&](const nn::EncoderModel& m, nn::Parameters* g) {
                return triplet::triplet_loss({&m}, corpus, triplets, 1.0, {g}).loss;
            },
            20, 1e-4, 22);
        v.expect(check.sampled >= 20 && check.max_rel_error < 1e-3,
                 std::string("triplet gradient check, ") + std::string(nn::to_string(pooling)) + " pooling");
        triplet_err = std::max(triplet_err, check.max_rel_error);
    }
    const double t = seconds_since(start);
    v.expect(t < 60.0, "runtime " + fmt(t, 2) + " s >= 60 s");
    std::ostringstream note;
    note << "max row-sum error " << worst_sum << ", FD rel error MLM " << mlm_check.max_rel_error << " triplet "
         << triplet_err << ", " << fmt(t, 2) << " s";
    v.note(note.str());
    return v;
}

// ---- 4 ---------------------------------------------------------------------

Verdict masking_suite() {
    Verdict v;
    Rng rng(4);
    std::vector<int> hundred;
    for (int i = 0; i < 100; ++i) hundred.push_back(bpe::kNumSpecials + static_cast<int>(rng.below(50)));
    const auto seq = bpe::build_model_input(hundred, std::nullopt, 102);
    v.expect(mlm::mask_tokens(seq, rng, 56).positions.size() == 15, "100 maskable -> 15 selected");

    int mask = 0, keep = 0, random = 0, total = 0;
    bool specials_clean = true;
    while (total < 10000) {
        std::vector<int> a, b;
        for (std::uint64_t i = 0, n = 20 + rng.below(40); i < n; ++i) a.push_back(static_cast<int>(rng.below(56)));
        for (std::uint64_t i = 0, n = rng.below(30); i < n; ++i) b.push_back(static_cast<int>(rng.below(56)));
        const auto input = bpe::build_model_input(a, std::optional<std::span<const int>>(b), 96);
        const auto ex = mlm::mask_tokens(input, rng, 56);
        for (std::size_t j = 0; j < ex.positions.size(); ++j) {
            const auto p = static_cast<std::size_t>(ex.positions[j]);
            specials_clean &= input.ids[p] >= bpe::kNumSpecials && static_cast<int>(p) < input.length;
            switch (ex.actions[j]) {
                case mlm::Replacement::mask: ++mask; break;
                case mlm::Replacement::keep: ++keep; break;
                case mlm::Replacement::random: ++random; break;
            }
            ++total;
        }
    }
    const double pm = mask / double(total), pk = keep / double(total), pr = random / double(total);
    v.expect(std::abs(pm - 0.8) <= 0.02 && std::abs(pk - 0.1) <= 0.02 && std::abs(pr - 0.1) <= 0.02,
             "80/10/10 shares");
    v.expect(specials_clean, "specials or padding selected");
    v.note(std::to_string(total) + " selections: " + fmt(pm, 3) + "/" + fmt(pk, 3) + "/" + fmt(pr, 3));
    return v;
}

// ---- 5 ---------------------------------------------------------------------

Verdict loss_oracles() {
    Verdict v;
    v.expect(triplet::hinge(1.0, -1.0, 0.06) == 0.0, "margin satisfied gives 0");
    v.expect(std::abs(triplet::hinge(0.42, 0.42, 0.06) - 0.06) < 1e-15, "equal sims give alpha");
    v.expect(triplet::hinge(0.5, 0.3, 0.06) == 0.0, "cosines 0.5 / 0.3 give 0");

    const auto model = testing::micro_model(2);
    const auto corpus = testing::micro_paired_corpus();
    const std::vector<triplet::Triplet> same = {{0, 1, 1}, {2, 3, 3}};
    Rng dropout(1);
    const double with_dropout = triplet::triplet_loss({&model}, corpus, same, 0.06, {}, true, &dropout).loss;
    v.expect(std::abs(triplet::triplet_loss({&model}, corpus, same, 0.06).loss - 0.06) < 1e-12 &&
                 std::abs(with_dropout - 0.06) < 1e-12,
             "identical positive and negative documents give alpha");

    auto uniform = testing::micro_model(3);
    uniform.params.token_embedding.setZero();
    uniform.params.mlm_bias.setZero();
    const auto batch = testing::micro_mlm_batch(uniform.config.vocab_size);
    const double loss = mlm::mlm_loss(uniform, batch);
    v.expect(std::abs(loss - std::log(16.0)) < 1e-6, "uniform logits give ln|V|");
    v.note("uniform MLM loss " + fmt(loss, 9) + " vs ln 16 = " + fmt(std::log(16.0), 9));
    return v;
}

// ---- 6 ---------------------------------------------------------------------

Verdict metrics_oracle() {
    Verdict v;
    Rng rng(6);
    int nulls = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<eval::LabeledScore> items;
        const double clone_rate = rng.uniform();
        for (std::uint64_t i = 0, n = 1 + rng.below(40); i < n; ++i) {
            items.push_back({"q", "c", std::round((2.0 * rng.uniform() - 1.0) * 10.0) / 10.0, rng.bernoulli(clone_rate)});
        }
        const double threshold = std::round((2.0 * rng.uniform() - 1.0) * 10.0) / 10.0;
        // Naive oracle: explicit 2x2 table.
        long long t[2][2] = {{0, 0}, {0, 0}};
        for (const auto& it : items) ++t[it.score >= threshold ? 1 : 0][it.is_clone ? 1 : 0];
        const long long tp = t[1][1], fp = t[1][0], fn = t[0][1];
        std::optional<double> p, r, f1;
        if (tp + fp) p = double(tp) / double(tp + fp);
        if (tp + fn) r = double(tp) / double(tp + fn);
        if (p && r) f1 = *p + *r > 0 ? 2 * *p * *r / (*p + *r) : 0.0;

        const auto m = eval::precision_recall_f1(items, threshold);
        const auto same = [](const std::optional<double>& a, const std::optional<double>& b) {
            return a.has_value() == b.has_value() && (!a || std::abs(*a - *b) < 1e-12);
        };
        v.expect(m.tp == tp && m.fp == fp && m.fn == fn && m.tn == t[0][0], "counts on instance " + std::to_string(trial));
        v.expect(same(m.precision, p) && same(m.recall, r) && same(m.f1, f1), "ratios on instance " + std::to_string(trial));
        nulls += !m.precision || !m.recall;
    }
    const std::vector<eval::LabeledScore> none = {{"q", "a", 0.1, true}};
    const auto m = eval::precision_recall_f1(none, 0.8);
    v.expect(!m.precision && m.recall == 0.0 && !m.f1, "no predicted positives gives null P and F1");
    v.note("1000 instances, " + std::to_string(nulls) + " with a null denominator");
    return v;
}

// ---- 7, 8 ------------------------------------------------------------------

double auc(const std::vector<eval::LabeledScore>& scores) {
    double wins = 0.0;
    long long pairs = 0;
    for (const auto& a : scores) {
        if (!a.is_clone) continue;
        for (const auto& b : scores) {
            if (b.is_clone) continue;
            wins += a.score > b.score ? 1.0 : (a.score == b.score ? 0.5 : 0.0);
            ++pairs;
        }
    }
    return wins / static_cast<double>(pairs);
}

Verdict end_to_end(const testing::DeskResult& run, const testing::DeskResult& rerun) {
    Verdict v;
    const auto m = eval::precision_recall_f1(run.scores, 0.8);
    const auto untrained = eval::precision_recall_f1(run.untrained_scores, 0.8);
    v.expect(run.seconds < 900.0, "runtime " + fmt(run.seconds, 1) + " s >= 900 s");
    v.expect(run.separation > 0.3, "separation " + fmt(run.separation) + " <= 0.3");
    v.expect(m.f1 && *m.f1 >= 0.7, "F1@0.8 = " + (m.f1 ? fmt(*m.f1) : std::string("null")) + " < 0.7");
    v.expect(run.pretrained_checkpoint == rerun.pretrained_checkpoint, "pre-trained checkpoints differ between runs");
    v.expect(run.final_checkpoint == rerun.final_checkpoint, "fine-tuned checkpoints differ between runs");
    v.note("sep " + fmt(run.separation) + " (untrained " + fmt(run.untrained_separation) + "), F1@0.8 " +
           (m.f1 ? fmt(*m.f1) : "null") + " P " + (m.precision ? fmt(*m.precision) : "null") + " R " +
           (m.recall ? fmt(*m.recall) : "null") + " (untrained F1 " +
           (untrained.f1 ? fmt(*untrained.f1) : "null") + "), AUC " + fmt(auc(run.untrained_scores)) + " -> " +
           fmt(auc(run.scores)) + ", " + fmt(run.seconds, 1) + " s, rerun byte-identical " +
           (run.final_checkpoint == rerun.final_checkpoint ? "yes" : "no"));
    return v;
}

Verdict sweep_property(const testing::DeskResult& run) {
    Verdict v;
    const auto grid = eval::parse_grid("0.5:0.98:0.02");
    const auto sweep = eval::threshold_sweep(run.scores, grid);
    const auto& low = sweep.points.front().metrics;
    const auto& high = sweep.points.back().metrics;
    v.expect(sweep.points.front().threshold == 0.5 && sweep.points.back().threshold == 0.98, "grid endpoints");
    v.expect(low.recall && high.recall && *high.recall < *low.recall, "recall@0.98 not below recall@0.5");
    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        v.expect(sweep.points[i].metrics.predicted_positive() <= sweep.points[i - 1].metrics.predicted_positive(),
                 "predicted positives rise at " + fmt(sweep.points[i].threshold, 2));
    }
    v.note("recall " + fmt(low.recall.value_or(-1)) + " @0.5 -> " + fmt(high.recall.value_or(-1)) + " @0.98, precision " +
           (low.precision ? fmt(*low.precision) : "null") + " -> " + (high.precision ? fmt(*high.precision) : "null") +
           ", best threshold " + (sweep.best_threshold ? fmt(*sweep.best_threshold, 2) : "none"));
    return v;
}

// ---- 9 ---------------------------------------------------------------------

Verdict matching_boundary() {
    Verdict v;
    nn::Vector a(2), b(2);
    a << 4.0, 3.0;
    b << 1.0, 0.0;
    const auto r = match::match_pair(a, b, 0.8);
    v.expect(r.score == 0.8 && r.matched, "score exactly at threshold counts as matched");

    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + static_cast<int>(rng.below(12));
        const int n = 1 + static_cast<int>(rng.below(50));
        match::EmbeddingIndex index("acceptance", dim);
        for (int i = 0; i < n; ++i) {
            nn::Vector e(dim);
            for (int d = 0; d < dim; ++d) e(d) = rng.normal();
            if (i > 0 && rng.bernoulli(0.15)) e = index.entries()[rng.below(index.size())].embedding;
            index.add({"d" + std::to_string(rng.below(100000)) + "." + std::to_string(i), e});
        }
        nn::Vector query(dim);
        for (int d = 0; d < dim; ++d) query(d) = rng.normal();
        // Oracle: score everything with match_pair, then a full sort.
        std::vector<match::Hit> all;
        for (const auto& e : index.entries()) all.push_back({e.doc_id, match::match_pair(query, e.embedding).score});
        std::sort(all.begin(), all.end(), [](const match::Hit& x, const match::Hit& y) {
            return x.score != y.score ? x.score > y.score : x.doc_id < y.doc_id;
        });
        const auto hits = match::search(query, index, n);
        bool same = hits.size() == all.size();
        for (std::size_t i = 0; same && i < hits.size(); ++i) same = hits[i].doc_id == all[i].doc_id;
        v.expect(same, "top-k order on index " + std::to_string(trial));
    }
    v.note("200 random indices");
    return v;
}

void report(int number, const std::string& name, const std::function<Verdict()>& run, int& failures) {
    Verdict v;
    try {
        v = run();
    } catch (const std::exception& e) {
        v.expect(false, std::string("exception: ") + e.what());
    }
    failures += !v.passed();
    std::cout << (v.passed() ? "[PASS] " : "[FAIL] ") << number << ". " << name;
    if (!v.detail().empty()) std::cout << " (" << v.detail() << ")";
    std::cout << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    const bool verbose = argc > 1 && std::string(argv[1]) == "--verbose";
    int failures = 0;
    report(1, "normalization suite", normalization_suite, failures);
    report(2, "BPE suite", bpe_suite, failures);
    report(3, "encoder numeric suite", encoder_suite, failures);
    report(4, "masking suite", masking_suite, failures);
    report(5, "loss oracles", loss_oracles, failures);
    report(6, "metrics oracle", metrics_oracle, failures);

    testing::DeskSettings settings;
    if (verbose) settings.progress = &std::cerr;
    std::optional<testing::DeskResult> run, rerun;
    std::string pipeline_error;
    try {
        run = testing::run_desk_pipeline(settings);
        rerun = testing::run_desk_pipeline(settings);
    } catch (const std::exception& e) {
        pipeline_error = e.what();
    }
    auto needs_run = [&](std::function<Verdict()> f) -> std::function<Verdict()> {
        return [&, f] {
            if (!run || !rerun) throw Error("desk pipeline failed: " + pipeline_error);
            return f();
        };
    };
    report(7, "end-to-end desk-scale run", needs_run([&] { return end_to_end(*run, *rerun); }), failures);
    report(8, "threshold-sweep property", needs_run([&] { return sweep_property(*run); }), failures);
    report(9, "matching boundary and search oracle", matching_boundary, failures);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures;
}
