// irmatch command-line front end.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "irmatch/bpe.hpp"
#include "irmatch/corpus.hpp"
#include "irmatch/encoder.hpp"
#include "irmatch/error.hpp"
#include "irmatch/eval.hpp"
#include "irmatch/keyvalue.hpp"
#include "irmatch/matcher.hpp"
#include "irmatch/mlm.hpp"
#include "irmatch/synth.hpp"
#include "irmatch/triplet.hpp"

namespace fs = std::filesystem;
using namespace irmatch;

namespace {

struct LoadedModel {
    std::string fingerprint;
    nn::Checkpoint checkpoint;

    // Binary-origin documents go through the binary tower when there is one.
    const nn::EncoderModel& tower_for(ir::Origin origin) const {
        if (origin == ir::Origin::binary && checkpoint.binary_tower) return *checkpoint.binary_tower;
        return checkpoint.model;
    }
};

LoadedModel load_model(const std::string& path) {
    const auto bytes = read_file(path);
    return {nn::fingerprint(bytes), nn::parse_checkpoint(bytes)};
}

bpe::Vocabulary load_vocab(const std::string& path) { return bpe::Vocabulary::parse(read_file(path)); }

std::vector<std::string> list_ll_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ll") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
    std::string in, out, policy;
    std::string origin = "source";
    std::string language = "unknown";
};

int run_prepare(const PrepareArgs& a) {
    const auto policy = a.policy.empty() ? ir::NormalizePolicy{} : ir::parse_policy(read_file(a.policy));
    const auto origin = ir::parse_origin(a.origin);
    std::vector<corpus::Record> records;
    int failed = 0;
    for (const auto& path : list_ll_files(a.in)) {
        const auto id = fs::relative(path, a.in).replace_extension().generic_string();
        try {
            records.push_back(corpus::prepare_document(read_file(path), id, policy, origin, a.language));
        } catch (const Error& e) {
            std::cerr << "skipping " << path << ": " << e.what() << "\n";
            ++failed;
        }
    }
    write_file(a.out, corpus::write_records(records));
    std::cerr << "prepared " << records.size() << " documents (" << failed << " skipped)\n";
    return records.empty() ? 1 : 0;
}

// ---- train-bpe -------------------------------------------------------------

struct BpeArgs {
    std::string corpus, out;
    int vocab_size = 8192;
    int min_freq = 2;
};

int run_train_bpe(const BpeArgs& a) {
    std::vector<std::vector<std::string>> streams;
    for (auto& r : corpus::read_records(read_file(a.corpus))) streams.push_back(std::move(r.tokens));
    const auto vocab = bpe::train_bpe(streams, a.vocab_size, a.min_freq);
    write_file(a.out, vocab.serialize());
    std::cerr << "vocabulary: " << vocab.size() << " tokens, " << vocab.merges().size() << " merges\n";
    return 0;
}

// ---- pretrain --------------------------------------------------------------

struct PretrainArgs {
    std::string corpus, vocab, config, out, log;
    int steps = 500;
    int batch_size = 8;
    std::uint64_t seed = 0;
    std::uint64_t init_seed = 0;
    std::string unit = "token";
    double lr = 1e-3;
    int checkpoint_every = 0;
};

int run_pretrain(const PretrainArgs& a) {
    const auto vocab = load_vocab(a.vocab);
    auto config = a.config.empty() ? nn::ModelConfig{} : nn::ModelConfig::parse(read_file(a.config));
    config.vocab_size = vocab.size();
    std::vector<std::vector<int>> docs;
    for (const auto& r : corpus::read_records(read_file(a.corpus))) docs.push_back(bpe::encode(vocab, r.tokens));

    mlm::PretrainConfig pc;
    pc.steps = a.steps;
    pc.batch_size = a.batch_size;
    pc.seed = a.seed;
    pc.unit = mlm::parse_mask_unit(a.unit);
    pc.adam.lr = a.lr;
    pc.checkpoint_every = a.checkpoint_every;

    std::ofstream log;
    if (!a.log.empty()) {
        log.open(a.log);
        log << "step,loss,lr\n";
    }
    const auto model = mlm::pretrain(
        nn::EncoderModel::init(config, a.init_seed), docs, pc, mlm::SentinelIds::from(vocab),
        [&](const mlm::StepLog& s) {
            if (log.is_open()) log << s.step << ',' << s.loss << ',' << s.lr << '\n';
            if (s.step % 50 == 0 || s.step == pc.steps) std::cerr << "step " << s.step << " loss " << s.loss << "\n";
        },
        [&](int step, const nn::EncoderModel& m) {
            write_file(a.out + ".step" + std::to_string(step), nn::serialize_checkpoint(m));
        });
    write_file(a.out, nn::serialize_checkpoint(model));
    return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::string pairs, corpus, vocab, init, out, log;
    double alpha = triplet::kDefaultMargin;
    int steps = 300;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double lr = 1e-3;
    bool two_tower = false;
};

int run_train(const TrainArgs& a) {
    const auto vocab = load_vocab(a.vocab);
    auto init = load_model(a.init).checkpoint;
    if (init.model.config.vocab_size != vocab.size()) throw Error("checkpoint and vocabulary sizes differ");
    const auto paired =
        corpus::build_paired_corpus(corpus::read_records(read_file(a.corpus)), corpus::read_pairs(read_file(a.pairs)), vocab);

    std::optional<nn::EncoderModel> binary = std::move(init.binary_tower);
    if (a.two_tower && !binary) binary = init.model;

    triplet::FinetuneConfig fc;
    fc.steps = a.steps;
    fc.batch_size = a.batch_size;
    fc.alpha = a.alpha;
    fc.seed = a.seed;
    fc.adam.lr = a.lr;

    std::ofstream log;
    if (!a.log.empty()) {
        log.open(a.log);
        log << "epoch,step,loss,mean_pos,mean_neg\n";
    }
    const auto result = triplet::finetune(std::move(init.model), std::move(binary), paired, fc,
                                          [&](const triplet::EpochLog& e) {
                                              if (log.is_open()) {
                                                  log << e.epoch << ',' << e.last_step << ',' << e.loss << ','
                                                      << e.mean_pos << ',' << e.mean_neg << '\n';
                                              }
                                              std::cerr << "epoch " << e.epoch << " loss " << e.loss << " pos "
                                                        << e.mean_pos << " neg " << e.mean_neg << "\n";
                                          });
    write_file(a.out, nn::serialize_checkpoint(result.source, result.binary ? &*result.binary : nullptr));
    return 0;
}

// ---- embed -----------------------------------------------------------------

struct EmbedArgs {
    std::string model, vocab, corpus, out;
    bool all_origins = false;
};

int run_embed(const EmbedArgs& a) {
    const auto model = load_model(a.model);
    const auto vocab = load_vocab(a.vocab);
    match::EmbeddingIndex index(model.fingerprint, model.checkpoint.model.config.d_model);
    for (const auto& r : corpus::read_records(read_file(a.corpus))) {
        if (!a.all_origins && r.origin == ir::Origin::binary) continue;
        auto e = match::embed_document(model.tower_for(r.origin), vocab, r.tokens);
        index.add({r.doc_id, std::move(e.values), r.origin, r.language_tag});
    }
    write_file(a.out, index.serialize());
    std::cerr << "indexed " << index.size() << " documents\n";
    return 0;
}

// ---- match -----------------------------------------------------------------

struct MatchArgs {
    std::string model, vocab, query, index, out, policy;
    double threshold = match::kDefaultThreshold;
    int top_k = 10;
};

int run_match(const MatchArgs& a) {
    const auto model = load_model(a.model);
    const auto vocab = load_vocab(a.vocab);
    const auto index = match::EmbeddingIndex::parse(read_file(a.index));
    const auto policy = a.policy.empty() ? ir::NormalizePolicy{} : ir::parse_policy(read_file(a.policy));
    const auto record = corpus::prepare_document(read_file(a.query), a.query, policy, ir::Origin::binary);
    const auto query = match::embed_document(model.tower_for(record.origin), vocab, record.tokens);

    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : match::search(query.values, index, a.top_k, model.fingerprint)) {
        hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}, {"matched", h.score >= a.threshold}});
    }
    const nlohmann::json report = {{"query", a.query},
                                   {"model_fingerprint", model.fingerprint},
                                   {"threshold", a.threshold},
                                   {"top_k", a.top_k},
                                   {"hits", hits}};
    const auto text = report.dump(2) + "\n";
    if (a.out.empty()) std::cout << text;
    else write_file(a.out, text);
    return 0;
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
    std::string model, vocab, corpus, pairs, out;
    int negatives = 9;
    std::uint64_t seed = 0;
};

int run_score(const ScoreArgs& a) {
    const auto model = load_model(a.model);
    const auto vocab = load_vocab(a.vocab);
    const auto records = corpus::read_records(read_file(a.corpus));
    const auto pairs = corpus::read_pairs(read_file(a.pairs));

    std::map<std::string, std::string> group_of;
    std::vector<eval::Query> queries;
    for (const auto& p : pairs) {
        group_of[p.source_id] = p.group_id;
        queries.push_back({p.binary_id, p.source_id, p.group_id});
    }
    std::map<std::string, nn::Vector> embeddings;
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& r : records) {
        embeddings[r.doc_id] = match::embed_document(model.tower_for(r.origin), vocab, r.tokens).values;
        if (r.origin == ir::Origin::binary) continue;
        // An unpaired source is its own group, so it only ever serves as a negative.
        const auto g = group_of.find(r.doc_id);
        sources.emplace_back(r.doc_id, g == group_of.end() ? "doc:" + r.doc_id : g->second);
    }
    const eval::Protocol protocol{a.negatives, a.seed};
    write_file(a.out, eval::write_scores(eval::score_protocol(queries, sources, embeddings, protocol)));
    std::cerr << "protocol: " << protocol.describe() << "\n";
    return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string scores, out, csv;
    std::string sweep = "0.5:0.98:0.02";
    double threshold = match::kDefaultThreshold;
    std::string protocol = "unspecified";
};

int run_eval(const EvalArgs& a) {
    const auto items = eval::read_scores(read_file(a.scores));
    const auto grid = eval::parse_grid(a.sweep);
    const auto sweep = eval::threshold_sweep(items, grid);
    const auto metrics = eval::precision_recall_f1(items, a.threshold);
    const auto report = eval::report_json(metrics, a.threshold, sweep, a.protocol);
    if (a.out.empty()) std::cout << report;
    else write_file(a.out, report);
    if (!a.csv.empty()) write_file(a.csv, eval::sweep_csv(sweep));
    return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
    synth::SynthSpec spec;
    std::string out_dir;
};

int run_synth(const SynthArgs& a) {
    const auto corpus = synth::generate(a.spec);
    fs::create_directories(fs::path(a.out_dir) / "ll");
    std::vector<corpus::Record> records;
    for (const auto& d : corpus.docs) {
        write_file((fs::path(a.out_dir) / "ll" / (d.doc_id + ".ll")).string(), d.ir_text);
        records.push_back(corpus::prepare_document(d.ir_text, d.doc_id, {}));
    }
    std::vector<corpus::PairRecord> pairs;
    for (const auto& p : corpus.pairs) pairs.push_back({p.binary_id, p.source_id, p.group_id});
    write_file((fs::path(a.out_dir) / "corpus.jsonl").string(), corpus::write_records(records));
    write_file((fs::path(a.out_dir) / "pairs.jsonl").string(), corpus::write_pairs(pairs));
    std::cerr << "wrote " << corpus.docs.size() << " documents and " << pairs.size() << " pairs to " << a.out_dir
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Binary/source code matching over normalized LLVM IR"};
    app.require_subcommand(1);
    std::function<int()> action;

    PrepareArgs prepare;
    auto* cmd = app.add_subcommand("prepare", "Parse and normalize a directory of .ll files into corpus.jsonl");
    cmd->add_option("--in", prepare.in, "Input directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--out", prepare.out, "Output corpus.jsonl")->required();
    cmd->add_option("--policy", prepare.policy, "key = value normalization policy")->check(CLI::ExistingFile);
    cmd->add_option("--origin", prepare.origin, "Origin when a file has no provenance comment");
    cmd->add_option("--language", prepare.language, "Language tag when a file has no provenance comment");
    cmd->callback([&] { action = [&] { return run_prepare(prepare); }; });

    BpeArgs bpe_args;
    cmd = app.add_subcommand("train-bpe", "Learn a BPE vocabulary from corpus.jsonl");
    cmd->add_option("--corpus", bpe_args.corpus)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab-size", bpe_args.vocab_size)->check(CLI::PositiveNumber);
    cmd->add_option("--min-freq", bpe_args.min_freq)->check(CLI::PositiveNumber);
    cmd->add_option("--out", bpe_args.out)->required();
    cmd->callback([&] { action = [&] { return run_train_bpe(bpe_args); }; });

    PretrainArgs pre;
    cmd = app.add_subcommand("pretrain", "Masked-language-model pre-training");
    cmd->add_option("--corpus", pre.corpus)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab", pre.vocab)->required()->check(CLI::ExistingFile);
    cmd->add_option("--config", pre.config, "key = value model config")->check(CLI::ExistingFile);
    cmd->add_option("--steps", pre.steps)->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch-size", pre.batch_size)->check(CLI::PositiveNumber);
    cmd->add_option("--seed", pre.seed, "Sampling, masking and dropout seed");
    cmd->add_option("--init-seed", pre.init_seed, "Weight initialization seed");
    cmd->add_option("--unit", pre.unit, "token or instruction")->check(CLI::IsMember({"token", "instruction"}));
    cmd->add_option("--lr", pre.lr)->check(CLI::PositiveNumber);
    cmd->add_option("--checkpoint-every", pre.checkpoint_every)->check(CLI::NonNegativeNumber);
    cmd->add_option("--log", pre.log, "CSV step,loss,lr");
    cmd->add_option("--out", pre.out)->required();
    cmd->callback([&] { action = [&] { return run_pretrain(pre); }; });

    TrainArgs train;
    cmd = app.add_subcommand("train", "Triplet fine-tuning on binary/source pairs");
    cmd->add_option("--pairs", train.pairs)->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", train.corpus)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab", train.vocab)->required()->check(CLI::ExistingFile);
    cmd->add_option("--init", train.init, "Pre-trained checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--alpha", train.alpha, "Ranking margin")->check(CLI::NonNegativeNumber);
    cmd->add_option("--steps", train.steps)->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
    cmd->add_option("--seed", train.seed);
    cmd->add_option("--lr", train.lr)->check(CLI::PositiveNumber);
    cmd->add_flag("--two-tower", train.two_tower, "Separate encoder for binary documents");
    cmd->add_option("--log", train.log, "CSV epoch,step,loss,mean_pos,mean_neg");
    cmd->add_option("--out", train.out)->required();
    cmd->callback([&] { action = [&] { return run_train(train); }; });

    EmbedArgs embed;
    cmd = app.add_subcommand("embed", "Build a source embedding index");
    cmd->add_option("--model", embed.model)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab", embed.vocab)->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", embed.corpus)->required()->check(CLI::ExistingFile);
    cmd->add_flag("--all-origins", embed.all_origins, "Index binary documents too");
    cmd->add_option("--out", embed.out)->required();
    cmd->callback([&] { action = [&] { return run_embed(embed); }; });

    MatchArgs m;
    cmd = app.add_subcommand("match", "Search an index for a query .ll file");
    cmd->add_option("--model", m.model)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab", m.vocab)->required()->check(CLI::ExistingFile);
    cmd->add_option("--query", m.query)->required()->check(CLI::ExistingFile);
    cmd->add_option("--index", m.index)->required()->check(CLI::ExistingFile);
    cmd->add_option("--policy", m.policy)->check(CLI::ExistingFile);
    cmd->add_option("--threshold", m.threshold)->check(CLI::Range(-1.0, 1.0));
    cmd->add_option("--top-k", m.top_k)->check(CLI::PositiveNumber);
    cmd->add_option("--out", m.out, "Report path (stdout when omitted)");
    cmd->callback([&] { action = [&] { return run_match(m); }; });

    ScoreArgs score;
    cmd = app.add_subcommand("score", "Score pairs under the 1-positive/N-negatives protocol");
    cmd->add_option("--model", score.model)->required()->check(CLI::ExistingFile);
    cmd->add_option("--vocab", score.vocab)->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", score.corpus)->required()->check(CLI::ExistingFile);
    cmd->add_option("--pairs", score.pairs)->required()->check(CLI::ExistingFile);
    cmd->add_option("--negatives", score.negatives)->check(CLI::PositiveNumber);
    cmd->add_option("--seed", score.seed);
    cmd->add_option("--out", score.out)->required();
    cmd->callback([&] { action = [&] { return run_score(score); }; });

    EvalArgs ev;
    cmd = app.add_subcommand("eval", "Precision, recall and F1 with a threshold sweep");
    cmd->add_option("--scores", ev.scores)->required()->check(CLI::ExistingFile);
    cmd->add_option("--sweep", ev.sweep, "lo:hi:step");
    cmd->add_option("--threshold", ev.threshold)->check(CLI::Range(-1.0, 1.0));
    cmd->add_option("--protocol", ev.protocol, "Description stored in the report");
    cmd->add_option("--csv", ev.csv, "Sweep as CSV");
    cmd->add_option("--out", ev.out, "Report path (stdout when omitted)");
    cmd->callback([&] { action = [&] { return run_eval(ev); }; });

    SynthArgs syn;
    cmd = app.add_subcommand("synth", "Generate a synthetic paired corpus");
    cmd->add_option("--groups", syn.spec.n_groups)->check(CLI::Range(2, 1000000));
    cmd->add_option("--variants", syn.spec.variants_per_group)->check(CLI::Range(2, 1000));
    cmd->add_option("--strength", syn.spec.transform_strength)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", syn.spec.seed);
    cmd->add_option("--out-dir", syn.out_dir)->required();
    cmd->callback([&] { action = [&] { return run_synth(syn); }; });

    CLI11_PARSE(app, argc, argv);
    try {
        return action();
    } catch (const Error& e) {
        std::cerr << "irmatch: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "irmatch: " << e.what() << "\n";
        return 1;
    }
}
