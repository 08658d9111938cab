#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "grad_check.hpp"
#include "irmatch/corpus.hpp"
#include "irmatch/error.hpp"
#include "irmatch/matcher.hpp"

using namespace irmatch;
using namespace irmatch::match;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vector random_vector(Rng& rng, int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    return v;
}

// Every score, sorted in full with a plain comparison sort.
std::vector<Hit> brute_force(const Vector& query, const EmbeddingIndex& index) {
    std::vector<Hit> all;
    for (const auto& e : index.entries()) {
        const double dot = query.dot(e.embedding);
        all.push_back({e.doc_id, dot / std::sqrt(query.squaredNorm() * e.embedding.squaredNorm())});
    }
    std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.doc_id < b.doc_id; });
    std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
    return all;
}

constexpr const char* kSourceStyle = R"(define i32 @sum_squares(i32 %n) {
entry:
  %mul = mul nsw i32 %n, %n
  %add = add nsw i32 %mul, 7
  ret i32 %add
}
)";

constexpr const char* kRenamedTwin = R"(define i32 @function_401000(i32 %a0) {
dec_label_pc_401000:
  %v1_401003 = mul nsw i32 %a0, %a0
  %v2_401007 = add nsw i32 %v1_401003, 7
  ret i32 %v2_401007
}
)";

}  // namespace

TEST_CASE("cosine hand cases") {
    CHECK(cosine(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(cosine(vec({2, 0}), vec({-3, 0})) == -1.0);
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_vector(rng, 7);
        CHECK(cosine(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(cosine(vec({1, 0}), vec({1, 0, 0})), DimensionMismatch);
    CHECK_THROWS_AS(cosine(vec({0, 0}), vec({1, 0})), ZeroVector);
    CHECK_THROWS_AS(cosine(vec({1, 0}), vec({0, 0})), ZeroVector);
}

TEST_CASE("cosine symmetry, scale invariance and range") {
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_vector(rng, 16), b = random_vector(rng, 16);
        const double s = cosine(a, b);
        CHECK(std::abs(s - cosine(b, a)) < 1e-9);
        const double lambda = 1e-3 + rng.uniform() * 1e3;
        CHECK(std::abs(s - cosine(lambda * a, b)) < 1e-9);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("threshold boundary is inclusive") {
    // 4/5 is the same double as the literal 0.8.
    const auto at = match_pair(vec({4, 3}), vec({1, 0}), 0.8);
    CHECK(at.score == 0.8);
    CHECK(at.matched);

    const double c79 = 0.79;
    const auto below = match_pair(vec({c79, std::sqrt(1 - c79 * c79)}), vec({1, 0}), 0.8);
    CHECK(below.score == doctest::Approx(0.79));
    CHECK(!below.matched);

    Rng rng(3);
    const auto x = random_vector(rng, 9);
    for (double t : {-1.0, 0.0, 0.8, 1.0}) CHECK(match_pair(x, x, t).matched);
    CHECK(match_pair(x, x).matched);
    CHECK_THROWS_AS(match_pair(x, x, 1.5), Error);
    CHECK_THROWS_AS(match_pair(x, x, -1.01), Error);
    CHECK_THROWS_AS(match_pair(x, x, std::nan("")), Error);
}

TEST_CASE("search on a five-vector fixture") {
    EmbeddingIndex index("f00d", 2);
    // Cosines with the query (1, 0): 1, 1/sqrt2, 0, -1, 3/5.
    index.add({"a", vec({1, 0})});
    index.add({"b", vec({1, 1})});
    index.add({"c", vec({0, 1})});
    index.add({"d", vec({-1, 0})});
    index.add({"e", vec({3, 4})});
    const auto hits = search(vec({1, 0}), index, 5);
    std::vector<std::string> order;
    for (const auto& h : hits) order.push_back(h.doc_id);
    CHECK(order == std::vector<std::string>{"a", "b", "e", "c", "d"});
    CHECK(hits[0].score == 1.0);
    CHECK(hits[2].score == doctest::Approx(0.6));

    CHECK(search(vec({1, 0}), index, 50).size() == 5);
    const auto top2 = search(vec({1, 0}), index, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[1].doc_id == "b");

    // Equal scores go to the smaller id.
    EmbeddingIndex ties("f00d", 2);
    ties.add({"zeta", vec({0, 2})});
    ties.add({"alpha", vec({0, 1})});
    ties.add({"mid", vec({0, 5})});
    const auto t = search(vec({0, 1}), ties, 3);
    CHECK(t[0].doc_id == "alpha");
    CHECK(t[1].doc_id == "mid");
    CHECK(t[2].doc_id == "zeta");
}

TEST_CASE("search errors") {
    EmbeddingIndex index("f00d", 2);
    CHECK_THROWS_AS(search(vec({1, 0}), index, 1), EmptyIndex);
    index.add({"a", vec({1, 0})});
    CHECK_THROWS_AS(search(vec({1, 0}), index, 0), Error);
    CHECK_THROWS_AS(search(vec({1, 0}), index, 1, "beef"), FingerprintMismatch);
    CHECK(search(vec({1, 0}), index, 1, "f00d").size() == 1);
    CHECK_THROWS_AS(search(vec({1, 0, 0}), index, 1), DimensionMismatch);
    CHECK_THROWS_AS(index.add({"b", vec({1, 0, 0})}), DimensionMismatch);
}

TEST_CASE("top-k equals a brute-force sort on 200 random indices") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + static_cast<int>(rng.below(10));
        const int n = 1 + static_cast<int>(rng.below(40));
        EmbeddingIndex index("fp", dim);
        for (int i = 0; i < n; ++i) {
            // Some duplicates so ties actually occur.
            auto v = (i > 0 && rng.bernoulli(0.2)) ? index.entries()[rng.below(index.size())].embedding
                                                   : random_vector(rng, dim);
            index.add({"doc" + std::to_string(rng.below(1000)) + "_" + std::to_string(i), v});
        }
        const auto query = random_vector(rng, dim);
        const auto expected = brute_force(query, index);
        const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 5));
        const auto hits = search(query, index, k);
        REQUIRE(hits.size() == std::min<std::size_t>(static_cast<std::size_t>(k), index.size()));
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].doc_id == expected[i].doc_id);
            CHECK(std::abs(hits[i].score - expected[i].score) < 1e-12);
        }
        // The query's own vector ranks first with score 1.
        const auto& self = index.entries()[rng.below(index.size())];
        const auto own = search(self.embedding, index, 1);
        CHECK(own[0].score == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("index round-trip and malformed files") {
    EmbeddingIndex index("0123456789abcdef", 3);
    index.add({"src/a", vec({0.5, -1.25, 3.0}), ir::Origin::source, "c"});
    index.add({"bin/b", vec({1e-3, 2.0, -7.5}), ir::Origin::binary, "c++"});
    const auto bytes = index.serialize();
    CHECK(bytes.starts_with("irmatch-idx v1\nfingerprint=0123456789abcdef\ndim=3\ncount=2\n"));
    const auto back = EmbeddingIndex::parse(bytes);
    CHECK(back.fingerprint() == index.fingerprint());
    CHECK(back.dim() == 3);
    REQUIRE(back.size() == 2);
    CHECK(back.entries()[1].doc_id == "bin/b");
    CHECK(back.entries()[1].origin == ir::Origin::binary);
    CHECK(back.entries()[1].language_tag == "c++");
    CHECK(back.entries()[0].embedding(1) == -1.25);
    CHECK(back.entries()[1].embedding(0) == doctest::Approx(1e-3).epsilon(1e-7));
    CHECK(back.serialize() == bytes);

    CHECK_THROWS_AS(EmbeddingIndex::parse("irmatch-idx v2\n"), FormatError);
    CHECK_THROWS_AS(EmbeddingIndex::parse(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(EmbeddingIndex::parse(bytes + "x"), FormatError);
    CHECK_THROWS_AS(EmbeddingIndex::parse("irmatch-idx v1\ndim=3\n"), FormatError);
}

TEST_CASE("embedding is deterministic and blind to names") {
    const auto a = corpus::prepare_document(kSourceStyle, "a", {});
    const auto b = corpus::prepare_document(kRenamedTwin, "b", {});
    REQUIRE(a.tokens == b.tokens);
    const auto vocab = bpe::train_bpe({a.tokens}, 60, 1);

    auto config = testing::micro_model(1).config;
    config.vocab_size = vocab.size();
    config.max_len = 64;
    const auto model = nn::EncoderModel::init(config, 3);
    const auto ea = embed_document(model, vocab, a.tokens).values;
    const auto eb = embed_document(model, vocab, b.tokens).values;
    CHECK(ea == embed_document(model, vocab, a.tokens).values);
    CHECK(ea == eb);
    CHECK(ea.size() == config.d_model);
    CHECK(match_pair(ea, eb).matched);

    // Long inputs are truncated rather than rejected.
    std::vector<int> many(500, bpe::kNumSpecials);
    CHECK(embed_ids(model, many).values.size() == config.d_model);
}
