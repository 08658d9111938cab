#include <doctest.h>

#include <cmath>

#include "grad_check.hpp"
#include "irmatch/encoder.hpp"
#include "irmatch/error.hpp"

using namespace irmatch;
using namespace irmatch::nn;
using irmatch::testing::micro_model;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::vector<std::uint8_t> ones(std::size_t n) { return std::vector<std::uint8_t>(n, 1); }

}  // namespace

TEST_CASE("softmax rows sum to one") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix logits(4, 7);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 200.0 * (rng.uniform() - 0.5);
        const Matrix p = softmax_rows(logits);
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-6);
            CHECK(p.row(r).minCoeff() >= 0.0);
        }
    }
    const Matrix big = softmax_rows(mat({{1000.0, 1000.0}}));
    CHECK(big(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("attention with a single key returns that value row") {
    const Matrix v = mat({{0.25, -3.0, 7.5}});
    const Matrix out = attention(mat({{4.0, -1.0}}), mat({{0.3, 9.0}}), v, 1.0 / std::sqrt(2.0));
    CHECK(out == v);
}

TEST_CASE("orthogonal query over equal-norm keys averages the values") {
    const Matrix out = attention(mat({{0.0, 1.0}}), mat({{1.0, 0.0}, {-1.0, 0.0}}), mat({{1.0, 2.0}, {3.0, 4.0}}),
                                 0.5);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(0, 1) == 3.0);
}

TEST_CASE("2x2 attention matches hand arithmetic") {
    const double s = 1.0 / std::sqrt(2.0);
    const Matrix q = mat({{1.0, 0.0}, {0.0, 1.0}});
    const Matrix k = mat({{1.0, 2.0}, {0.0, -1.0}});
    const Matrix v = mat({{1.0, 0.0}, {0.0, 2.0}});
    const Matrix out = attention(q, k, v, s);
    // Row 0 logits: (1, 0) * s.  Row 1 logits: (2, -1) * s.
    const double a0 = std::exp(1.0 * s), b0 = std::exp(0.0);
    const double a1 = std::exp(2.0 * s), b1 = std::exp(-1.0 * s);
    CHECK(std::abs(out(0, 0) - a0 / (a0 + b0)) < 1e-6);
    CHECK(std::abs(out(0, 1) - 2.0 * b0 / (a0 + b0)) < 1e-6);
    CHECK(std::abs(out(1, 0) - a1 / (a1 + b1)) < 1e-6);
    CHECK(std::abs(out(1, 1) - 2.0 * b1 / (a1 + b1)) < 1e-6);
}

TEST_CASE("masked keys receive no weight") {
    const std::vector<std::uint8_t> mask = {1, 0};
    const Matrix out = attention(mat({{1.0, 1.0}}), mat({{1.0, 0.0}, {5.0, 5.0}}), mat({{1.0, 2.0}, {9.0, 9.0}}),
                                 1.0, mask);
    CHECK(out == mat({{1.0, 2.0}}));
    CHECK_THROWS_AS(attention(mat({{1.0}}), mat({{1.0, 0.0}}), mat({{1.0}}), 1.0), ShapeMismatch);
    CHECK_THROWS_AS(attention(mat({{1.0}}), mat({{1.0}}), mat({{1.0}, {2.0}}), 1.0), ShapeMismatch);
}

TEST_CASE("attention output is a convex combination of value rows") {
    Rng rng(2);
    Matrix q(5, 4), k(6, 4), v(6, 3);
    for (Matrix* m : {&q, &k, &v}) {
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.normal();
    }
    const Matrix out = attention(q, k, v, 0.5);
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        CHECK(out.col(c).maxCoeff() <= v.col(c).maxCoeff() + 1e-12);
        CHECK(out.col(c).minCoeff() >= v.col(c).minCoeff() - 1e-12);
    }
}

TEST_CASE("config validation and round-trip") {
    ModelConfig c;
    c.vocab_size = 100;
    CHECK_NOTHROW(c.validate());
    CHECK(c.d_model == 256);
    CHECK(c.dropout == 0.4);
    CHECK(ModelConfig::parse(c.serialize()) == c);
    ModelConfig bad = c;
    bad.n_heads = 3;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.vocab_size = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(ModelConfig::parse("colour = red\n"), FormatError);
}

TEST_CASE("encode shape, determinism and input checks") {
    const auto model = micro_model(3);
    const std::vector<int> ids = {0, 6, 7, 8, 2};
    const Matrix h = forward(model, ids, ones(5), false, nullptr);
    CHECK(h.rows() == 5);
    CHECK(h.cols() == 8);
    CHECK(h.allFinite());
    CHECK(forward(model, ids, ones(5), false, nullptr) == h);

    const std::vector<int> bad = {0, 16};
    CHECK_THROWS_AS(forward(model, bad, ones(2), false, nullptr), IdOutOfRange);
    const std::vector<int> long_ids(13, 6);
    CHECK_THROWS_AS(forward(model, long_ids, ones(13), false, nullptr), LengthExceeded);
    CHECK_THROWS_AS(forward(model, ids, ones(4), false, nullptr), ShapeMismatch);

    Rng a(9), b(9);
    const Matrix t1 = forward(model, ids, ones(5), true, &a);
    const Matrix t2 = forward(model, ids, ones(5), true, &b);
    CHECK(t1 == t2);
    CHECK(t1 != h);
}

TEST_CASE("pad content does not reach non-pad rows") {
    const auto model = micro_model(4);
    const std::vector<std::uint8_t> mask = {1, 1, 1, 1, 0, 0, 0};
    const std::vector<int> x = {0, 6, 7, 2, 4, 4, 4};
    const std::vector<int> y = {0, 6, 7, 2, 9, 15, 3};
    const Matrix hx = forward(model, x, mask, false, nullptr);
    const Matrix hy = forward(model, y, mask, false, nullptr);
    CHECK((hx.topRows(4) - hy.topRows(4)).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix prefix = forward(model, std::span<const int>(x).first(4), std::span(mask).first(4), false, nullptr);
    CHECK((hx.topRows(4) - prefix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pooling") {
    const Matrix one = mat({{1.5, -2.0}});
    CHECK(pool(one, ones(1), Pooling::cls).values == one.row(0).transpose());
    CHECK(pool(one, ones(1), Pooling::mean).values == one.row(0).transpose());
    const Matrix twin = mat({{0.5, 3.0}, {0.5, 3.0}});
    CHECK(pool(twin, ones(2), Pooling::mean).values == twin.row(0).transpose());
    const auto avg = pool(mat({{1.0, 0.0}, {0.0, 1.0}, {8.0, 8.0}}), std::vector<std::uint8_t>{1, 1, 0}, Pooling::mean);
    CHECK(avg.values(0) == 0.5);
    CHECK(avg.values(1) == 0.5);
    CHECK_THROWS_AS(pool(Matrix(0, 2), {}, Pooling::cls), EmptySequence);
}

TEST_CASE("finite differences agree with the MLM gradient") {
    const auto model = micro_model(11);
    const auto batch = testing::micro_mlm_batch(model.config.vocab_size);
    const testing::LossFn loss = [&](const EncoderModel& m, Parameters* g) { return mlm::mlm_loss(m, batch, g); };
    const auto check = testing::finite_difference_check(model, loss, 20, 1e-4, 21);
    CHECK(check.sampled == 20);
    CHECK(check.max_rel_error < 1e-3);
}

TEST_CASE("finite differences agree with the triplet gradient") {
    const auto corpus = testing::micro_paired_corpus();
    const std::vector<triplet::Triplet> batch = {{0, 1, 3}, {2, 3, 1}};
    for (auto pooling : {Pooling::cls, Pooling::mean}) {
        auto model = micro_model(12);
        model.config.pooling = pooling;
        const testing::LossFn loss = [&](const EncoderModel& m, Parameters* g) {
            return triplet::triplet_loss({&m}, corpus, batch, 1.0, {g}).loss;
        };
        const auto check = testing::finite_difference_check(model, loss, 20, 1e-4, 22);
        CHECK(check.sampled == 20);
        CHECK(check.max_rel_error < 1e-3);
    }
}

TEST_CASE("unused position embeddings get zero gradient") {
    const auto model = micro_model(13);
    const auto input = bpe::build_model_input(std::vector<int>{}, std::nullopt, model.config.max_len);
    REQUIRE(input.length == 2);  // [CLS] [EOS] then [PAD] from position 2 on
    ForwardCache cache;
    const Matrix h = forward(model, input.ids, input.attention_mask, false, nullptr, &cache);
    Vector d = Vector::LinSpaced(h.cols(), -1.0, 1.0);
    Parameters grads = Parameters::zeros(model.config);
    backward(model, cache, pool_backward(d, input.ids.size(), input.attention_mask, Pooling::mean), grads);
    CHECK(grads.position_embedding.topRows(2).squaredNorm() > 0.0);
    CHECK(grads.position_embedding.bottomRows(model.config.max_len - 2).squaredNorm() == 0.0);
    CHECK(grads.all_finite());
}

TEST_CASE("zero query and key weights give matching gradients") {
    auto model = micro_model(14);
    for (auto& l : model.params.layers) {
        l.wq.setZero();
        l.wk.setZero();
    }
    const auto batch = testing::micro_mlm_batch(model.config.vocab_size);
    Parameters grads = Parameters::zeros(model.config);
    mlm::mlm_loss(model, batch, &grads);
    for (std::size_t i = 0; i < grads.layers.size(); ++i) {
        CHECK(grads.layers[i].wq == grads.layers[i].wk);
        CHECK(grads.layers[i].bq == grads.layers[i].bk);
        CHECK(grads.layers[i].wv.squaredNorm() > 0.0);
    }
}

TEST_CASE("default configuration embeds into 256 dimensions") {
    ModelConfig c;
    c.vocab_size = 40;
    c.n_layers = 1;
    const auto model = EncoderModel::init(c, 1);
    const std::vector<int> ids = {0, 10, 11, 2};
    const auto e = pool(forward(model, ids, ones(4), false, nullptr), ones(4), c.pooling);
    CHECK(e.values.size() == 256);
    CHECK(e.values.allFinite());
    CHECK(e.values.squaredNorm() > 0.0);
}

TEST_CASE("checkpoint round-trip") {
    const auto model = micro_model(15);
    const auto bytes = serialize_checkpoint(model);
    const auto back = parse_checkpoint(bytes);
    CHECK(back.model.config == model.config);
    CHECK(!back.binary_tower);
    CHECK(serialize_checkpoint(back.model) == bytes);
    const auto f = model.params.tensors();
    const auto g = back.model.params.tensors();
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f[i].first == g[i].first);
        CHECK((*f[i].second - *g[i].second).cwiseAbs().maxCoeff() < 1e-6);
    }

    const auto other = micro_model(16);
    const auto both = parse_checkpoint(serialize_checkpoint(model, &other));
    REQUIRE(both.binary_tower);
    CHECK(serialize_checkpoint(both.model, &*both.binary_tower) == serialize_checkpoint(model, &other));

    CHECK(fingerprint(bytes) == fingerprint(serialize_checkpoint(back.model)));
    CHECK(fingerprint(bytes).size() == 16);
    CHECK(fingerprint("") == "cbf29ce484222325");
    CHECK_THROWS_AS(parse_checkpoint("garbage"), FormatError);
    CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
}
