#include "irmatch/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "irmatch/error.hpp"
#include "irmatch/keyvalue.hpp"

namespace irmatch::nn {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix row_param(int n, double value) { return Matrix::Constant(1, n, value); }

Matrix gaussian(int rows, int cols, double std, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std * rng.normal();
    return m;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LayerNormCache& cache) {
    const auto n = x.rows();
    const auto d = static_cast<double>(x.cols());
    cache.normalized.resize(n, x.cols());
    cache.inv_std.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = x.row(i).sum() / d;
        const auto centered = x.row(i).array() - mean;
        const double var = centered.square().sum() / d;
        const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
        cache.inv_std(i) = inv_std;
        cache.normalized.row(i) = centered * inv_std;
    }
    Matrix y = cache.normalized.array().rowwise() * gain.row(0).array();
    y.rowwise() += bias.row(0);
    return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const LayerNormCache& cache,
                           Matrix& d_gain, Matrix& d_bias) {
    d_gain += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
    d_bias += dy.colwise().sum();
    const Matrix d_norm = dy.array().rowwise() * gain.row(0).array();
    const auto d = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double mean_d = d_norm.row(i).sum() / d;
        const double mean_dx = d_norm.row(i).dot(cache.normalized.row(i)) / d;
        dx.row(i) = cache.inv_std(i) *
                    (d_norm.row(i).array() - mean_d - cache.normalized.row(i).array() * mean_dx);
    }
    return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

Matrix dropout_keep(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    Matrix keep(rows, cols);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < keep.size(); ++i) keep.data()[i] = rng.uniform() < rate ? 0.0 : scale;
    return keep;
}

/// Softmax with -inf on masked keys; rows without visible keys become zero.
Matrix masked_softmax(Matrix logits, std::span<const std::uint8_t> key_mask) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (!key_mask.empty()) {
        for (Eigen::Index j = 0; j < logits.cols(); ++j) {
            if (!key_mask[static_cast<std::size_t>(j)]) logits.col(j).setConstant(kNegInf);
        }
    }
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double max = logits.row(i).maxCoeff();
        if (max == kNegInf) {
            logits.row(i).setZero();
            continue;
        }
        logits.row(i) = (logits.row(i).array() - max).exp();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

void add_bias(Matrix& m, const Matrix& bias) { m.rowwise() += bias.row(0); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("checkpoint truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

constexpr std::string_view kCheckpointMagic = "irmatch-ckpt v1\n";

}  // namespace

std::string_view to_string(Pooling pooling) { return pooling == Pooling::cls ? "cls" : "mean"; }

Pooling parse_pooling(std::string_view text) {
    if (text == "cls") return Pooling::cls;
    if (text == "mean") return Pooling::mean;
    throw FormatError("unknown pooling '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || n_layers <= 0 || ffn_dim <= 0 || max_len <= 0 || vocab_size <= 0) {
        throw Error("model dimensions must be positive");
    }
    if (d_model % n_heads != 0) throw Error("d_model must be divisible by n_heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    if (!(init_std >= 0.0)) throw Error("init_std must be non-negative");
}

bool ModelConfig::apply(std::string_view key, std::string_view value) {
    auto as_int = [&] { return static_cast<int>(parse_int_value(key, value)); };
    if (key == "d_model") d_model = as_int();
    else if (key == "n_heads") n_heads = as_int();
    else if (key == "n_layers") n_layers = as_int();
    else if (key == "ffn_dim") ffn_dim = as_int();
    else if (key == "max_len") max_len = as_int();
    else if (key == "vocab_size") vocab_size = as_int();
    else if (key == "dropout") dropout = parse_real_value(key, value);
    else if (key == "init_std") init_std = parse_real_value(key, value);
    else if (key == "pooling") pooling = parse_pooling(value);
    else return false;
    return true;
}

std::string ModelConfig::serialize() const {
    char buf[64];
    auto real = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    return "d_model=" + std::to_string(d_model) + "\nn_heads=" + std::to_string(n_heads) +
           "\nn_layers=" + std::to_string(n_layers) + "\nffn_dim=" + std::to_string(ffn_dim) +
           "\nmax_len=" + std::to_string(max_len) + "\ndropout=" + real(dropout) +
           "\nvocab_size=" + std::to_string(vocab_size) + "\npooling=" + std::string(to_string(pooling)) +
           "\ninit_std=" + real(init_std) + "\n";
}

ModelConfig ModelConfig::parse(std::string_view text) {
    ModelConfig config;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (!config.apply(key, value)) throw FormatError("unknown model config key '" + key + "'");
    }
    return config;
}

Parameters Parameters::zeros(const ModelConfig& c) {
    Parameters p;
    p.token_embedding = Matrix::Zero(c.vocab_size, c.d_model);
    p.position_embedding = Matrix::Zero(c.max_len, c.d_model);
    p.layers.resize(static_cast<std::size_t>(c.n_layers));
    for (auto& l : p.layers) {
        l.ln1_gain = l.ln2_gain = row_param(c.d_model, 0.0);
        l.ln1_bias = l.ln2_bias = row_param(c.d_model, 0.0);
        l.wq = l.wk = l.wv = l.wo = Matrix::Zero(c.d_model, c.d_model);
        l.bq = l.bk = l.bv = l.bo = row_param(c.d_model, 0.0);
        l.w1 = Matrix::Zero(c.d_model, c.ffn_dim);
        l.b1 = row_param(c.ffn_dim, 0.0);
        l.w2 = Matrix::Zero(c.ffn_dim, c.d_model);
        l.b2 = row_param(c.d_model, 0.0);
    }
    p.final_gain = row_param(c.d_model, 0.0);
    p.final_bias = row_param(c.d_model, 0.0);
    p.mlm_bias = row_param(c.vocab_size, 0.0);
    return p;
}

std::vector<std::pair<std::string, const Matrix*>> Parameters::tensors() const {
    std::vector<std::pair<std::string, const Matrix*>> out = {
        {"token_embedding", &token_embedding},
        {"position_embedding", &position_embedding},
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const std::string p = "layer" + std::to_string(i) + ".";
        for (const auto& [name, m] : std::initializer_list<std::pair<const char*, const Matrix*>>{
                 {"ln1.gain", &l.ln1_gain}, {"ln1.bias", &l.ln1_bias}, {"attn.wq", &l.wq},
                 {"attn.bq", &l.bq},        {"attn.wk", &l.wk},        {"attn.bk", &l.bk},
                 {"attn.wv", &l.wv},        {"attn.bv", &l.bv},        {"attn.wo", &l.wo},
                 {"attn.bo", &l.bo},        {"ln2.gain", &l.ln2_gain}, {"ln2.bias", &l.ln2_bias},
                 {"ffn.w1", &l.w1},         {"ffn.b1", &l.b1},         {"ffn.w2", &l.w2},
                 {"ffn.b2", &l.b2}}) {
            out.emplace_back(p + name, m);
        }
    }
    out.emplace_back("final_norm.gain", &final_gain);
    out.emplace_back("final_norm.bias", &final_bias);
    out.emplace_back("mlm.bias", &mlm_bias);
    return out;
}

std::vector<std::pair<std::string, Matrix*>> Parameters::tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    for (const auto& [name, m] : std::as_const(*this).tensors()) out.emplace_back(name, const_cast<Matrix*>(m));
    return out;
}

void Parameters::set_zero() {
    for (auto& [name, m] : tensors()) m->setZero();
}

Parameters& Parameters::operator+=(const Parameters& other) {
    auto mine = tensors();
    const auto theirs = other.tensors();
    for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += *theirs[i].second;
    return *this;
}

Parameters& Parameters::operator*=(double factor) {
    for (auto& [name, m] : tensors()) *m *= factor;
    return *this;
}

double Parameters::squared_norm() const {
    double s = 0.0;
    for (const auto& [name, m] : tensors()) s += m->squaredNorm();
    return s;
}

bool Parameters::all_finite() const {
    for (const auto& [name, m] : tensors()) {
        if (!m->allFinite()) return false;
    }
    return true;
}

std::size_t Parameters::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : tensors()) n += static_cast<std::size_t>(m->size());
    return n;
}

EncoderModel EncoderModel::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    EncoderModel model{config, Parameters::zeros(config)};
    auto& p = model.params;
    const double s = config.init_std;
    p.token_embedding = gaussian(config.vocab_size, config.d_model, s, rng);
    p.position_embedding = gaussian(config.max_len, config.d_model, s, rng);
    for (auto& l : p.layers) {
        l.ln1_gain.setOnes();
        l.ln2_gain.setOnes();
        l.wq = gaussian(config.d_model, config.d_model, s, rng);
        l.wk = gaussian(config.d_model, config.d_model, s, rng);
        l.wv = gaussian(config.d_model, config.d_model, s, rng);
        l.wo = gaussian(config.d_model, config.d_model, s, rng);
        l.w1 = gaussian(config.d_model, config.ffn_dim, s, rng);
        l.w2 = gaussian(config.ffn_dim, config.d_model, s, rng);
    }
    p.final_gain.setOnes();
    return model;
}

Matrix softmax_rows(const Matrix& logits) { return masked_softmax(logits, {}); }

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale,
                 std::span<const std::uint8_t> key_mask) {
    if (q.cols() != k.cols()) throw ShapeMismatch("query and key widths differ");
    if (k.rows() != v.rows()) throw ShapeMismatch("key and value row counts differ");
    if (!key_mask.empty() && key_mask.size() != static_cast<std::size_t>(k.rows())) {
        throw ShapeMismatch("key mask length differs from key count");
    }
    const Matrix probs = masked_softmax((q * k.transpose()) * scale, key_mask);
    return probs * v;
}

Matrix forward(const EncoderModel& model, std::span<const int> ids, std::span<const std::uint8_t> mask,
               bool train_mode, Rng* rng, ForwardCache* cache) {
    const auto& cfg = model.config;
    const auto& p = model.params;
    const auto n = static_cast<Eigen::Index>(ids.size());
    if (mask.size() != ids.size()) throw ShapeMismatch("attention mask length differs from input length");
    if (n == 0) throw EmptySequence("cannot encode an empty sequence");
    if (n > cfg.max_len) {
        throw LengthExceeded("sequence of " + std::to_string(n) + " exceeds max_len " + std::to_string(cfg.max_len));
    }
    for (int id : ids) {
        if (id < 0 || id >= cfg.vocab_size) throw IdOutOfRange("token id " + std::to_string(id) + " out of range");
    }
    const bool drop = train_mode && cfg.dropout > 0.0;
    if (drop && rng == nullptr) throw Error("training-mode forward needs a random generator");

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.ids.assign(ids.begin(), ids.end());
    c.mask.assign(mask.begin(), mask.end());
    c.layers.resize(p.layers.size());

    Matrix x(n, cfg.d_model);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = p.token_embedding.row(ids[static_cast<std::size_t>(i)]) + p.position_embedding.row(i);
    }

    const int dh = cfg.d_model / cfg.n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& lp = p.layers[l];
        auto& lc = c.layers[l];
        lc.input = x;
        lc.normed1 = layer_norm(x, lp.ln1_gain, lp.ln1_bias, lc.ln1);
        lc.q = lc.normed1 * lp.wq;
        add_bias(lc.q, lp.bq);
        lc.k = lc.normed1 * lp.wk;
        add_bias(lc.k, lp.bk);
        lc.v = lc.normed1 * lp.wv;
        add_bias(lc.v, lp.bv);

        lc.context.resize(n, cfg.d_model);
        lc.heads.resize(static_cast<std::size_t>(cfg.n_heads));
        for (int h = 0; h < cfg.n_heads; ++h) {
            auto& hc = lc.heads[static_cast<std::size_t>(h)];
            const auto qh = lc.q.middleCols(h * dh, dh);
            const auto kh = lc.k.middleCols(h * dh, dh);
            const auto vh = lc.v.middleCols(h * dh, dh);
            hc.probs = masked_softmax((qh * kh.transpose()) * scale, mask);
            if (drop) {
                hc.keep = dropout_keep(n, n, cfg.dropout, *rng);
                lc.context.middleCols(h * dh, dh) = hc.probs.cwiseProduct(hc.keep) * vh;
            } else {
                hc.keep.resize(0, 0);
                lc.context.middleCols(h * dh, dh) = hc.probs * vh;
            }
        }
        Matrix attn_out = lc.context * lp.wo;
        add_bias(attn_out, lp.bo);
        x += attn_out;
        lc.mid = x;

        lc.normed2 = layer_norm(x, lp.ln2_gain, lp.ln2_bias, lc.ln2);
        lc.pre_act = lc.normed2 * lp.w1;
        add_bias(lc.pre_act, lp.b1);
        lc.act = lc.pre_act.unaryExpr([](double v) { return gelu(v); });
        Matrix ffn_out;
        if (drop) {
            lc.act_keep = dropout_keep(n, cfg.ffn_dim, cfg.dropout, *rng);
            ffn_out = lc.act.cwiseProduct(lc.act_keep) * lp.w2;
        } else {
            lc.act_keep.resize(0, 0);
            ffn_out = lc.act * lp.w2;
        }
        add_bias(ffn_out, lp.b2);
        x += ffn_out;
    }
    c.pre_final = x;
    c.hidden = layer_norm(x, p.final_gain, p.final_bias, c.final_norm);
    return c.hidden;
}

Matrix encode(const EncoderModel& model, const bpe::TokenSequence& input, bool train_mode, Rng* rng) {
    return forward(model, input.ids, input.attention_mask, train_mode, rng);
}

void backward(const EncoderModel& model, const ForwardCache& c, const Matrix& d_hidden, Parameters& g) {
    const auto& cfg = model.config;
    const auto& p = model.params;
    if (d_hidden.rows() != c.hidden.rows() || d_hidden.cols() != c.hidden.cols()) {
        throw ShapeMismatch("hidden-state gradient has the wrong shape");
    }
    const int dh = cfg.d_model / cfg.n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));

    Matrix dx = layer_norm_backward(d_hidden, p.final_gain, c.final_norm, g.final_gain, g.final_bias);
    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const auto& lp = p.layers[li];
        const auto& lc = c.layers[li];
        auto& lg = g.layers[li];

        // Feed-forward branch.
        const bool ffn_drop = lc.act_keep.size() > 0;
        const Matrix act_used = ffn_drop ? Matrix(lc.act.cwiseProduct(lc.act_keep)) : lc.act;
        lg.w2.noalias() += act_used.transpose() * dx;
        lg.b2 += dx.colwise().sum();
        Matrix d_act = dx * lp.w2.transpose();
        if (ffn_drop) d_act = d_act.cwiseProduct(lc.act_keep);
        const Matrix d_pre = d_act.cwiseProduct(lc.pre_act.unaryExpr([](double v) { return gelu_grad(v); }));
        lg.w1.noalias() += lc.normed2.transpose() * d_pre;
        lg.b1 += d_pre.colwise().sum();
        const Matrix d_normed2 = d_pre * lp.w1.transpose();
        const Matrix d_mid = dx + layer_norm_backward(d_normed2, lp.ln2_gain, lc.ln2, lg.ln2_gain, lg.ln2_bias);

        // Attention branch.
        lg.wo.noalias() += lc.context.transpose() * d_mid;
        lg.bo += d_mid.colwise().sum();
        const Matrix d_context = d_mid * lp.wo.transpose();
        Matrix dq = Matrix::Zero(lc.q.rows(), lc.q.cols());
        Matrix dk = Matrix::Zero(lc.k.rows(), lc.k.cols());
        Matrix dv = Matrix::Zero(lc.v.rows(), lc.v.cols());
        for (int h = 0; h < cfg.n_heads; ++h) {
            const auto& hc = lc.heads[static_cast<std::size_t>(h)];
            const bool attn_drop = hc.keep.size() > 0;
            const auto d_out = d_context.middleCols(h * dh, dh);
            const Matrix used = attn_drop ? Matrix(hc.probs.cwiseProduct(hc.keep)) : hc.probs;
            dv.middleCols(h * dh, dh) = used.transpose() * d_out;
            Matrix d_probs = d_out * lc.v.middleCols(h * dh, dh).transpose();
            if (attn_drop) d_probs = d_probs.cwiseProduct(hc.keep);
            const Vector row_dot = d_probs.cwiseProduct(hc.probs).rowwise().sum();
            const Matrix d_logits =
                hc.probs.cwiseProduct(d_probs - row_dot.replicate(1, d_probs.cols())) * scale;
            dq.middleCols(h * dh, dh) = d_logits * lc.k.middleCols(h * dh, dh);
            dk.middleCols(h * dh, dh) = d_logits.transpose() * lc.q.middleCols(h * dh, dh);
        }
        lg.wq.noalias() += lc.normed1.transpose() * dq;
        lg.bq += dq.colwise().sum();
        lg.wk.noalias() += lc.normed1.transpose() * dk;
        lg.bk += dk.colwise().sum();
        lg.wv.noalias() += lc.normed1.transpose() * dv;
        lg.bv += dv.colwise().sum();
        const Matrix d_normed1 = dq * lp.wq.transpose() + dk * lp.wk.transpose() + dv * lp.wv.transpose();
        dx = d_mid + layer_norm_backward(d_normed1, lp.ln1_gain, lc.ln1, lg.ln1_gain, lg.ln1_bias);
    }
    for (Eigen::Index i = 0; i < dx.rows(); ++i) {
        g.token_embedding.row(c.ids[static_cast<std::size_t>(i)]) += dx.row(i);
        g.position_embedding.row(i) += dx.row(i);
    }
}

Embedding pool(const Matrix& hidden, std::span<const std::uint8_t> mask, Pooling strategy) {
    if (hidden.rows() == 0) throw EmptySequence("cannot pool an empty sequence");
    if (strategy == Pooling::cls) return {hidden.row(0).transpose()};
    Vector sum = Vector::Zero(hidden.cols());
    double count = 0.0;
    for (Eigen::Index i = 0; i < hidden.rows(); ++i) {
        if (mask.empty() || mask[static_cast<std::size_t>(i)]) {
            sum += hidden.row(i).transpose();
            count += 1.0;
        }
    }
    if (count == 0.0) throw EmptySequence("mask selects no rows to pool");
    return {sum / count};
}

Matrix pool_backward(const Vector& d_embedding, std::size_t rows, std::span<const std::uint8_t> mask,
                     Pooling strategy) {
    Matrix d = Matrix::Zero(static_cast<Eigen::Index>(rows), d_embedding.size());
    if (strategy == Pooling::cls) {
        d.row(0) = d_embedding.transpose();
        return d;
    }
    double count = 0.0;
    for (std::size_t i = 0; i < rows; ++i) count += (mask.empty() || mask[i]) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (mask.empty() || mask[i]) d.row(static_cast<Eigen::Index>(i)) = d_embedding.transpose() / count;
    }
    return d;
}

std::string serialize_checkpoint(const EncoderModel& model, const EncoderModel* binary_tower) {
    if (binary_tower && !(binary_tower->config == model.config)) {
        throw Error("both towers must share one configuration");
    }
    std::string out(kCheckpointMagic);
    const std::string config = model.config.serialize() + "towers=" + (binary_tower ? "2" : "1") + "\n";
    put_u32(out, static_cast<std::uint32_t>(config.size()));
    out += config;

    std::vector<std::pair<std::string, const Matrix*>> tensors;
    for (const auto& [name, m] : model.params.tensors()) tensors.emplace_back(name, m);
    if (binary_tower) {
        for (const auto& [name, m] : binary_tower->params.tensors()) tensors.emplace_back("binary/" + name, m);
    }
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(m->rows()));
        put_u32(out, static_cast<std::uint32_t>(m->cols()));
        for (Eigen::Index i = 0; i < m->size(); ++i) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m->data()[i])));
        }
    }
    return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) throw FormatError("not an irmatch-ckpt v1 file");
    const auto config_text = in.take(in.u32());
    ModelConfig config;
    int towers = 1;
    for (const auto& [key, value] : parse_key_values(config_text)) {
        if (key == "towers") {
            towers = static_cast<int>(parse_int_value(key, value));
        } else if (!config.apply(key, value)) {
            throw FormatError("unknown checkpoint config key '" + key + "'");
        }
    }
    config.validate();
    if (towers != 1 && towers != 2) throw FormatError("checkpoint must hold one or two towers");

    Checkpoint ckpt{{config, Parameters::zeros(config)}, std::nullopt};
    if (towers == 2) ckpt.binary_tower = EncoderModel{config, Parameters::zeros(config)};
    std::vector<std::pair<std::string, Matrix*>> expected;
    for (auto& [name, m] : ckpt.model.params.tensors()) expected.emplace_back(name, m);
    if (ckpt.binary_tower) {
        for (auto& [name, m] : ckpt.binary_tower->params.tensors()) expected.emplace_back("binary/" + name, m);
    }
    if (in.u32() != expected.size()) throw FormatError("checkpoint tensor count does not match its config");
    for (auto& [name, m] : expected) {
        const auto got = in.take(in.u32());
        if (got != name) throw FormatError("expected tensor '" + name + "', found '" + std::string(got) + "'");
        const auto rows = in.u32();
        const auto cols = in.u32();
        if (rows != m->rows() || cols != m->cols()) throw FormatError("tensor '" + name + "' has the wrong shape");
        for (Eigen::Index i = 0; i < m->size(); ++i) {
            m->data()[i] = static_cast<double>(std::bit_cast<float>(in.u32()));
        }
    }
    if (!in.done()) throw FormatError("trailing bytes after the last tensor");
    return ckpt;
}

std::string fingerprint(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace irmatch::nn
