#pragma once

// Pre-norm Transformer encoder with hand-written backward passes.
//
// Each block computes
//   x = x + Attn(LN1(x)),   x = x + FFN(LN2(x))
// and a final layer norm produces the hidden states. Attention logits are
// scaled by 1/sqrt(d_model). Dropout acts on attention weights and FFN
// activations only, and only in training mode.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "irmatch/bpe.hpp"
#include "irmatch/random.hpp"

namespace irmatch::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Pooling { cls, mean };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view text);

struct ModelConfig {
    int d_model = 256;
    int n_heads = 4;
    int n_layers = 4;
    int ffn_dim = 1024;
    int max_len = 512;
    double dropout = 0.4;
    int vocab_size = 0;
    Pooling pooling = Pooling::cls;
    double init_std = 0.02;

    /// Throws irmatch::Error on non-positive dims or d_model % n_heads != 0.
    void validate() const;

    /// Applies one `key = value` setting; returns false for keys it does not own.
    bool apply(std::string_view key, std::string_view value);
    std::string serialize() const;
    static ModelConfig parse(std::string_view text);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerParams {
    Matrix ln1_gain, ln1_bias;
    Matrix wq, bq, wk, bk, wv, bv, wo, bo;
    Matrix ln2_gain, ln2_bias;
    Matrix w1, b1, w2, b2;
};

/// Every trainable tensor. Biases and gains are 1 x n matrices. The same
/// layout doubles as a gradient set and as optimizer state.
struct Parameters {
    Matrix token_embedding;     // vocab_size x d_model, also the tied MLM output projection
    Matrix position_embedding;  // max_len x d_model
    std::vector<LayerParams> layers;
    Matrix final_gain, final_bias;
    Matrix mlm_bias;            // 1 x vocab_size

    static Parameters zeros(const ModelConfig& config);

    /// Named tensors in a fixed order.
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;

    void set_zero();
    Parameters& operator+=(const Parameters& other);
    Parameters& operator*=(double factor);
    double squared_norm() const;
    bool all_finite() const;
    std::size_t scalar_count() const;
};

struct EncoderModel {
    ModelConfig config;
    Parameters params;

    /// Gaussian(0, init_std) weights, zero biases, unit layer-norm gains.
    static EncoderModel init(const ModelConfig& config, std::uint64_t seed);
};

struct Embedding {
    Vector values;
};

/// Row-wise numerically stable softmax.
Matrix softmax_rows(const Matrix& logits);

/// softmax(Q K^T * scale) V. Keys whose mask entry is 0 get -inf logits; a
/// query with no visible key yields a zero row. Throws ShapeMismatch.
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale,
                 std::span<const std::uint8_t> key_mask = {});

struct LayerNormCache {
    Matrix normalized;
    Vector inv_std;
};

struct HeadCache {
    Matrix probs;
    Matrix keep;  // dropout keep mask already divided by (1 - p); empty when inactive
};

struct LayerCache {
    Matrix input;
    LayerNormCache ln1;
    Matrix normed1, q, k, v;
    std::vector<HeadCache> heads;
    Matrix context;
    Matrix mid;
    LayerNormCache ln2;
    Matrix normed2, pre_act, act;
    Matrix act_keep;
};

/// Everything the backward pass needs from one forward pass.
struct ForwardCache {
    std::vector<int> ids;
    std::vector<std::uint8_t> mask;
    std::vector<LayerCache> layers;
    Matrix pre_final;
    LayerNormCache final_norm;
    Matrix hidden;
};

/// Runs the encoder and returns the final hidden states (n x d_model).
/// `rng` drives dropout and is required when `train_mode` is set.
/// Throws IdOutOfRange, LengthExceeded, ShapeMismatch.
Matrix forward(const EncoderModel& model, std::span<const int> ids, std::span<const std::uint8_t> mask,
               bool train_mode, Rng* rng, ForwardCache* cache = nullptr);

Matrix encode(const EncoderModel& model, const bpe::TokenSequence& input, bool train_mode,
              Rng* rng = nullptr);

/// Accumulates parameter gradients given dLoss/dHidden.
void backward(const EncoderModel& model, const ForwardCache& cache, const Matrix& d_hidden,
              Parameters& grads);

/// `cls` takes row 0; `mean` averages rows whose mask is 1. Throws EmptySequence.
Embedding pool(const Matrix& hidden, std::span<const std::uint8_t> mask, Pooling strategy);

/// Gradient of pool() with respect to the hidden states.
Matrix pool_backward(const Vector& d_embedding, std::size_t rows, std::span<const std::uint8_t> mask,
                     Pooling strategy);

/// Binary checkpoint container `irmatch-ckpt v1`; see docs/checkpoint-format.md.
std::string serialize_checkpoint(const EncoderModel& model, const EncoderModel* binary_tower = nullptr);

struct Checkpoint {
    EncoderModel model;
    std::optional<EncoderModel> binary_tower;
};

Checkpoint parse_checkpoint(std::string_view bytes);

/// FNV-1a 64 of the bytes, as 16 hex digits.
std::string fingerprint(std::string_view bytes);

}  // namespace irmatch::nn
