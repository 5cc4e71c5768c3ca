// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsd/ops.hpp"
#include "tsd/rng.hpp"
#include "tsd/tensor.hpp"

namespace tsd {

enum class Pooling { kMax, kAverage };

std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& s);

// Architecture hyperparameters. `lookback` doubles as the token count: the
// tokenizer is stride-1 with same padding, so |z| == lookback.
struct TSDConfig {
    std::size_t lookback = 96;
    std::size_t horizon = 24;
    std::size_t n_channels = 7;   // model input channels (series + covariates)
    std::size_t n_targets = 7;    // predicted channels (1 in univariate mode)
    std::size_t d_model = 512;
    std::size_t n_heads = 8;
    std::size_t n_blocks = 4;     // down/up block pairs
    double dropout = 0.05;
    Pooling pooling = Pooling::kMax;
    std::size_t ffn_dim = 2048;
    std::size_t base_channels = 64;  // channel width after the first down block
    bool residual_attention = false;

    void validate() const;

    // Stable content hash over all fields, used for report rows and manifests.
    std::string hash() const;

    bool operator==(const TSDConfig&) const = default;
};

// Closed-form trainable-parameter count for a config. The model asserts its
// actual count against this at construction.
//
//   tokenizer    : d*N*3 + d                        (conv k=3, N -> d)
//   attention    : 4*(d*d + d)                      (Q,K,V,output projections)
//   two norms    : 2 * 2d
//   feed-forward : f*d + f + d*f + d
//   down block i : o*c_i*3 + o, o = c1*2^(i-1), c_i = prev width (c_0 = d)
//   up block j   : conv  o_j*i_j*3 + o_j            (i_j = skip-concat width)
//                  convT o_j*o_j*3 + o_j            (o_j = c1*2^(j-1))
//   output norm  : 2*c1
//   head         : (n_targets*H)*(c1*tau) + n_targets*H
std::size_t parameter_count(const TSDConfig& cfg);

// Sinusoidal table, shape [d_model, length]:
//   PE[2i, t] = sin(t / 10000^(2i/d_model)), PE[2i+1, t] = cos(same).
Tensor positional_encoding(std::size_t length, std::size_t d_model);

// Per-block activation-magnitude map. `values` is row-major
// [channels, tokens]; token t covers input steps [t*stride, (t+1)*stride).
struct SaliencyMap {
    std::size_t level = 0;       // block depth, 1-based
    bool down_path = true;
    std::size_t channels = 0;
    std::size_t tokens = 0;
    std::size_t token_stride = 1;
    std::vector<double> values;  // nonnegative, |activation|

    double value(std::size_t c, std::size_t t) const { return values[c * tokens + t]; }
    std::vector<double> channel_mean() const;
};

class TSDModel {
public:
    TSDModel(TSDConfig cfg, std::uint64_t init_seed = 1);

    const TSDConfig& config() const { return cfg_; }

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }
    std::size_t parameter_count() const;
    void zero_grads();

    // Sub-module forwards (exposed for oracle tests).
    Tensor tokenize(const Tensor& window) const;
    Tensor tsa_block(const Tensor& tokens, bool training, Rng& rng) const;
    Tensor conv_down(std::size_t block, const Tensor& h, bool training, Rng& rng) const;
    Tensor conv_up(std::size_t block, const Tensor& h, std::size_t target_length,
                   bool training, Rng& rng) const;
    using BlockObserver =
        std::function<void(std::size_t level, bool down_path, const Tensor&)>;
    Tensor tsd_stack(const Tensor& tsa_out, bool training, Rng& rng,
                     const BlockObserver& observe = {}) const;
    Tensor forecast_head(const Tensor& tsd_out) const;

    // End to end: tokenize -> +PE -> TSA -> TSD stack -> head.
    Tensor forward(const Tensor& window, bool training, Rng& rng) const;
    Tensor forward(const Tensor& window) const;  // eval mode, deterministic

    std::vector<SaliencyMap> extract_saliency(const Tensor& window) const;

    // Checkpoint container: magic "TSD1", version, config record, then
    // parameter blobs in declaration order as little-endian f64.
    void save(const std::string& path) const;
    static TSDModel load(const std::string& path);

    // Deep-copies parameter values from another instance with equal config.
    void copy_parameters_from(const TSDModel& other);

private:
    Tensor param(const std::string& name, Shape shape);
    void build(std::uint64_t init_seed);
    Tensor down_in_len_check(const Tensor& h) const;

    TSDConfig cfg_;
    std::vector<Parameter> params_;
    Tensor pe_;

    // Structured handles into params_ (shared nodes).
    Tensor tok_w_, tok_b_;
    Tensor wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
    Tensor ln1_g_, ln1_s_, ln2_g_, ln2_s_;
    Tensor ffn_w1_, ffn_b1_, ffn_w2_, ffn_b2_;
    struct DownBlock { Tensor w, b; };
    struct UpBlock { Tensor w, b, wt, bt; };
    std::vector<DownBlock> down_;
    std::vector<UpBlock> up_;
    Tensor out_norm_g_, out_norm_s_;
    Tensor head_w_, head_b_;
};

}  // namespace tsd
