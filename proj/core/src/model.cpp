// SPDX-License-Identifier: Apache-2.0
#include "tsd/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tsd {

std::string to_string(Pooling p) {
    return p == Pooling::kMax ? "max" : "average";
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "max") return Pooling::kMax;
    if (s == "average" || s == "avg") return Pooling::kAverage;
    throw ConfigError("unknown pooling kind '" + s + "' (expected max|average)");
}

void TSDConfig::validate() const {
    if (lookback < 1 || horizon < 1 || n_channels < 1 || n_targets < 1)
        throw ConfigError("lookback, horizon and channel counts must be >= 1");
    if (d_model < 2 || d_model % 2 != 0)
        throw ConfigError("d_model must be even (sinusoidal positional table)");
    if (n_heads < 1 || d_model % n_heads != 0)
        throw ConfigError("d_model " + std::to_string(d_model) +
                          " must be divisible by n_heads " + std::to_string(n_heads));
    if (n_blocks < 1)
        throw ConfigError("n_blocks must be >= 1");
    if (lookback < (std::size_t{1} << n_blocks))
        throw ConfigError("lookback " + std::to_string(lookback) +
                          " must be >= 2^n_blocks = " +
                          std::to_string(std::size_t{1} << n_blocks) +
                          "; reduce n_blocks");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("dropout must be in [0,1)");
    if (ffn_dim < 1 || base_channels < 1)
        throw ConfigError("ffn_dim and base_channels must be >= 1");
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical(const TSDConfig& c) {
    std::ostringstream os;
    os << "tau=" << c.lookback << ";H=" << c.horizon << ";N=" << c.n_channels
       << ";targets=" << c.n_targets << ";d=" << c.d_model << ";heads=" << c.n_heads
       << ";blocks=" << c.n_blocks << ";drop=" << c.dropout
       << ";pool=" << to_string(c.pooling) << ";ffn=" << c.ffn_dim
       << ";c1=" << c.base_channels << ";res=" << (c.residual_attention ? 1 : 0);
    return os.str();
}

}  // namespace

std::string TSDConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical(*this))));
    return std::string(buf);
}

std::size_t parameter_count(const TSDConfig& cfg) {
    const std::size_t d = cfg.d_model, f = cfg.ffn_dim, c1 = cfg.base_channels;
    std::size_t n = 0;
    n += d * cfg.n_channels * 3 + d;                       // tokenizer
    n += 4 * (d * d + d);                                  // Q,K,V,O projections
    n += 2 * 2 * d;                                        // two layer norms
    n += f * d + f + d * f + d;                            // feed-forward
    std::size_t in_ch = d;
    for (std::size_t i = 1; i <= cfg.n_blocks; ++i) {      // down path
        const std::size_t out_ch = c1 << (i - 1);
        n += out_ch * in_ch * 3 + out_ch;
        in_ch = out_ch;
    }
    for (std::size_t j = cfg.n_blocks; j >= 1; --j) {      // up path
        const std::size_t out_ch = c1 << (j - 1);
        const std::size_t in_j =
            j == cfg.n_blocks ? (c1 << (j - 1)) : 3 * (c1 << (j - 1));
        n += out_ch * in_j * 3 + out_ch;                   // reducing conv
        n += out_ch * out_ch * 3 + out_ch;                 // transposed conv
    }
    n += 2 * c1;                                           // output norm
    n += cfg.n_targets * cfg.horizon * (c1 * cfg.lookback) +
         cfg.n_targets * cfg.horizon;                      // head
    return n;
}

Tensor positional_encoding(std::size_t length, std::size_t d_model) {
    if (d_model % 2 != 0)
        throw ParameterError("positional_encoding requires even d_model, got " +
                             std::to_string(d_model));
    Tensor pe({d_model, length});
    for (std::size_t i = 0; 2 * i < d_model; ++i) {
        const double div = std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                                 static_cast<double>(d_model));
        for (std::size_t t = 0; t < length; ++t) {
            const double a = static_cast<double>(t) / div;
            pe.at(2 * i, t) = std::sin(a);
            pe.at(2 * i + 1, t) = std::cos(a);
        }
    }
    return pe;
}

std::vector<double> SaliencyMap::channel_mean() const {
    std::vector<double> m(tokens, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < tokens; ++t) m[t] += values[c * tokens + t];
    for (auto& v : m) v /= static_cast<double>(channels);
    return m;
}

TSDModel::TSDModel(TSDConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build(init_seed);
    if (parameter_count() != tsd::parameter_count(cfg_))
        throw UsageError("parameter count drifted from closed form");
}

Tensor TSDModel::param(const std::string& name, Shape shape) {
    Tensor t(std::move(shape), true);
    params_.push_back({name, t});
    return t;
}

namespace {

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.data()) v = rng.uniform(-bound, bound);
}

}  // namespace

void TSDModel::build(std::uint64_t init_seed) {
    Rng rng(init_seed);
    const std::size_t d = cfg_.d_model, f = cfg_.ffn_dim, c1 = cfg_.base_channels;

    tok_w_ = param("tokenizer.w", {d, cfg_.n_channels, 3});
    tok_b_ = param("tokenizer.b", {d});
    init_uniform(tok_w_, cfg_.n_channels * 3, rng);

    wq_ = param("tsa.attn.w_q", {d, d});
    bq_ = param("tsa.attn.b_q", {d});
    wk_ = param("tsa.attn.w_k", {d, d});
    bk_ = param("tsa.attn.b_k", {d});
    wv_ = param("tsa.attn.w_v", {d, d});
    bv_ = param("tsa.attn.b_v", {d});
    wo_ = param("tsa.attn.w_o", {d, d});
    bo_ = param("tsa.attn.b_o", {d});
    for (Tensor* w : {&wq_, &wk_, &wv_, &wo_}) init_uniform(*w, d, rng);

    ln1_g_ = param("tsa.ln1.gain", {d});
    ln1_s_ = param("tsa.ln1.shift", {d});
    ffn_w1_ = param("tsa.ffn.w1", {f, d});
    ffn_b1_ = param("tsa.ffn.b1", {f});
    ffn_w2_ = param("tsa.ffn.w2", {d, f});
    ffn_b2_ = param("tsa.ffn.b2", {d});
    ln2_g_ = param("tsa.ln2.gain", {d});
    ln2_s_ = param("tsa.ln2.shift", {d});
    init_uniform(ffn_w1_, d, rng);
    init_uniform(ffn_w2_, f, rng);
    std::fill(ln1_g_.data().begin(), ln1_g_.data().end(), 1.0);
    std::fill(ln2_g_.data().begin(), ln2_g_.data().end(), 1.0);

    std::size_t in_ch = d;
    for (std::size_t i = 1; i <= cfg_.n_blocks; ++i) {
        const std::size_t out_ch = c1 << (i - 1);
        DownBlock b;
        b.w = param("down." + std::to_string(i) + ".w", {out_ch, in_ch, 3});
        b.b = param("down." + std::to_string(i) + ".b", {out_ch});
        init_uniform(b.w, in_ch * 3, rng);
        down_.push_back(std::move(b));
        in_ch = out_ch;
    }
    // declared in consumption order: up^L first
    up_.resize(cfg_.n_blocks);
    for (std::size_t j = cfg_.n_blocks; j >= 1; --j) {
        const std::size_t out_ch = c1 << (j - 1);
        const std::size_t in_j =
            j == cfg_.n_blocks ? (c1 << (j - 1)) : 3 * (c1 << (j - 1));
        UpBlock b;
        b.w = param("up." + std::to_string(j) + ".w", {out_ch, in_j, 3});
        b.b = param("up." + std::to_string(j) + ".b", {out_ch});
        b.wt = param("up." + std::to_string(j) + ".wt", {out_ch, out_ch, 3});
        b.bt = param("up." + std::to_string(j) + ".bt", {out_ch});
        init_uniform(b.w, in_j * 3, rng);
        init_uniform(b.wt, out_ch * 3, rng);
        up_[j - 1] = std::move(b);
    }

    out_norm_g_ = param("out_norm.gain", {c1});
    out_norm_s_ = param("out_norm.shift", {c1});
    std::fill(out_norm_g_.data().begin(), out_norm_g_.data().end(), 1.0);

    const std::size_t head_out = cfg_.n_targets * cfg_.horizon;
    const std::size_t head_in = c1 * cfg_.lookback;
    head_w_ = param("head.w", {head_out, head_in});
    head_b_ = param("head.b", {head_out});
    init_uniform(head_w_, head_in, rng);

    pe_ = positional_encoding(cfg_.lookback, d);
}

std::size_t TSDModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

void TSDModel::zero_grads() {
    for (auto& p : params_) p.tensor.zero_grad();
}

Tensor TSDModel::tokenize(const Tensor& window) const {
    if (window.ndim() != 2 || window.extent(0) != cfg_.n_channels)
        throw DimensionError("tokenize: window " + shape_str(window.shape()) +
                             " does not match trained channel count " +
                             std::to_string(cfg_.n_channels));
    return conv1d(window, tok_w_, tok_b_, 1, 1);
}

Tensor TSDModel::tsa_block(const Tensor& tokens, bool training, Rng& rng) const {
    const std::size_t d = cfg_.d_model;
    if (tokens.ndim() != 2 || tokens.extent(0) != d)
        throw DimensionError("tsa_block: expected [d_model, |z|], got " +
                             shape_str(tokens.shape()));
    const std::size_t heads = cfg_.n_heads;
    const std::size_t dh = d / heads;

    // Token-major layout inside the block so every trailing-axis op works
    // per token.
    Tensor s = transpose(tokens);  // [|z|, d]
    Tensor q = linear(s, wq_, bq_);
    Tensor k = linear(s, wk_, bk_);
    Tensor v = linear(s, wv_, bv_);

    Tensor heads_out;
    for (std::size_t h = 0; h < heads; ++h) {
        Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
        Tensor scores = scale(matmul(qh, transpose(kh)),
                              1.0 / std::sqrt(static_cast<double>(dh)));
        Tensor oh = matmul(softmax(scores), vh);
        heads_out = h == 0 ? oh : concat_cols(heads_out, oh);
    }
    Tensor attn = linear(heads_out, wo_, bo_);
    if (cfg_.residual_attention) attn = add(s, attn);

    Tensor u = layer_norm(attn, ln1_g_, ln1_s_);
    // FFN: linear -> relu -> dropout -> linear
    Tensor hid = dropout(relu(linear(u, ffn_w1_, ffn_b1_)), cfg_.dropout, training, rng);
    Tensor ffn = linear(hid, ffn_w2_, ffn_b2_);
    if (cfg_.residual_attention) ffn = add(u, ffn);
    Tensor out = layer_norm(ffn, ln2_g_, ln2_s_);
    return transpose(out);  // back to [d, |z|]
}

Tensor TSDModel::conv_down(std::size_t block, const Tensor& h, bool training,
                           Rng& rng) const {
    if (h.extent(1) < 2)
        throw ConfigError("conv_down: length " + std::to_string(h.extent(1)) +
                          " too short at depth " + std::to_string(block) +
                          "; use a smaller n_blocks");
    const DownBlock& b = down_.at(block - 1);
    Tensor x = relu(conv1d(h, b.w, b.b, 1, 1));
    x = cfg_.pooling == Pooling::kMax ? max_pool1d(x, 3, 2, 1)
                                      : avg_pool1d(x, 3, 2, 1);
    return dropout(x, cfg_.dropout, training, rng);
}

Tensor TSDModel::conv_up(std::size_t block, const Tensor& h,
                         std::size_t target_length, bool training, Rng& rng) const {
    const UpBlock& b = up_.at(block - 1);
    Tensor x = relu(conv1d(h, b.w, b.b, 1, 1));
    const std::size_t L = x.extent(1);
    const std::size_t base_len = 2 * L - 1;  // (L-1)*2 - 2*1 + 3
    if (target_length < base_len || target_length > base_len + 1)
        throw UsageError("conv_up: no output_padding reaches target length " +
                         std::to_string(target_length) + " from L=" +
                         std::to_string(L));
    const std::size_t op = target_length - base_len;
    x = conv_transpose1d(x, b.wt, b.bt, 2, 1, op);
    return dropout(x, cfg_.dropout, training, rng);
}

Tensor TSDModel::tsd_stack(const Tensor& tsa_out, bool training, Rng& rng,
                           const BlockObserver& observe) const {
    const std::size_t L = cfg_.n_blocks;
    if (tsa_out.extent(1) < (std::size_t{1} << L))
        throw ConfigError("tsd_stack: |z|=" + std::to_string(tsa_out.extent(1)) +
                          " < 2^" + std::to_string(L) + "; use a smaller n_blocks");
    std::vector<std::size_t> recorded_lengths(L);
    std::vector<Tensor> down_out(L);
    Tensor h = tsa_out;
    for (std::size_t i = 1; i <= L; ++i) {
        recorded_lengths[i - 1] = h.extent(1);
        h = conv_down(i, h, training, rng);
        down_out[i - 1] = h;
        if (observe) observe(i, true, h);
    }
    Tensor u = conv_up(L, down_out[L - 1], recorded_lengths[L - 1], training, rng);
    if (observe) observe(L, false, u);
    for (std::size_t j = L - 1; j >= 1; --j) {
        Tensor merged = concat(down_out[j - 1], u);
        u = conv_up(j, merged, recorded_lengths[j - 1], training, rng);
        if (observe) observe(j, false, u);
    }
    // Final norm over the channel axis of every token.
    return transpose(layer_norm(transpose(u), out_norm_g_, out_norm_s_));
}

Tensor TSDModel::forecast_head(const Tensor& tsd_out) const {
    const std::size_t want = cfg_.base_channels * cfg_.lookback;
    if (tsd_out.numel() != want)
        throw DimensionError("forecast_head: trained for " + std::to_string(want) +
                             " activations, got " + shape_str(tsd_out.shape()));
    Tensor flat = reshape(tsd_out, {want});
    Tensor y = linear(flat, head_w_, head_b_);
    return reshape(y, {cfg_.n_targets, cfg_.horizon});
}

Tensor TSDModel::forward(const Tensor& window, bool training, Rng& rng) const {
    if (window.ndim() != 2 || window.extent(1) != cfg_.lookback)
        throw DimensionError("forward: window " + shape_str(window.shape()) +
                             " does not match lookback " +
                             std::to_string(cfg_.lookback));
    Tensor tokens = add(tokenize(window), pe_);
    Tensor attended = tsa_block(tokens, training, rng);
    Tensor rep = tsd_stack(attended, training, rng);
    return forecast_head(rep);
}

Tensor TSDModel::forward(const Tensor& window) const {
    Rng rng(0);
    return forward(window, false, rng);
}

std::vector<SaliencyMap> TSDModel::extract_saliency(const Tensor& window) const {
    std::vector<SaliencyMap> maps;
    auto observe = [&maps](std::size_t level, bool down_path, const Tensor& act) {
        SaliencyMap m;
        m.level = level;
        m.down_path = down_path;
        m.channels = act.extent(0);
        m.tokens = act.extent(1);
        m.token_stride = down_path ? (std::size_t{1} << level)
                                   : (std::size_t{1} << (level - 1));
        m.values.resize(act.numel());
        for (std::size_t i = 0; i < act.numel(); ++i)
            m.values[i] = std::abs(act.data()[i]);
        maps.push_back(std::move(m));
    };
    Rng rng(0);
    Tensor tokens = add(tokenize(window), pe_);
    Tensor attended = tsa_block(tokens, false, rng);
    (void)tsd_stack(attended, false, rng, observe);
    return maps;
}

// ---------------------------------------------------------------------------
// Checkpoint container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'T', 'S', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw SchemaError("checkpoint truncated");
    return v;
}

}  // namespace

void TSDModel::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    for (std::size_t v : {cfg_.lookback, cfg_.horizon, cfg_.n_channels,
                          cfg_.n_targets, cfg_.d_model, cfg_.n_heads, cfg_.n_blocks,
                          cfg_.ffn_dim, cfg_.base_channels})
        write_pod(os, static_cast<std::uint64_t>(v));
    write_pod(os, cfg_.dropout);
    write_pod(os, static_cast<std::uint8_t>(cfg_.pooling == Pooling::kMax ? 0 : 1));
    write_pod(os, static_cast<std::uint8_t>(cfg_.residual_attention ? 1 : 0));
    write_pod(os, static_cast<std::uint64_t>(params_.size()));
    for (const auto& p : params_) {
        write_pod(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_pod(os, static_cast<std::uint64_t>(p.tensor.numel()));
        os.write(reinterpret_cast<const char*>(p.tensor.data().data()),
                 static_cast<std::streamsize>(p.tensor.numel() * sizeof(double)));
    }
    if (!os) throw SchemaError("failed writing checkpoint: " + path);
}

TSDModel TSDModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw SchemaError("bad checkpoint magic in " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion)
        throw SchemaError("unsupported checkpoint version " + std::to_string(version));
    TSDConfig cfg;
    cfg.lookback = read_pod<std::uint64_t>(is);
    cfg.horizon = read_pod<std::uint64_t>(is);
    cfg.n_channels = read_pod<std::uint64_t>(is);
    cfg.n_targets = read_pod<std::uint64_t>(is);
    cfg.d_model = read_pod<std::uint64_t>(is);
    cfg.n_heads = read_pod<std::uint64_t>(is);
    cfg.n_blocks = read_pod<std::uint64_t>(is);
    cfg.ffn_dim = read_pod<std::uint64_t>(is);
    cfg.base_channels = read_pod<std::uint64_t>(is);
    cfg.dropout = read_pod<double>(is);
    cfg.pooling = read_pod<std::uint8_t>(is) == 0 ? Pooling::kMax : Pooling::kAverage;
    cfg.residual_attention = read_pod<std::uint8_t>(is) != 0;
    cfg.validate();

    TSDModel model(cfg);
    const auto n_params = read_pod<std::uint64_t>(is);
    if (n_params != model.params_.size())
        throw SchemaError("checkpoint has " + std::to_string(n_params) +
                          " parameter blobs, config implies " +
                          std::to_string(model.params_.size()));
    std::size_t total = 0;
    for (auto& p : model.params_) {
        const auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto numel = read_pod<std::uint64_t>(is);
        if (!is || name != p.name || numel != p.tensor.numel())
            throw SchemaError("checkpoint blob '" + name + "' does not match '" +
                              p.name + "' [" + std::to_string(p.tensor.numel()) + "]");
        is.read(reinterpret_cast<char*>(p.tensor.data().data()),
                static_cast<std::streamsize>(numel * sizeof(double)));
        if (!is) throw SchemaError("checkpoint truncated in blob " + name);
        total += numel;
    }
    if (total != tsd::parameter_count(cfg))
        throw SchemaError("checkpoint parameter count mismatch");
    return model;
}

void TSDModel::copy_parameters_from(const TSDModel& other) {
    if (!(cfg_ == other.cfg_))
        throw UsageError("copy_parameters_from: configs differ");
    for (std::size_t i = 0; i < params_.size(); ++i)
        params_[i].tensor.data() = other.params_[i].tensor.data();
}

}  // namespace tsd
