// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tsd/rng.hpp"
#include "tsd/tensor.hpp"

namespace tsd {

namespace detail {

template <typename T>
void ensure_parent_grads(typename TensorT<T>::Node& n) {
    for (auto& p : n.parents)
        if (p->requires_grad) p->ensure_grad();
}

inline std::size_t out_len(std::size_t L, std::size_t k, std::size_t stride,
                           std::size_t padding) {
    return (L + 2 * padding - k) / stride + 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and reduction ops
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape() != b.shape())
        throw DimensionError("add: shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return TensorT<T>::make_op(a.shape(), std::move(out), {a, b},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            for (int s = 0; s < 2; ++s) {
                auto& p = n.parents[s];
                if (!p->requires_grad) continue;
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    p->grad[i] += n.grad[i];
            }
        });
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape() != b.shape())
        throw DimensionError("sub: shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return TensorT<T>::make_op(a.shape(), std::move(out), {a, b},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (n.parents[0]->requires_grad)
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    n.parents[0]->grad[i] += n.grad[i];
            if (n.parents[1]->requires_grad)
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    n.parents[1]->grad[i] -= n.grad[i];
        });
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape() != b.shape())
        throw DimensionError("mul: shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    return TensorT<T>::make_op(a.shape(), std::move(out), {a, b},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            const auto& da = n.parents[0]->data;
            const auto& db = n.parents[1]->data;
            if (n.parents[0]->requires_grad)
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    n.parents[0]->grad[i] += n.grad[i] * db[i];
            if (n.parents[1]->requires_grad)
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    n.parents[1]->grad[i] += n.grad[i] * da[i];
        });
}

template <typename T>
TensorT<T> scale(const TensorT<T>& x, T s) {
    std::vector<T> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * s;
    return TensorT<T>::make_op(x.shape(), std::move(out), {x},
        [s](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.parents[0]->grad[i] += n.grad[i] * s;
        });
}

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
    std::vector<T> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = x.data()[i] > T(0) ? x.data()[i] : T(0);
    return TensorT<T>::make_op(x.shape(), std::move(out), {x},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            const auto& in = n.parents[0]->data;
            // subgradient at 0 is 0
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                if (in[i] > T(0)) n.parents[0]->grad[i] += n.grad[i];
        });
}

template <typename T>
TensorT<T> abs_val(const TensorT<T>& x) {
    std::vector<T> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(x.data()[i]);
    return TensorT<T>::make_op(x.shape(), std::move(out), {x},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            const auto& in = n.parents[0]->data;
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                if (in[i] > T(0)) n.parents[0]->grad[i] += n.grad[i];
                else if (in[i] < T(0)) n.parents[0]->grad[i] -= n.grad[i];
            }
        });
}

template <typename T>
TensorT<T> sum(const TensorT<T>& x) {
    T acc = T(0);
    for (T v : x.data()) acc += v;
    return TensorT<T>::make_op({1}, {acc}, {x},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (auto& g : n.parents[0]->grad) g += n.grad[0];
        });
}

template <typename T>
TensorT<T> mean(const TensorT<T>& x) {
    return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

// ---------------------------------------------------------------------------
// Layout ops
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> reshape(const TensorT<T>& x, Shape shape) {
    if (numel_of(shape) != x.numel())
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) +
                             " as " + shape_str(shape));
    std::vector<T> out = x.data();
    return TensorT<T>::make_op(std::move(shape), std::move(out), {x},
        [](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.parents[0]->grad[i] += n.grad[i];
        });
}

template <typename T>
TensorT<T> transpose(const TensorT<T>& x) {
    if (x.ndim() != 2)
        throw DimensionError("transpose expects a 2-D tensor, got " +
                             shape_str(x.shape()));
    const std::size_t R = x.extent(0), C = x.extent(1);
    std::vector<T> out(R * C);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) out[c * R + r] = x.data()[r * C + c];
    return TensorT<T>::make_op({C, R}, std::move(out), {x},
        [R, C](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t c = 0; c < C; ++c)
                    n.parents[0]->grad[r * C + c] += n.grad[c * R + r];
        });
}

template <typename T>
TensorT<T> slice_cols(const TensorT<T>& x, std::size_t c0, std::size_t c1) {
    if (x.ndim() != 2 || c0 >= c1 || c1 > x.extent(1))
        throw DimensionError("slice_cols: invalid range [" + std::to_string(c0) +
                             "," + std::to_string(c1) + ") on " +
                             shape_str(x.shape()));
    const std::size_t R = x.extent(0), C = x.extent(1), W = c1 - c0;
    std::vector<T> out(R * W);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < W; ++c) out[r * W + c] = x.data()[r * C + c0 + c];
    return TensorT<T>::make_op({R, W}, std::move(out), {x},
        [R, C, W, c0](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t c = 0; c < W; ++c)
                    n.parents[0]->grad[r * C + c0 + c] += n.grad[r * W + c];
        });
}

// Channel concatenation [C_a, L] ++ [C_b, L] -> [C_a + C_b, L]. Backward
// splits the gradient at the channel boundary.
template <typename T>
TensorT<T> concat(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.extent(1) != b.extent(1))
        throw DimensionError("concat: length mismatch, a has L=" +
                             std::to_string(a.ndim() == 2 ? a.extent(1) : 0) +
                             ", b has L=" +
                             std::to_string(b.ndim() == 2 ? b.extent(1) : 0));
    const std::size_t Ca = a.extent(0), Cb = b.extent(0), L = a.extent(1);
    std::vector<T> out(a.numel() + b.numel());
    std::copy(a.data().begin(), a.data().end(), out.begin());
    std::copy(b.data().begin(), b.data().end(), out.begin() + a.numel());
    return TensorT<T>::make_op({Ca + Cb, L}, std::move(out), {a, b},
        [na = a.numel()](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (n.parents[0]->requires_grad)
                for (std::size_t i = 0; i < na; ++i)
                    n.parents[0]->grad[i] += n.grad[i];
            if (n.parents[1]->requires_grad)
                for (std::size_t i = na; i < n.grad.size(); ++i)
                    n.parents[1]->grad[i - na] += n.grad[i];
        });
}

template <typename T>
TensorT<T> concat_cols(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.extent(0) != b.extent(0))
        throw DimensionError("concat_cols: row mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    const std::size_t R = a.extent(0), Ca = a.extent(1), Cb = b.extent(1);
    std::vector<T> out(R * (Ca + Cb));
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < Ca; ++c) out[r * (Ca + Cb) + c] = a.data()[r * Ca + c];
        for (std::size_t c = 0; c < Cb; ++c) out[r * (Ca + Cb) + Ca + c] = b.data()[r * Cb + c];
    }
    return TensorT<T>::make_op({R, Ca + Cb}, std::move(out), {a, b},
        [R, Ca, Cb](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            for (std::size_t r = 0; r < R; ++r) {
                if (n.parents[0]->requires_grad)
                    for (std::size_t c = 0; c < Ca; ++c)
                        n.parents[0]->grad[r * Ca + c] += n.grad[r * (Ca + Cb) + c];
                if (n.parents[1]->requires_grad)
                    for (std::size_t c = 0; c < Cb; ++c)
                        n.parents[1]->grad[r * Cb + c] += n.grad[r * (Ca + Cb) + Ca + c];
            }
        });
}

// ---------------------------------------------------------------------------
// Dense linear algebra
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.extent(1) != b.extent(0))
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) +
                             " x " + shape_str(b.shape()));
    const std::size_t M = a.extent(0), K = a.extent(1), N = b.extent(1);
    std::vector<T> out(M * N, T(0));
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k) {
            const T av = a.data()[m * K + k];
            for (std::size_t nn = 0; nn < N; ++nn)
                out[m * N + nn] += av * b.data()[k * N + nn];
        }
    return TensorT<T>::make_op({M, N}, std::move(out), {a, b},
        [M, K, N](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            const auto& da = n.parents[0]->data;
            const auto& db = n.parents[1]->data;
            if (n.parents[0]->requires_grad)
                for (std::size_t m = 0; m < M; ++m)
                    for (std::size_t nn = 0; nn < N; ++nn) {
                        const T g = n.grad[m * N + nn];
                        for (std::size_t k = 0; k < K; ++k)
                            n.parents[0]->grad[m * K + k] += g * db[k * N + nn];
                    }
            if (n.parents[1]->requires_grad)
                for (std::size_t m = 0; m < M; ++m)
                    for (std::size_t k = 0; k < K; ++k) {
                        const T av = da[m * K + k];
                        for (std::size_t nn = 0; nn < N; ++nn)
                            n.parents[1]->grad[k * N + nn] += av * n.grad[m * N + nn];
                    }
        });
}

// Affine map over the trailing axis: [..., D_in] -> [..., D_out].
// Accepts 1-D vectors and 2-D row batches.
template <typename T>
TensorT<T> linear(const TensorT<T>& x, const TensorT<T>& weight,
                  const TensorT<T>& bias) {
    const std::size_t Din = x.extent(x.ndim() - 1);
    if (weight.ndim() != 2 || weight.extent(1) != Din)
        throw DimensionError("linear: weight " + shape_str(weight.shape()) +
                             " does not accept trailing axis of " +
                             shape_str(x.shape()));
    const std::size_t Dout = weight.extent(0);
    if (bias.numel() != Dout)
        throw DimensionError("linear: bias " + shape_str(bias.shape()) +
                             " vs D_out=" + std::to_string(Dout));
    const std::size_t R = x.numel() / Din;
    std::vector<T> out(R * Dout);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t o = 0; o < Dout; ++o) {
            T acc = bias.data()[o];
            for (std::size_t i = 0; i < Din; ++i)
                acc += weight.data()[o * Din + i] * x.data()[r * Din + i];
            out[r * Dout + o] = acc;
        }
    Shape oshape = x.shape();
    oshape.back() = Dout;
    return TensorT<T>::make_op(std::move(oshape), std::move(out), {x, weight, bias},
        [R, Din, Dout](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            auto& px = n.parents[0];
            auto& pw = n.parents[1];
            auto& pb = n.parents[2];
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t o = 0; o < Dout; ++o) {
                    const T g = n.grad[r * Dout + o];
                    if (g == T(0)) continue;
                    if (pb->requires_grad) pb->grad[o] += g;
                    for (std::size_t i = 0; i < Din; ++i) {
                        if (px->requires_grad)
                            px->grad[r * Din + i] += g * pw->data[o * Din + i];
                        if (pw->requires_grad)
                            pw->grad[o * Din + i] += g * px->data[r * Din + i];
                    }
                }
        });
}

// ---------------------------------------------------------------------------
// Normalization, softmax, dropout
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> layer_norm(const TensorT<T>& x, const TensorT<T>& gain,
                      const TensorT<T>& shift, T eps = T(1e-5)) {
    const std::size_t D = x.extent(x.ndim() - 1);
    if (gain.numel() != D || shift.numel() != D)
        throw DimensionError("layer_norm: gain/shift length must equal trailing axis " +
                             std::to_string(D));
    const std::size_t R = x.numel() / D;
    std::vector<T> out(x.numel());
    std::vector<T> xhat(x.numel());
    std::vector<T> inv_sd(R);
    for (std::size_t r = 0; r < R; ++r) {
        T mu = T(0);
        for (std::size_t i = 0; i < D; ++i) mu += x.data()[r * D + i];
        mu /= static_cast<T>(D);
        T var = T(0);
        for (std::size_t i = 0; i < D; ++i) {
            const T d = x.data()[r * D + i] - mu;
            var += d * d;
        }
        var /= static_cast<T>(D);  // population variance
        const T isd = T(1) / std::sqrt(var + eps);
        inv_sd[r] = isd;
        for (std::size_t i = 0; i < D; ++i) {
            const T h = (x.data()[r * D + i] - mu) * isd;
            xhat[r * D + i] = h;
            out[r * D + i] = gain.data()[i] * h + shift.data()[i];
        }
    }
    return TensorT<T>::make_op(x.shape(), std::move(out), {x, gain, shift},
        [R, D, xhat = std::move(xhat), inv_sd = std::move(inv_sd)](
            typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            auto& px = n.parents[0];
            auto& pg = n.parents[1];
            auto& ps = n.parents[2];
            for (std::size_t r = 0; r < R; ++r) {
                T sum_dh = T(0), sum_dh_h = T(0);
                for (std::size_t i = 0; i < D; ++i) {
                    const T g = n.grad[r * D + i];
                    const T dh = g * pg->data[i];
                    sum_dh += dh;
                    sum_dh_h += dh * xhat[r * D + i];
                    if (pg->requires_grad) pg->grad[i] += g * xhat[r * D + i];
                    if (ps->requires_grad) ps->grad[i] += g;
                }
                if (!px->requires_grad) continue;
                const T inv_d = T(1) / static_cast<T>(D);
                for (std::size_t i = 0; i < D; ++i) {
                    const T dh = n.grad[r * D + i] * pg->data[i];
                    px->grad[r * D + i] += inv_sd[r] *
                        (dh - sum_dh * inv_d - xhat[r * D + i] * sum_dh_h * inv_d);
                }
            }
        });
}

// Softmax over the trailing axis, max-subtracted.
template <typename T>
TensorT<T> softmax(const TensorT<T>& x) {
    const std::size_t D = x.extent(x.ndim() - 1);
    const std::size_t R = x.numel() / D;
    std::vector<T> out(x.numel());
    for (std::size_t r = 0; r < R; ++r) {
        T mx = x.data()[r * D];
        for (std::size_t i = 1; i < D; ++i) mx = std::max(mx, x.data()[r * D + i]);
        T z = T(0);
        for (std::size_t i = 0; i < D; ++i) {
            const T e = std::exp(x.data()[r * D + i] - mx);
            out[r * D + i] = e;
            z += e;
        }
        for (std::size_t i = 0; i < D; ++i) out[r * D + i] /= z;
    }
    return TensorT<T>::make_op(x.shape(), std::move(out), {x},
        [R, D](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t r = 0; r < R; ++r) {
                T dot = T(0);
                for (std::size_t i = 0; i < D; ++i)
                    dot += n.grad[r * D + i] * n.data[r * D + i];
                for (std::size_t i = 0; i < D; ++i)
                    n.parents[0]->grad[r * D + i] +=
                        n.data[r * D + i] * (n.grad[r * D + i] - dot);
            }
        });
}

// Inverted dropout: survivors are scaled by 1/(1-rate) at train time so the
// eval path is the identity. The mask is a pure function of the rng stream.
template <typename T>
TensorT<T> dropout(const TensorT<T>& x, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ParameterError("dropout rate must be in [0,1), got " +
                             std::to_string(rate));
    if (!training || rate == 0.0) return x;
    const T keep_scale = T(1.0 / (1.0 - rate));
    std::vector<T> mask(x.numel());
    std::vector<T> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        mask[i] = rng.uniform() < rate ? T(0) : keep_scale;
        out[i] = x.data()[i] * mask[i];
    }
    return TensorT<T>::make_op(x.shape(), std::move(out), {x},
        [mask = std::move(mask)](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.parents[0]->grad[i] += n.grad[i] * mask[i];
        });
}

// ---------------------------------------------------------------------------
// 1-D convolution family. Layout is [channels, length], zero padding.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> conv1d(const TensorT<T>& input, const TensorT<T>& weight,
                  const TensorT<T>& bias, std::size_t stride, std::size_t padding) {
    if (input.ndim() != 2 || weight.ndim() != 3)
        throw DimensionError("conv1d: expects input [C_in,L] and weight [C_out,C_in,k]");
    const std::size_t Cin = input.extent(0), L = input.extent(1);
    const std::size_t Cout = weight.extent(0), k = weight.extent(2);
    if (weight.extent(1) != Cin)
        throw DimensionError("conv1d: weight expects C_in=" +
                             std::to_string(weight.extent(1)) + " but input is " +
                             shape_str(input.shape()));
    if (bias.numel() != Cout)
        throw DimensionError("conv1d: bias length " + std::to_string(bias.numel()) +
                             " vs C_out=" + std::to_string(Cout));
    if (k < 1 || stride < 1 || L + 2 * padding < k)
        throw ParameterError("conv1d: invalid kernel/stride/padding for L=" +
                             std::to_string(L));
    const std::size_t Lout = detail::out_len(L, k, stride, padding);
    std::vector<T> out(Cout * Lout);
    for (std::size_t co = 0; co < Cout; ++co)
        for (std::size_t t = 0; t < Lout; ++t) {
            T acc = bias.data()[co];
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) -
                                        static_cast<std::ptrdiff_t>(padding);
            for (std::size_t ci = 0; ci < Cin; ++ci)
                for (std::size_t j = 0; j < k; ++j) {
                    const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                    acc += weight.data()[(co * Cin + ci) * k + j] *
                           input.data()[ci * L + static_cast<std::size_t>(pos)];
                }
            out[co * Lout + t] = acc;
        }
    return TensorT<T>::make_op({Cout, Lout}, std::move(out), {input, weight, bias},
        [Cin, L, Cout, k, Lout, stride, padding](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            auto& pi = n.parents[0];
            auto& pw = n.parents[1];
            auto& pb = n.parents[2];
            for (std::size_t co = 0; co < Cout; ++co)
                for (std::size_t t = 0; t < Lout; ++t) {
                    const T g = n.grad[co * Lout + t];
                    if (g == T(0)) continue;
                    if (pb->requires_grad) pb->grad[co] += g;
                    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) -
                                                static_cast<std::ptrdiff_t>(padding);
                    for (std::size_t ci = 0; ci < Cin; ++ci)
                        for (std::size_t j = 0; j < k; ++j) {
                            const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                            if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                            const std::size_t ip = ci * L + static_cast<std::size_t>(pos);
                            if (pi->requires_grad)
                                pi->grad[ip] += g * pw->data[(co * Cin + ci) * k + j];
                            if (pw->requires_grad)
                                pw->grad[(co * Cin + ci) * k + j] += g * pi->data[ip];
                        }
                }
        });
}

// Transposed convolution; weight layout [C_in, C_out, k]. The forward pass is
// the adjoint (scatter) of conv1d's gather with the same kernel.
template <typename T>
TensorT<T> conv_transpose1d(const TensorT<T>& input, const TensorT<T>& weight,
                            const TensorT<T>& bias, std::size_t stride,
                            std::size_t padding, std::size_t output_padding) {
    if (input.ndim() != 2 || weight.ndim() != 3)
        throw DimensionError("conv_transpose1d: expects input [C_in,L] and weight [C_in,C_out,k]");
    if (output_padding >= stride)
        throw ParameterError("conv_transpose1d: output_padding " +
                             std::to_string(output_padding) + " must be < stride " +
                             std::to_string(stride));
    const std::size_t Cin = input.extent(0), L = input.extent(1);
    const std::size_t Cout = weight.extent(1), k = weight.extent(2);
    if (weight.extent(0) != Cin)
        throw DimensionError("conv_transpose1d: weight expects C_in=" +
                             std::to_string(weight.extent(0)) + " but input is " +
                             shape_str(input.shape()));
    if (bias.numel() != Cout)
        throw DimensionError("conv_transpose1d: bias length " +
                             std::to_string(bias.numel()) + " vs C_out=" +
                             std::to_string(Cout));
    const std::ptrdiff_t lout = static_cast<std::ptrdiff_t>((L - 1) * stride + k +
                                                            output_padding) -
                                2 * static_cast<std::ptrdiff_t>(padding);
    if (lout < 1)
        throw ParameterError("conv_transpose1d: non-positive output length");
    const std::size_t Lout = static_cast<std::size_t>(lout);
    std::vector<T> out(Cout * Lout);
    for (std::size_t co = 0; co < Cout; ++co)
        for (std::size_t t = 0; t < Lout; ++t) out[co * Lout + t] = bias.data()[co];
    for (std::size_t ci = 0; ci < Cin; ++ci)
        for (std::size_t t = 0; t < L; ++t) {
            const T v = input.data()[ci * L + t];
            for (std::size_t co = 0; co < Cout; ++co)
                for (std::size_t j = 0; j < k; ++j) {
                    const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * stride + j) -
                                               static_cast<std::ptrdiff_t>(padding);
                    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(Lout)) continue;
                    out[co * Lout + static_cast<std::size_t>(pos)] +=
                        v * weight.data()[(ci * Cout + co) * k + j];
                }
        }
    return TensorT<T>::make_op({Cout, Lout}, std::move(out), {input, weight, bias},
        [Cin, L, Cout, k, Lout, stride, padding](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            auto& pi = n.parents[0];
            auto& pw = n.parents[1];
            auto& pb = n.parents[2];
            if (pb->requires_grad)
                for (std::size_t co = 0; co < Cout; ++co)
                    for (std::size_t t = 0; t < Lout; ++t)
                        pb->grad[co] += n.grad[co * Lout + t];
            for (std::size_t ci = 0; ci < Cin; ++ci)
                for (std::size_t t = 0; t < L; ++t)
                    for (std::size_t co = 0; co < Cout; ++co)
                        for (std::size_t j = 0; j < k; ++j) {
                            const std::ptrdiff_t pos =
                                static_cast<std::ptrdiff_t>(t * stride + j) -
                                static_cast<std::ptrdiff_t>(padding);
                            if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(Lout))
                                continue;
                            const T g = n.grad[co * Lout + static_cast<std::size_t>(pos)];
                            if (pi->requires_grad)
                                pi->grad[ci * L + t] +=
                                    g * pw->data[(ci * Cout + co) * k + j];
                            if (pw->requires_grad)
                                pw->grad[(ci * Cout + co) * k + j] +=
                                    g * pi->data[ci * L + t];
                        }
        });
}

// Max pooling with -inf padding fill, so padded slots never win. Backward
// routes each output gradient to the argmax input (first index on ties).
template <typename T>
TensorT<T> max_pool1d(const TensorT<T>& input, std::size_t kernel,
                      std::size_t stride, std::size_t padding) {
    if (input.ndim() != 2)
        throw DimensionError("max_pool1d expects [C,L], got " + shape_str(input.shape()));
    const std::size_t C = input.extent(0), L = input.extent(1);
    if (kernel < 1 || stride < 1 || kernel <= padding || L + 2 * padding < kernel)
        throw ParameterError("max_pool1d: empty window for kernel=" +
                             std::to_string(kernel) + " padding=" +
                             std::to_string(padding) + " L=" + std::to_string(L));
    const std::size_t Lout = detail::out_len(L, kernel, stride, padding);
    std::vector<T> out(C * Lout);
    std::vector<std::size_t> argmax(C * Lout);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < Lout; ++t) {
            T best = -std::numeric_limits<T>::infinity();
            std::size_t best_i = 0;
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) -
                                        static_cast<std::ptrdiff_t>(padding);
            for (std::size_t j = 0; j < kernel; ++j) {
                const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                const T v = input.data()[c * L + static_cast<std::size_t>(pos)];
                if (v > best) {
                    best = v;
                    best_i = c * L + static_cast<std::size_t>(pos);
                }
            }
            out[c * Lout + t] = best;
            argmax[c * Lout + t] = best_i;
        }
    return TensorT<T>::make_op({C, Lout}, std::move(out), {input},
        [argmax = std::move(argmax)](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.parents[0]->grad[argmax[i]] += n.grad[i];
        });
}

// Average pooling with zero fill; divisor is always `kernel`, counting padded
// slots, so backward spreads 1/kernel uniformly over in-range positions.
template <typename T>
TensorT<T> avg_pool1d(const TensorT<T>& input, std::size_t kernel,
                      std::size_t stride, std::size_t padding) {
    if (input.ndim() != 2)
        throw DimensionError("avg_pool1d expects [C,L], got " + shape_str(input.shape()));
    const std::size_t C = input.extent(0), L = input.extent(1);
    if (kernel < 1 || stride < 1 || kernel <= padding || L + 2 * padding < kernel)
        throw ParameterError("avg_pool1d: empty window for kernel=" +
                             std::to_string(kernel) + " padding=" +
                             std::to_string(padding) + " L=" + std::to_string(L));
    const std::size_t Lout = detail::out_len(L, kernel, stride, padding);
    const T inv_k = T(1) / static_cast<T>(kernel);
    std::vector<T> out(C * Lout);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < Lout; ++t) {
            T acc = T(0);
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) -
                                        static_cast<std::ptrdiff_t>(padding);
            for (std::size_t j = 0; j < kernel; ++j) {
                const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                acc += input.data()[c * L + static_cast<std::size_t>(pos)];
            }
            out[c * Lout + t] = acc * inv_k;
        }
    return TensorT<T>::make_op({C, Lout}, std::move(out), {input},
        [C, L, Lout, kernel, stride, padding, inv_k](typename TensorT<T>::Node& n) {
            detail::ensure_parent_grads<T>(n);
            if (!n.parents[0]->requires_grad) return;
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t t = 0; t < Lout; ++t) {
                    const T g = n.grad[c * Lout + t] * inv_k;
                    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) -
                                                static_cast<std::ptrdiff_t>(padding);
                    for (std::size_t j = 0; j < kernel; ++j) {
                        const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                        n.parents[0]->grad[c * L + static_cast<std::size_t>(pos)] += g;
                    }
                }
        });
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

// Central-difference check of the analytic gradient of a scalar-valued fn at
// `point`. Returns max_i |analytic_i - cd_i| / max(1, |cd_i|). The fn must be
// deterministic (dropout off) and is re-evaluated 2*numel times.
template <typename T>
double grad_check(const std::function<TensorT<T>(const TensorT<T>&)>& fn,
                  TensorT<T> point, double eps = 1e-5) {
    point.set_requires_grad(true);
    point.zero_grad();
    TensorT<T> y = fn(point);
    y.backward();
    std::vector<T> analytic = point.grad();
    if (analytic.empty()) analytic.assign(point.numel(), T(0));

    double worst = 0.0;
    for (std::size_t i = 0; i < point.numel(); ++i) {
        const T saved = point.data()[i];
        point.data()[i] = saved + static_cast<T>(eps);
        const double fp = static_cast<double>(fn(point).item());
        point.data()[i] = saved - static_cast<T>(eps);
        const double fm = static_cast<double>(fn(point).item());
        point.data()[i] = saved;
        const double cd = (fp - fm) / (2.0 * eps);
        const double rel = std::abs(static_cast<double>(analytic[i]) - cd) /
                           std::max(1.0, std::abs(cd));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace tsd
