"""Layers built on :mod:`ecbench.neural.tensor`.

Inputs are ``(batch, time, features)`` unless stated otherwise. Weights are
drawn uniformly from ``+-1/sqrt(fan_in)`` with the generator passed at
construction, so a model is a pure function of its seed.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import Tensor


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_children", {})

    def __setattr__(self, name, value):
        if isinstance(value, Module):
            self._children[name] = value
        elif isinstance(value, Tensor) and value.requires_grad:
            self._params[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = ""):
        for name, p in self._params.items():
            yield prefix + name, p
        for name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def n_params(self) -> int:
        return sum(p.size for p in self.parameters())

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def uniform(rng: np.random.Generator, shape, fan_in: int) -> Tensor:
    bound = 1.0 / math.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def constant(value: float, shape) -> Tensor:
    return Tensor(np.full(shape, float(value)), requires_grad=True)


class ModuleList(Module):
    def __init__(self, modules):
        super().__init__()
        self._items = list(modules)
        for i, m in enumerate(self._items):
            self._children[str(i)] = m

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, i):
        return self._items[i]


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng, bias: bool = True):
        super().__init__()
        self.weight = uniform(rng, (n_in, n_out), n_in)
        self.bias = uniform(rng, (n_out,), n_in) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        y = x @ self.weight
        return y + self.bias if self.bias is not None else y


class LayerNorm(Module):
    def __init__(self, dim: int, bias: bool = True, eps: float = 1e-5):
        super().__init__()
        self.weight = constant(1.0, (dim,))
        self.bias = constant(0.0, (dim,)) if bias else None
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        y = T.layer_norm(x, self.eps) * self.weight
        return y + self.bias if self.bias is not None else y


class HeadwiseLayerNorm(Module):
    """Layer norm applied separately to each head's slice, with one scale vector."""

    def __init__(self, dim: int, n_heads: int, eps: float = 1e-5):
        super().__init__()
        self.n_heads = n_heads
        self.weight = constant(1.0, (dim,))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        *lead, d = x.shape
        h = x.reshape(*lead, self.n_heads, d // self.n_heads)
        return T.layer_norm(h, self.eps).reshape(*lead, d) * self.weight


def sinusoidal_encoding(n_steps: int, dim: int) -> np.ndarray:
    pos = np.arange(n_steps)[:, None]
    i = np.arange(dim)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


# ---------------------------------------------------------------- recurrent


class LSTM(Module):
    """Single-direction LSTM (one bias vector per gate), returns all hidden states."""

    def __init__(self, n_in: int, hidden: int, rng, reverse: bool = False):
        super().__init__()
        self.hidden = hidden
        self.reverse = reverse
        self.w_in = uniform(rng, (n_in, 4 * hidden), hidden)
        self.w_rec = uniform(rng, (hidden, 4 * hidden), hidden)
        self.bias = uniform(rng, (4 * hidden,), hidden)

    def forward(self, x: Tensor) -> Tensor:
        B, n_steps, _ = x.shape
        H = self.hidden
        pre = x @ self.w_in + self.bias
        h = Tensor(np.zeros((B, H)))
        c = Tensor(np.zeros((B, H)))
        outs = [None] * n_steps
        steps = range(n_steps - 1, -1, -1) if self.reverse else range(n_steps)
        for t in steps:
            z = pre[:, t, :] + h @ self.w_rec
            i = T.sigmoid(z[:, :H])
            f = T.sigmoid(z[:, H : 2 * H])
            g = T.tanh(z[:, 2 * H : 3 * H])
            o = T.sigmoid(z[:, 3 * H :])
            c = f * c + i * g
            h = o * T.tanh(c)
            outs[t] = h
        return T.stack(outs, axis=1)


class BiLSTM(Module):
    def __init__(self, n_in: int, hidden: int, rng):
        super().__init__()
        self.fwd = LSTM(n_in, hidden, rng)
        self.bwd = LSTM(n_in, hidden, rng, reverse=True)

    def forward(self, x: Tensor) -> Tensor:
        return T.concat([self.fwd(x), self.bwd(x)], axis=-1)


# ---------------------------------------------------------------- attention


class SelfAttention(Module):
    def __init__(self, dim: int, n_heads: int, rng):
        super().__init__()
        if dim % n_heads:
            raise ValueError(f"dim {dim} not divisible by {n_heads} heads")
        self.n_heads = n_heads
        self.q = Linear(dim, dim, rng)
        self.k = Linear(dim, dim, rng)
        self.v = Linear(dim, dim, rng)
        self.out = Linear(dim, dim, rng)

    def forward(self, x: Tensor) -> Tensor:
        B, n, d = x.shape
        nh = self.n_heads
        dh = d // nh

        def heads(t):
            return t.reshape(B, n, nh, dh).transpose(0, 2, 1, 3)

        q, k, v = heads(self.q(x)), heads(self.k(x)), heads(self.v(x))
        att = T.softmax((q @ k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(dh)), axis=-1)
        y = (att @ v).transpose(0, 2, 1, 3).reshape(B, n, d)
        return self.out(y)


class EncoderLayer(Module):
    """Post-norm Transformer encoder layer with a ReLU feed-forward block."""

    def __init__(self, dim: int, n_heads: int, ff_dim: int, rng):
        super().__init__()
        self.attn = SelfAttention(dim, n_heads, rng)
        self.norm1 = LayerNorm(dim)
        self.ff1 = Linear(dim, ff_dim, rng)
        self.ff2 = Linear(ff_dim, dim, rng)
        self.norm2 = LayerNorm(dim)

    def forward(self, x: Tensor) -> Tensor:
        x = self.norm1(x + self.attn(x))
        return self.norm2(x + self.ff2(T.relu(self.ff1(x))))


# ---------------------------------------------------------------- xLSTM parts


class HeadwiseLinear(Module):
    """Block-diagonal projection: ``n_blocks`` independent square maps, no bias."""

    def __init__(self, dim: int, n_blocks: int, rng):
        super().__init__()
        if dim % n_blocks:
            raise ValueError(f"dim {dim} not divisible into {n_blocks} blocks")
        self.n_blocks = n_blocks
        b = dim // n_blocks
        self.weight = uniform(rng, (n_blocks, b, b), b)

    def forward(self, x: Tensor) -> Tensor:
        *lead, d = x.shape
        xb = x.reshape(*lead, self.n_blocks, d // self.n_blocks)
        return T.einsum("...hi,hij->...hj", xb, self.weight).reshape(*lead, d)


class CausalConv(Module):
    """Depthwise causal 1-D convolution along time."""

    def __init__(self, dim: int, kernel: int, rng):
        super().__init__()
        self.kernel = kernel
        self.weight = uniform(rng, (kernel, dim), kernel)
        self.bias = uniform(rng, (dim,), kernel)

    def forward(self, x: Tensor) -> Tensor:
        B, n, d = x.shape
        K = self.kernel
        xp = T.concat([Tensor(np.zeros((B, K - 1, d))), x], axis=1)
        y = self.bias
        for j in range(K):
            y = y + xp[:, K - 1 - j : K - 1 - j + n, :] * self.weight[j]
        return y


class GatedFeedForward(Module):
    def __init__(self, dim: int, ff_dim: int, rng):
        super().__init__()
        self.ff_dim = ff_dim
        self.up = Linear(dim, 2 * ff_dim, rng, bias=False)
        self.down = Linear(ff_dim, dim, rng, bias=False)

    def forward(self, x: Tensor) -> Tensor:
        u = self.up(x)
        return self.down(T.gelu(u[..., : self.ff_dim]) * u[..., self.ff_dim :])


class SLSTMBlock(Module):
    """Residual sLSTM block followed by a gated feed-forward block.

    Cell (per head, with stabilizer state m)::

        m' = max(i~, m + log sigmoid(f~))
        i = exp(i~ - m'),  f = exp(m + log sigmoid(f~) - m')
        c' = f c + i tanh(z~),  n' = f n + i,  h' = sigmoid(o~) c' / n'

    where each gate pre-activation is a headwise input map plus a headwise
    recurrent map of the previous ``h`` plus a bias.
    """

    def __init__(self, dim: int, n_heads: int, rng, conv_kernel: int = 4, ff_multiple: int = 64):
        super().__init__()
        self.dim, self.n_heads = dim, n_heads
        dh = dim // n_heads
        self.norm = LayerNorm(dim, bias=False)
        self.conv = CausalConv(dim, conv_kernel, rng)
        self.w_i = HeadwiseLinear(dim, n_heads, rng)
        self.w_f = HeadwiseLinear(dim, n_heads, rng)
        self.w_z = HeadwiseLinear(dim, n_heads, rng)
        self.w_o = HeadwiseLinear(dim, n_heads, rng)
        self.recurrent = uniform(rng, (n_heads, dh, 4 * dh), dh)
        self.bias = uniform(rng, (4, dim), dh)
        self.group_norm = HeadwiseLayerNorm(dim, n_heads)
        self.ff_norm = LayerNorm(dim, bias=False)
        ff_dim = ff_multiple * math.ceil(1.3 * dim / ff_multiple)
        self.ff = GatedFeedForward(dim, ff_dim, rng)

    def forward(self, x: Tensor) -> Tensor:
        B, n, d = x.shape
        nh, dh = self.n_heads, d // self.n_heads
        xn = self.norm(x)
        xc = T.silu(self.conv(xn))
        pre = [self.w_i(xc), self.w_f(xc), self.w_z(xn), self.w_o(xn)]
        pre = [p + self.bias[g] for g, p in enumerate(pre)]
        h = Tensor(np.zeros((B, nh, dh)))
        c = Tensor(np.zeros((B, d)))
        nrm = Tensor(np.zeros((B, d)))
        m = Tensor(np.zeros((B, d)))
        outs = []
        for t in range(n):
            r = T.einsum("bhi,hij->bhj", h, self.recurrent)  # (B, nh, 4*dh)
            r = r.reshape(B, nh, 4, dh).transpose(0, 2, 1, 3).reshape(B, 4, d)
            gi = pre[0][:, t, :] + r[:, 0, :]
            gf = pre[1][:, t, :] + r[:, 1, :]
            gz = pre[2][:, t, :] + r[:, 2, :]
            go = pre[3][:, t, :] + r[:, 3, :]
            logf = m + T.log_sigmoid(gf)
            m = T.maximum(gi, logf)
            ig = T.exp(gi - m)
            fg = T.exp(logf - m)
            c = fg * c + ig * T.tanh(gz)
            nrm = fg * nrm + ig
            hflat = T.sigmoid(go) * c / nrm
            outs.append(hflat)
            h = hflat.reshape(B, nh, dh)
        y = x + self.group_norm(T.stack(outs, axis=1))
        return y + self.ff(self.ff_norm(y))


class MLSTMBlock(Module):
    """Residual mLSTM block with up-projection (factor 2) and output gating.

    Cell (per head; k scaled by 1/sqrt(head dim))::

        m' = max(m + log sigmoid(f~), i~)
        i = exp(i~ - m'),  f = exp(m + log sigmoid(f~) - m')
        C' = f C + i v k^T,  n' = f n + i k
        h = C' q / max(|n'.q|, exp(-m'))
    """

    def __init__(self, dim: int, n_heads: int, rng, proj_factor: int = 2, qkv_block: int = 4, conv_kernel: int = 4):
        super().__init__()
        inner = proj_factor * dim
        if inner % n_heads or inner % qkv_block:
            raise ValueError(f"inner dim {inner} incompatible with {n_heads} heads / blocks of {qkv_block}")
        self.inner, self.n_heads = inner, n_heads
        self.norm = LayerNorm(dim, bias=False)
        self.up = Linear(dim, 2 * inner, rng, bias=False)
        self.conv = CausalConv(inner, conv_kernel, rng)
        self.q = HeadwiseLinear(inner, inner // qkv_block, rng)
        self.k = HeadwiseLinear(inner, inner // qkv_block, rng)
        self.v = HeadwiseLinear(inner, inner // qkv_block, rng)
        self.igate = Linear(3 * inner, n_heads, rng)
        self.fgate = Linear(3 * inner, n_heads, rng)
        self.fgate.bias.data[:] = np.linspace(3.0, 6.0, n_heads)
        self.out_norm = HeadwiseLayerNorm(inner, n_heads)
        self.skip = constant(1.0, (inner,))
        self.down = Linear(inner, dim, rng, bias=False)

    def forward(self, x: Tensor) -> Tensor:
        B, n, _ = x.shape
        E, nh = self.inner, self.n_heads
        dh = E // nh
        u = self.up(self.norm(x))
        xm, z = u[..., :E], u[..., E:]
        xc = T.silu(self.conv(xm))
        q, k, v = self.q(xc), self.k(xc), self.v(xm)
        qkv = T.concat([q, k, v], axis=-1)
        gi_all, gf_all = self.igate(qkv), self.fgate(qkv)  # (B, n, nh)
        q = q.reshape(B, n, nh, dh)
        k = k.reshape(B, n, nh, dh) * (1.0 / math.sqrt(dh))
        v = v.reshape(B, n, nh, dh)
        C = Tensor(np.zeros((B, nh, dh, dh)))
        nv = Tensor(np.zeros((B, nh, dh)))
        m = Tensor(np.zeros((B, nh)))
        outs = []
        for t in range(n):
            qt, kt, vt = q[:, t], k[:, t], v[:, t]
            logf = m + T.log_sigmoid(gf_all[:, t])
            gi = gi_all[:, t]
            m = T.maximum(logf, gi)
            ig = T.exp(gi - m).reshape(B, nh, 1)
            fg = T.exp(logf - m).reshape(B, nh, 1)
            C = fg.reshape(B, nh, 1, 1) * C + ig.reshape(B, nh, 1, 1) * T.einsum("bhi,bhj->bhij", vt, kt)
            nv = fg * nv + ig * kt
            num = T.einsum("bhij,bhj->bhi", C, qt)
            dot = T.einsum("bhj,bhj->bh", nv, qt).reshape(B, nh, 1)
            den = T.maximum(T.tabs(dot), T.exp(-m).reshape(B, nh, 1))
            outs.append((num / den).reshape(B, E))
        h = self.out_norm(T.stack(outs, axis=1))
        h = (h + self.skip * xc) * T.silu(z)
        return x + self.down(h)
