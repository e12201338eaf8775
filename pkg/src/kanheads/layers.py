"""Layers with explicit forward/backward passes.

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Param.grad`` during ``backward``.
Inputs and outputs are (batch, features) float64 matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import activation, activation_grad, kaiming_uniform, sigmoid, silu
from .errors import ShapeError, StateError

SQRT5 = float(np.sqrt(5.0))


@dataclass
class Param:
    name: str
    value: np.ndarray
    trainable: bool = True
    grad: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.value = np.ascontiguousarray(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def size(self) -> int:
        return int(self.value.size)


def _silu_grad(x):
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


class Layer:
    in_features: int
    out_features: int

    def __init__(self):
        self._cache = None

    def params(self) -> list[Param]:
        return []

    def _check_input(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(f"{type(self).__name__} expects (batch, {self.in_features}) input, got {x.shape}")

    def _take_cache(self):
        if self._cache is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")
        cache, self._cache = self._cache, None
        return cache

    def penalty(self) -> float:
        return 0.0

    def add_penalty_grad(self) -> None:
        pass


class Linear(Layer):
    def __init__(self, in_features, out_features, rng, prefix=""):
        super().__init__()
        self.in_features, self.out_features = in_features, out_features
        self.weight = Param(prefix + "weight",
                            kaiming_uniform(rng, in_features, out_features, in_features, a=SQRT5))
        self.bias = Param(prefix + "bias", np.zeros(out_features))

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training=False):
        self._check_input(x)
        self._cache = x
        return x @ self.weight.value.T + self.bias.value

    def backward(self, grad_out):
        x = self._take_cache()
        self.weight.grad += grad_out.T @ x
        self.bias.grad += grad_out.sum(axis=0)
        return grad_out @ self.weight.value


class Activation(Layer):
    def __init__(self, kind, features):
        super().__init__()
        self.kind = kind
        self.in_features = self.out_features = features

    def forward(self, x, training=False):
        self._cache = x
        return activation(x, self.kind)

    def backward(self, grad_out):
        return grad_out * activation_grad(self._take_cache(), self.kind)


class Dropout(Layer):
    """Inverted dropout; identity when ``training`` is false."""

    def __init__(self, rate, features):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.in_features = self.out_features = features
        self.rng = None

    def forward(self, x, training=False):
        if not training or self.rate == 0.0:
            self._cache = 1.0
            return x
        if self.rng is None:
            raise StateError("Dropout in training mode needs an rng")
        mask = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        self._cache = mask
        return x * mask

    def backward(self, grad_out):
        return grad_out * self._take_cache()


class FourierKanLayer(Layer):
    """out_j = sum_i sum_k A[j,i,k] cos(k x_i) + B[j,i,k] sin(k x_i) + bias_j."""

    def __init__(self, in_features, out_features, grid_size, rng, bias=True, prefix=""):
        super().__init__()
        self.in_features, self.out_features, self.grid_size = in_features, out_features, grid_size
        std = 1.0 / np.sqrt(in_features * grid_size)
        shape = (out_features, in_features, grid_size)
        self.coeff_cos = Param(prefix + "coeff_cos", rng.normal(0.0, std, size=shape))
        self.coeff_sin = Param(prefix + "coeff_sin", rng.normal(0.0, std, size=shape))
        self.bias = Param(prefix + "bias", np.zeros(out_features)) if bias else None

    def params(self):
        ps = [self.coeff_cos, self.coeff_sin]
        return ps + [self.bias] if self.bias is not None else ps

    def forward(self, x, training=False):
        self._check_input(x)
        n = x.shape[0]
        c, s = kernels.fourier_basis(x, self.grid_size)
        cf, sf = c.reshape(n, -1), s.reshape(n, -1)
        a = self.coeff_cos.value.reshape(self.out_features, -1)
        b = self.coeff_sin.value.reshape(self.out_features, -1)
        self._cache = (c, s)
        out = cf @ a.T + sf @ b.T
        if self.bias is not None:
            out += self.bias.value
        return out

    def backward(self, grad_out):
        c, s = self._take_cache()
        n, m, g = c.shape
        cf, sf = c.reshape(n, -1), s.reshape(n, -1)
        a = self.coeff_cos.value.reshape(self.out_features, -1)
        b = self.coeff_sin.value.reshape(self.out_features, -1)
        self.coeff_cos.grad += (grad_out.T @ cf).reshape(self.coeff_cos.value.shape)
        self.coeff_sin.grad += (grad_out.T @ sf).reshape(self.coeff_sin.value.shape)
        if self.bias is not None:
            self.bias.grad += grad_out.sum(axis=0)
        ga = (grad_out @ a).reshape(n, m, g)
        gb = (grad_out @ b).reshape(n, m, g)
        k = np.arange(1, g + 1, dtype=np.float64)
        return ((gb * c - ga * s) * k).sum(axis=2)


class EfficientKanLayer(Layer):
    """SiLU base path plus a B-spline path contracted in one matrix product.

    ``spline_order`` k gives G + k basis functions per input on the uniform
    [-1, 1] grid; inputs are not rescaled. The optional per-edge scaler
    multiplies each edge's spline coefficients.
    """

    def __init__(self, in_features, out_features, grid_size, rng, spline_order=3,
                 use_scaler=True, l1_strength=0.0, spline_init_scale=0.1, prefix=""):
        super().__init__()
        if l1_strength < 0:
            raise ValueError("l1_strength must be >= 0")
        self.in_features, self.out_features = in_features, out_features
        self.grid_size, self.spline_order = grid_size, spline_order
        self.l1_strength = l1_strength
        nb = grid_size + spline_order
        self.base_weight = Param(prefix + "base_weight",
                                 kaiming_uniform(rng, in_features, out_features, in_features, a=SQRT5))
        self.spline_weight = Param(prefix + "spline_weight",
                                   rng.uniform(-0.5, 0.5, size=(out_features, in_features, nb))
                                   * spline_init_scale / grid_size)
        self.spline_scaler = (Param(prefix + "spline_scaler", np.ones((out_features, in_features)))
                              if use_scaler else None)

    def params(self):
        ps = [self.base_weight, self.spline_weight]
        return ps + [self.spline_scaler] if self.spline_scaler is not None else ps

    def _effective_spline(self):
        w = self.spline_weight.value
        if self.spline_scaler is not None:
            w = w * self.spline_scaler.value[:, :, None]
        return w

    def forward(self, x, training=False):
        self._check_input(x)
        n = x.shape[0]
        bases, dbases = kernels.bspline_basis(x, self.grid_size, self.spline_order)
        w_eff = self._effective_spline()
        self._cache = (x, bases, dbases, w_eff)
        return silu(x) @ self.base_weight.value.T + bases.reshape(n, -1) @ w_eff.reshape(self.out_features, -1).T

    def backward(self, grad_out):
        x, bases, dbases, w_eff = self._take_cache()
        n = x.shape[0]
        self.base_weight.grad += grad_out.T @ silu(x)
        g_eff = (grad_out.T @ bases.reshape(n, -1)).reshape(w_eff.shape)
        if self.spline_scaler is not None:
            self.spline_weight.grad += g_eff * self.spline_scaler.value[:, :, None]
            self.spline_scaler.grad += (g_eff * self.spline_weight.value).sum(axis=2)
        else:
            self.spline_weight.grad += g_eff
        g_bases = (grad_out @ w_eff.reshape(self.out_features, -1)).reshape(bases.shape)
        return (grad_out @ self.base_weight.value) * _silu_grad(x) + (g_bases * dbases).sum(axis=2)

    def penalty(self):
        if self.l1_strength == 0.0:
            return 0.0
        return float(self.l1_strength * np.abs(self.spline_weight.value).mean())

    def add_penalty_grad(self):
        if self.l1_strength == 0.0:
            return
        w = self.spline_weight.value
        self.spline_weight.grad += self.l1_strength * np.sign(w) / w.size


class FasterKanLayer(Layer):
    """RSWAF expansion to (batch, in * G) followed by one affine map.

    Centers (shared across inputs) and the inverse denominator r are
    learnable. The optional SiLU path adds ``silu(x) @ W_s.T + b_s``.
    """

    def __init__(self, in_features, out_features, grid_size, rng, use_silu=False,
                 inv_denom=None, prefix=""):
        super().__init__()
        self.in_features, self.out_features, self.grid_size = in_features, out_features, grid_size
        fan_in = in_features * grid_size
        self.centers = Param(prefix + "centers", np.linspace(-1.0, 1.0, grid_size))
        self.inv_denom = Param(prefix + "inv_denom",
                               np.array([grid_size / 2.0 if inv_denom is None else inv_denom]))
        self.weight = Param(prefix + "weight", kaiming_uniform(rng, fan_in, out_features, fan_in))
        self.bias = Param(prefix + "bias", np.zeros(out_features))
        self.use_silu = use_silu
        if use_silu:
            self.silu_weight = Param(prefix + "silu_weight",
                                     kaiming_uniform(rng, in_features, out_features, in_features))
            self.silu_bias = Param(prefix + "silu_bias", np.zeros(out_features))

    def params(self):
        ps = [self.centers, self.inv_denom, self.weight, self.bias]
        if self.use_silu:
            ps += [self.silu_weight, self.silu_bias]
        return ps

    def forward(self, x, training=False):
        self._check_input(x)
        n = x.shape[0]
        b, t = kernels.rswaf_basis(x, self.centers.value, self.inv_denom.value[0])
        self._cache = (x, b, t)
        out = b.reshape(n, -1) @ self.weight.value.T + self.bias.value
        if self.use_silu:
            out += silu(x) @ self.silu_weight.value.T + self.silu_bias.value
        return out

    def backward(self, grad_out):
        x, b, t = self._take_cache()
        n = x.shape[0]
        r = self.inv_denom.value[0]
        self.weight.grad += grad_out.T @ b.reshape(n, -1)
        self.bias.grad += grad_out.sum(axis=0)
        g_b = (grad_out @ self.weight.value).reshape(b.shape)
        # d b / d v with v = (x - c) r
        s = g_b * (-2.0 * t * b)
        grad_in = s.sum(axis=2) * r
        self.centers.grad += -r * s.sum(axis=(0, 1))
        self.inv_denom.grad += np.array([(s * (x[:, :, None] - self.centers.value)).sum()])
        if self.use_silu:
            self.silu_weight.grad += grad_out.T @ silu(x)
            self.silu_bias.grad += grad_out.sum(axis=0)
            grad_in = grad_in + (grad_out @ self.silu_weight.value) * _silu_grad(x)
        return grad_in
