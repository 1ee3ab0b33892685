"""Sampling on compact boxes, mean-squared loss, backpropagation and training.

The empirical compact ``K`` is always a finite sampled cloud, so
:func:`sup_error` is the cloud maximum, a lower estimate of the true
``sup_{x in K}``.

Gradients are accumulated over fixed-size chunks of samples and combined
with a pairwise tree whose shape depends only on the number of chunks, so
results are bit-identical for any ``threads`` setting.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import space
from .errors import DivergenceError, ValidationError
from .network import DeepNet, Network, ShallowNet, VectorNet, _hidden
from .rng import stream

CHUNK = 64
DIVERGENCE_LIMIT = 1e12


# -- compact sets and data -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompactBox:
    """The compact ``{x : |x_k| <= s_k}``."""

    s: np.ndarray

    def __post_init__(self):
        s = space.as_vector(self.s, "s")
        if s.ndim != 1 or np.any(s < 0):
            raise ValidationError("box half-widths s_k must be a nonnegative vector")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @classmethod
    def from_rule(cls, c: float, p: float, dim: int) -> "CompactBox":
        """``s_k = c * k**-p`` for ``k = 1..dim``."""
        return cls(c * np.arange(1, dim + 1, dtype=float) ** -p)

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    def contains(self, x, tol: float = 0.0) -> np.ndarray | bool:
        return np.all(np.abs(np.asarray(x)) <= self.s + tol, axis=-1)


def sample_compact(box: CompactBox, n: int, seed: int, name: str = "cloud") -> np.ndarray:
    """``n`` points with coordinate ``k`` uniform on ``[-s_k, s_k]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = stream(seed, "sample", name).uniform(-1.0, 1.0, size=(n, box.dim))
    return u * box.s


def tail_dimension(box: CompactBox, eps: float) -> int:
    """Smallest ``N >= 1`` with ``sum_{k > N} s_k**2 < eps**2``.

    Then ``||x - Pi_N x|| < eps`` for every ``x`` in the box.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    sq = box.s**2
    # tails[N-1] = sum_{k > N} s_k^2, accumulated from the small end
    tails = np.concatenate([np.cumsum(sq[::-1])[::-1][1:], [0.0]])
    ok = np.nonzero(tails < eps**2)[0]
    if ok.size == 0:
        raise ValidationError(f"no N <= {box.dim} brings the box tail below eps={eps}")
    return int(ok[0]) + 1


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    box: CompactBox | None = None

    def __post_init__(self):
        x = np.atleast_2d(space.as_vector(self.inputs, "inputs"))
        y = np.asarray(self.targets, dtype=float)
        if np.ndim(y) == 0:
            y = y[None]
        if len(x) < 1 or len(x) != len(y):
            raise ValidationError(f"{len(x)} inputs for {len(y)} targets")
        if not np.all(np.isfinite(y)):
            raise ValidationError("targets have non-finite entries")
        if self.box is not None and not np.all(self.box.contains(x, 1e-12)):
            raise ValidationError("an input lies outside the declared box")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    def __len__(self) -> int:
        return len(self.inputs)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.inputs[idx], self.targets[idx])


# -- deterministic reductions ------------------------------------------------------


def _tree_sum(parts: list):
    """Pairwise sum with a tree shape fixed by ``len(parts)``."""
    if len(parts) == 1:
        return parts[0]
    mid = (len(parts) + 1) // 2
    left, right = _tree_sum(parts[:mid]), _tree_sum(parts[mid:])
    if isinstance(left, dict):
        return {k: left[k] + right[k] for k in left}
    return left + right


def _map_chunks(fn, n: int, threads: int) -> list:
    bounds = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda b: fn(slice(*b)), bounds))
    return [fn(slice(*b)) for b in bounds]


# -- loss and gradients ------------------------------------------------------------


def predict(net: Network, x) -> np.ndarray:
    return np.asarray(net.forward(np.atleast_2d(x)))


def _residual(net: Network, x, y) -> np.ndarray:
    out = predict(net, x)
    if isinstance(net, VectorNet):
        if y.ndim != 2 or y.shape[1] != net.vs.shape[1]:
            raise ValidationError("vector targets must have shape (B, out_dim)")
    elif y.ndim != 1:
        raise ValidationError("scalar nets need scalar targets")
    return out - y


def mse_loss(net: Network, data: Dataset, threads: int = 1) -> float:
    """``mean |net(x_i) - y_i|^2`` (squared Hilbert norm for vector outputs)."""
    if len(data) == 0:
        raise ValueError("empty dataset")

    def chunk(sl):
        r = _residual(net, data.inputs[sl], data.targets[sl])
        return np.sum(r * r)

    return float(_tree_sum(_map_chunks(chunk, len(data), threads))) / len(data)


def _shallow_chunk_grad(act, alphas, ells, As, bs, x, r):
    """Sums of ``r * d out / d theta`` for (possibly stacked) shallow layers.

    ``r`` has shape ``(B, *P)`` matching the leading axes of ``alphas``.
    """
    pre, post, out = _hidden(act, ells, As, bs, x)
    coef = r[..., None] * alphas  # (B, *P, M)
    g = coef[..., None] * ells
    delta = act.vjp(pre, g)
    return {
        "alphas": np.einsum("b...,b...m->...m", r, out),
        "ells": np.einsum("b...m,b...mi->...mi", coef, post),
        "As": (delta.reshape(len(x), -1).T @ x).reshape(As.shape),
        "bs": np.einsum("b...i->...i", delta),
    }


def _deep_chunk_grad(net: DeepNet, x, r):
    ys, pres = net.states(x)
    h, n = net.step, net.depth
    grads = {"ell": np.einsum("b,bi->i", r, ys[-1])}
    g = r[:, None] * net.ell
    dAs, dbs = np.zeros(net.As.shape), np.zeros(net.bs.shape)
    for k in range(n):
        pre, y_in = pres[n - 1 - k], ys[n - 1 - k]
        delta = net.act.vjp(pre, h * g)
        dAs[k] = delta.T @ y_in
        dbs[k] = np.einsum("bi->i", delta)
        g = (1.0 - h) * g + delta @ net.As[k]
    grads["As"], grads["bs"] = dAs, dbs
    return grads


def grad(net: Network, data: Dataset, threads: int = 1) -> dict[str, np.ndarray]:
    """Exact gradient of :func:`mse_loss` for every trainable array of ``net``.

    Activation parameters and the output directions of a vector net are
    frozen and get no entry.
    """
    if len(data) == 0:
        raise ValueError("empty dataset")
    if not hasattr(net.act, "vjp"):
        raise ValidationError(f"activation {type(net.act).__name__} has no derivative")

    def chunk(sl):
        x, y = data.inputs[sl], data.targets[sl]
        r = _residual(net, x, y)
        if isinstance(net, ShallowNet):
            return _shallow_chunk_grad(net.act, net.alphas, net.ells, net.As, net.bs, x, r)
        if isinstance(net, VectorNet):
            rp = np.einsum("bj,pj->bp", r, net.vs)
            return _shallow_chunk_grad(net.act, net.alphas, net.ells, net.As, net.bs, x, rp)
        if isinstance(net, DeepNet):
            return _deep_chunk_grad(net, x, r)
        raise ValidationError(f"unsupported network type {type(net).__name__}")

    total = _tree_sum(_map_chunks(chunk, len(data), threads))
    scale = 2.0 / len(data)
    return {k: scale * v for k, v in total.items()}


def central_differences(fun: Callable[[dict], float], params: dict, step: float) -> dict:
    """Central-difference gradient of ``fun`` at ``params``, one scalar at a time."""
    if not step > 0:
        raise ValueError("step must be positive")
    out = {}
    for name, value in params.items():
        value = np.asarray(value, dtype=float)
        g = np.zeros(value.shape)
        for idx in np.ndindex(value.shape):
            plus, minus = value.copy(), value.copy()
            plus[idx] += step
            minus[idx] -= step
            g[idx] = (fun({**params, name: plus}) - fun({**params, name: minus})) / (2 * step)
        out[name] = g
    return out


def finite_diff_grad(net: Network, data: Dataset, step: float = 1e-6) -> dict[str, np.ndarray]:
    return central_differences(lambda p: mse_loss(net.with_params(**p), data), net.params(), step)


def gradient_rel_error(a: dict, b: dict) -> float:
    """``max |a - b| / max(max |a|, max |b|)`` over all arrays jointly."""
    diff = max(float(np.max(np.abs(a[k] - b[k]), initial=0.0)) for k in a)
    scale = max(float(np.max(np.abs(v), initial=0.0)) for d in (a, b) for v in d.values())
    return 0.0 if scale == 0.0 else diff / scale


# -- optimization --------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adaptive"
    learning_rate: float = 1e-2
    epochs: int = 100
    batch_size: int | None = None
    seed: int = 0
    train_final_layer_only: bool = False
    final_layer_includes_ell: bool = False
    momentum: float = 0.9
    betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    threads: int = 1

    def __post_init__(self):
        if self.optimizer not in ("sgd", "momentum", "adaptive"):
            raise ValidationError(f"unknown optimizer {self.optimizer!r}")
        if not self.learning_rate >= 0:
            raise ValidationError("learning_rate must be nonnegative")
        if self.epochs < 0:
            raise ValidationError("epochs must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError("batch_size must be positive")


class EpochRecord(NamedTuple):
    epoch: int
    loss: float
    sup_error: float | None
    wall_ms: float


@dataclass
class TrainResult:
    net: Network
    history: list[EpochRecord] = field(default_factory=list)

    @property
    def losses(self) -> list[float]:
        return [rec.loss for rec in self.history]


def trainable_names(net: Network, cfg: TrainConfig) -> tuple[str, ...]:
    if not cfg.train_final_layer_only:
        return tuple(net.params())
    if isinstance(net, DeepNet):
        return ("ell",)
    return ("alphas", "ells") if cfg.final_layer_includes_ell else ("alphas",)


class _Optimizer:
    def __init__(self, cfg: TrainConfig, params: dict):
        self.cfg = cfg
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> dict:
        cfg, lr = self.cfg, self.cfg.learning_rate
        self.t += 1
        new = {}
        for k, p in params.items():
            g = grads[k]
            if cfg.optimizer == "sgd":
                new[k] = p - lr * g
            elif cfg.optimizer == "momentum":
                self.m[k] = cfg.momentum * self.m[k] + g
                new[k] = p - lr * self.m[k]
            else:
                b1, b2 = cfg.betas
                self.m[k] = b1 * self.m[k] + (1 - b1) * g
                self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
                mhat = self.m[k] / (1 - b1**self.t)
                vhat = self.v[k] / (1 - b2**self.t)
                new[k] = p - lr * mhat / (np.sqrt(vhat) + cfg.adam_eps)
        return new


def train(net: Network, data: Dataset, cfg: TrainConfig,
          monitor: Callable[[Network], float] | None = None) -> TrainResult:
    """Optimize ``net`` on ``data``; one history record per epoch.

    ``monitor`` (for instance a held-out :func:`sup_error`) is evaluated after
    every epoch. Raises :class:`DivergenceError` once the loss exceeds
    ``1e12`` or stops being finite.
    """
    n = len(data)
    batch = cfg.batch_size or n
    if batch > n:
        raise ValidationError(f"batch_size {batch} exceeds dataset size {n}")
    names = trainable_names(net, cfg)
    params = {k: np.array(v) for k, v in net.params().items()}
    opt = _Optimizer(cfg, {k: params[k] for k in names})
    result = TrainResult(net)
    start = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        if batch < n:
            order = stream(cfg.seed, "batches", epoch).permutation(n)
            batches = [order[i:i + batch] for i in range(0, n, batch)]
        else:
            batches = [slice(None)]
        for idx in batches:
            current = net.with_params(**params)
            sub = data if isinstance(idx, slice) else data.subset(idx)
            grads = grad(current, sub, cfg.threads)
            params.update(opt.step({k: params[k] for k in names}, grads))
        net = net.with_params(**params)
        loss = mse_loss(net, data, cfg.threads)
        if not np.isfinite(loss) or loss > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"loss {loss!r} at epoch {epoch} (optimizer {cfg.optimizer}, lr {cfg.learning_rate})"
            )
        sup = monitor(net) if monitor is not None else None
        wall = (time.perf_counter() - start) * 1e3
        result.history.append(EpochRecord(epoch, loss, sup, wall))
    result.net = net
    return result


def sup_error(net: Network, target: Callable, cloud) -> float:
    """``max_{x in cloud} |net(x) - target(x)|``, the empirical ``q_K`` of the error."""
    cloud = np.atleast_2d(np.asarray(cloud, dtype=float))
    if cloud.size == 0:
        raise ValueError("empty cloud")
    diff = predict(net, cloud) - np.asarray(target(cloud), dtype=float)
    if diff.ndim == 2:
        return float(np.max(np.sqrt(np.einsum("bi,bi->b", diff, diff))))
    return float(np.max(np.abs(diff)))


def least_squares_alphas(net: ShallowNet, data: Dataset) -> tuple[np.ndarray, float]:
    """Optimal output weights for fixed hidden layer (normal equations) and the resulting loss."""
    _, _, feats = _hidden(net.act, net.ells, net.As, net.bs, data.inputs)
    gram = np.einsum("bm,bn->mn", feats, feats)
    rhs = np.einsum("bm,b->m", feats, data.targets)
    alphas = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return alphas, mse_loss(net.with_params(alphas=alphas), data)
