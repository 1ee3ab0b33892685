"""Network architectures built from the neuron ``x -> <ell, sigma(A x + b)>``.

Parameters are stored as stacked arrays so that a whole hidden layer is
evaluated with one contraction:

* :class:`ShallowNet` ``sum_j alpha_j <ell_j, sigma(A_j x + b_j)>``;
* :class:`DeepNet` ``<ell, (sigma o T_1 o ... o sigma o T_n)(x)>`` with
  ``T_n`` applied first, optionally in residual (Euler step) form;
* :class:`VectorNet` ``sum_i N^i(x) v_i`` for ``d`` shallow nets ``N^i``.

The large contractions are plain 2-D matrix products. BLAS splits those over
output blocks, so each entry is accumulated in the same order at any thread
count.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import space
from .activation import Activation, activation_from_dict
from .errors import DimensionError, ParseError, ValidationError
from .rng import stream

FORMAT_VERSION = 1


def _arr(value, name: str, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must have {ndim} axes, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def _check_act_dim(act: Activation, dim: int) -> None:
    if act.dim is not None and act.dim != dim:
        raise DimensionError(f"activation dimension {act.dim} != network dimension {dim}")


@dataclass(frozen=True, eq=False)
class Neuron:
    ell: np.ndarray
    A: np.ndarray
    b: np.ndarray


def _hidden(act: Activation, ells, As, bs, x):
    """Pre-activations, activations and neuron outputs for a batch ``x``.

    ``As`` may carry any leading parameter axes ``P``; shapes come back as
    ``(B, *P, D)`` and ``(B, *P)``.
    """
    lead, d = As.shape[:-2], As.shape[-1]
    pre = (x @ As.reshape(-1, d).T).reshape((len(x),) + lead + (d,)) + bs
    post = act(pre)
    out = np.einsum("...i,b...i->b...", ells, post)
    return pre, post, out


def _batch(x, dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise DimensionError(f"input has dimension {x.shape[-1]}, network expects {dim}")
    single = x.ndim == 1
    return np.atleast_2d(x), single


@dataclass(frozen=True, eq=False)
class ShallowNet:
    act: Activation
    alphas: np.ndarray
    ells: np.ndarray
    As: np.ndarray
    bs: np.ndarray

    architecture = "shallow"
    param_names = ("alphas", "ells", "As", "bs")

    def __post_init__(self):
        for name, nd in (("alphas", 1), ("ells", 2), ("As", 3), ("bs", 2)):
            object.__setattr__(self, name, _arr(getattr(self, name), name, nd))
        m, d = self.ells.shape
        if m < 1:
            raise ValidationError("a shallow net needs at least one neuron")
        if self.alphas.shape != (m,) or self.As.shape != (m, d, d) or self.bs.shape != (m, d):
            raise DimensionError(
                f"inconsistent shapes: alphas {self.alphas.shape}, ells {self.ells.shape}, "
                f"As {self.As.shape}, bs {self.bs.shape}"
            )
        _check_act_dim(self.act, d)

    @classmethod
    def from_neurons(cls, act, neurons, alphas) -> "ShallowNet":
        return cls(act, alphas, [n.ell for n in neurons], [n.A for n in neurons], [n.b for n in neurons])

    @property
    def dim(self) -> int:
        return self.ells.shape[1]

    @property
    def width(self) -> int:
        return self.ells.shape[0]

    @property
    def neurons(self) -> list[Neuron]:
        return [Neuron(l, a, b) for l, a, b in zip(self.ells, self.As, self.bs)]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.param_names}

    def with_params(self, **arrays) -> "ShallowNet":
        return dataclasses.replace(self, **arrays)

    def forward(self, x):
        x, single = _batch(x, self.dim)
        _, _, out = _hidden(self.act, self.ells, self.As, self.bs, x)
        y = np.einsum("m,bm->b", self.alphas, out)
        return float(y[0]) if single else y

    __call__ = forward


@dataclass(frozen=True, eq=False)
class DeepNet:
    """``layers`` are stored outermost first: ``As[0]`` is ``A_1``.

    With ``step = h`` each layer updates ``y <- (1 - h) y + h sigma(T_k y)``,
    for ``k = n, ..., 1``. ``h = 1`` gives exactly the plain composition.
    """

    act: Activation
    ell: np.ndarray
    As: np.ndarray
    bs: np.ndarray
    step: float = 1.0

    architecture = "deep"
    param_names = ("ell", "As", "bs")

    def __post_init__(self):
        for name, nd in (("ell", 1), ("As", 3), ("bs", 2)):
            object.__setattr__(self, name, _arr(getattr(self, name), name, nd))
        n, d = self.bs.shape
        if n < 1:
            raise ValidationError("a deep net needs at least one layer")
        if self.ell.shape != (d,) or self.As.shape != (n, d, d):
            raise DimensionError(
                f"inconsistent shapes: ell {self.ell.shape}, As {self.As.shape}, bs {self.bs.shape}"
            )
        if not 0.0 < float(self.step) <= 1.0:
            raise ValidationError(f"residual step must lie in (0, 1], got {self.step!r}")
        object.__setattr__(self, "step", float(self.step))
        _check_act_dim(self.act, d)

    @property
    def dim(self) -> int:
        return self.ell.shape[0]

    @property
    def depth(self) -> int:
        return self.bs.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.param_names}

    def with_params(self, **arrays) -> "DeepNet":
        return dataclasses.replace(self, **arrays)

    def states(self, x):
        """Layer inputs ``y_{n+1} = x, y_n, ..., y_1`` and pre-activations, innermost first."""
        h = self.step
        ys, pres = [x], []
        y = x
        for k in reversed(range(self.depth)):
            pre = y @ self.As[k].T + self.bs[k]
            y = (1.0 - h) * y + h * self.act(pre)
            pres.append(pre)
            ys.append(y)
        return ys, pres

    def forward(self, x):
        x, single = _batch(x, self.dim)
        ys, _ = self.states(x)
        out = np.einsum("i,bi->b", self.ell, ys[-1])
        return float(out[0]) if single else out

    __call__ = forward


@dataclass(frozen=True, eq=False)
class VectorNet:
    """``d`` shallow nets of common width sharing one activation, read out along ``vs``."""

    act: Activation
    alphas: np.ndarray
    ells: np.ndarray
    As: np.ndarray
    bs: np.ndarray
    vs: np.ndarray

    architecture = "vector"
    param_names = ("alphas", "ells", "As", "bs")

    def __post_init__(self):
        for name, nd in (("alphas", 2), ("ells", 3), ("As", 4), ("bs", 3), ("vs", 2)):
            object.__setattr__(self, name, _arr(getattr(self, name), name, nd))
        p, m, d = self.ells.shape
        if self.alphas.shape != (p, m) or self.As.shape != (p, m, d, d) or self.bs.shape != (p, m, d):
            raise DimensionError("inconsistent shapes among alphas, ells, As, bs")
        if self.vs.shape[0] != p:
            raise DimensionError(f"{self.vs.shape[0]} output directions for {p} scalar nets")
        norms = np.sqrt(np.einsum("ij,ij->i", self.vs, self.vs))
        if np.any(np.abs(norms - 1.0) > space.UNIT_TOL):
            raise ValidationError("output directions vs must have unit norm")
        if np.linalg.matrix_rank(self.vs) < p:
            raise ValidationError("output directions vs must be linearly independent")
        _check_act_dim(self.act, d)

    @classmethod
    def from_scalar_nets(cls, nets: list[ShallowNet], vs) -> "VectorNet":
        act = nets[0].act
        if any(n.act is not act for n in nets):
            raise ValidationError("scalar nets must share one activation")
        stack = {k: np.stack([getattr(n, k) for n in nets]) for k in ShallowNet.param_names}
        return cls(act, vs=vs, **stack)

    @property
    def dim(self) -> int:
        return self.ells.shape[2]

    @property
    def outputs(self) -> int:
        return self.vs.shape[0]

    @property
    def scalar_nets(self) -> list[ShallowNet]:
        return [
            ShallowNet(self.act, self.alphas[i], self.ells[i], self.As[i], self.bs[i])
            for i in range(self.outputs)
        ]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.param_names}

    def with_params(self, **arrays) -> "VectorNet":
        return dataclasses.replace(self, **arrays)

    def components(self, x) -> np.ndarray:
        """Scalar outputs ``N^i(x)`` with shape ``(B, d)``."""
        _, _, out = _hidden(self.act, self.ells, self.As, self.bs, x)
        return np.einsum("pm,bpm->bp", self.alphas, out)

    def forward(self, x):
        x, single = _batch(x, self.dim)
        y = np.einsum("bp,pj->bj", self.components(x), self.vs)
        return y[0] if single else y

    __call__ = forward


Network = Union[ShallowNet, DeepNet, VectorNet]


def forward_shallow(net: ShallowNet, x):
    return net.forward(x)


def forward_deep(net: DeepNet, x):
    return net.forward(x)


def forward_vector(net: VectorNet, x):
    return net.forward(x)


def project_network(net: Network, n: int) -> Network:
    """Replace ``ell`` by ``ell o Pi_n``, ``A`` by ``Pi_n A Pi_n``, ``b`` by ``Pi_n b``.

    The activation is replaced by its restriction to ``span{e_1..e_n}``. The
    projected net only sees ``Pi_n x``.
    """
    if not 1 <= n <= net.dim:
        raise DimensionError(f"projection dimension {n} outside 1..{net.dim}")
    changes = {"act": net.act.project(n)}
    for name in ("ell", "ells", "bs"):
        if hasattr(net, name):
            changes[name] = space.project(getattr(net, name), n)
    changes["As"] = space.project_operator(net.As, n)
    return dataclasses.replace(net, **changes)


def concatenate(a: ShallowNet, b: ShallowNet) -> ShallowNet:
    """The shallow net whose hidden layer is the union of both layers."""
    if a.act is not b.act:
        raise ValidationError("nets must share one activation")
    return ShallowNet(a.act, *(np.concatenate([getattr(a, k), getattr(b, k)]) for k in ShallowNet.param_names))


# -- initialization ------------------------------------------------------------


_SCHEME = re.compile(r"(fan_in|uniform\(\s*(?P<a>[^,)]+)\s*\))(?P<opts>(\s*,\s*\w+\s*=\s*[^,]+)*)")


@dataclass(frozen=True)
class InitScheme:
    """Random initialization of the trainable arrays.

    ``uniform`` draws from ``U[-a, a]``; ``fan_in`` from ``N(0, 1/fan_in)``.
    The hidden-layer draws (``A`` and ``b``) are multiplied by ``hidden`` and
    ``bias`` is added to every entry of ``b``. Text form:
    ``fan_in``, ``uniform(a)``, optionally followed by ``, hidden=h, bias=c``.
    A small ``hidden`` with ``bias`` inside the linear part of a ramp starts
    every neuron in its linear region.
    """

    kind: str = "fan_in"
    a: float = 0.0
    hidden: float = 1.0
    bias: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "InitScheme":
        match = _SCHEME.fullmatch(text.strip())
        if not match:
            raise ValueError(
                f"unknown init scheme {text!r}; use 'fan_in' or 'uniform(a)', "
                "optionally followed by ', hidden=h, bias=c'"
            )
        kw = {}
        for item in filter(None, (o.strip() for o in match.group("opts").split(","))):
            key, _, value = (part.strip() for part in item.partition("="))
            if key not in ("hidden", "bias"):
                raise ValueError(f"unknown init option {key!r}")
            kw[key] = float(value)
        if match.group("a") is None:
            return cls("fan_in", **kw)
        return cls("uniform", float(match.group("a")), **kw)

    def __str__(self) -> str:
        head = "fan_in" if self.kind == "fan_in" else f"uniform({self.a!r})"
        return head + f", hidden={self.hidden!r}, bias={self.bias!r}"

    def draw(self, rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
        if self.kind == "uniform":
            if self.a < 0:
                raise ValidationError("uniform half-width must be nonnegative")
            return rng.uniform(-self.a, self.a, size=shape) if self.a > 0 else np.zeros(shape)
        if self.kind == "fan_in":
            return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
        raise ValidationError(f"unknown init scheme {self.kind!r}")


@dataclass(frozen=True)
class ArchSpec:
    architecture: str
    dim: int
    activation: Activation
    neurons: int = 8
    layers: int = 1
    outputs: int = 1
    out_dim: int | None = None
    residual_step: float = 1.0

    def __post_init__(self):
        if self.architecture not in ("shallow", "deep", "vector"):
            raise ValidationError(f"unknown architecture {self.architecture!r}")
        for name in ("dim", "neurons", "layers", "outputs"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.architecture == "vector" and self.outputs > (self.out_dim or self.dim):
            raise ValidationError("more outputs than output dimensions")


def init_params(arch: ArchSpec, seed: int, scheme: InitScheme = InitScheme()) -> Network:
    """Draw a network deterministically from ``seed``; activation parameters come from ``arch``."""
    d, m = arch.dim, arch.neurons

    def draw(name, shape, fan_in):
        out = scheme.draw(stream(seed, "init", name), shape, fan_in)
        if name in ("As", "bs"):
            out = scheme.hidden * out
        return out + scheme.bias if name == "bs" else out

    if arch.architecture == "shallow":
        return ShallowNet(
            arch.activation,
            draw("alphas", (m,), m),
            draw("ells", (m, d), d),
            draw("As", (m, d, d), d),
            draw("bs", (m, d), d),
        )
    if arch.architecture == "deep":
        n = arch.layers
        return DeepNet(arch.activation, draw("ell", (d,), d), draw("As", (n, d, d), d),
                       draw("bs", (n, d), d), arch.residual_step)
    p, out = arch.outputs, arch.out_dim or d
    raw = stream(seed, "init", "vs").normal(size=(out, p))
    q, _ = np.linalg.qr(raw)
    return VectorNet(
        arch.activation,
        draw("alphas", (p, m), m),
        draw("ells", (p, m, d), d),
        draw("As", (p, m, d, d), d),
        draw("bs", (p, m, d), d),
        q.T,
    )


# -- model documents -------------------------------------------------------------


def to_document(net: Network) -> dict:
    params = {name: arr.tolist() for name, arr in net.params().items()}
    if isinstance(net, DeepNet):
        params["ells"] = [params.pop("ell")]
    if isinstance(net, VectorNet):
        params["vs"] = net.vs.tolist()
    doc = {
        "format_version": FORMAT_VERSION,
        "architecture": net.architecture,
        "ambient_dim": net.dim,
        "activation": net.act.to_dict(),
        "parameters": params,
    }
    if isinstance(net, DeepNet):
        doc["residual_step"] = net.step
    return doc


def serialize(net: Network) -> str:
    # json writes floats with repr, the shortest exact round-trip form
    return json.dumps(to_document(net), indent=1) + "\n"


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError("missing field", f"{where}{key}")
    return doc[key]


def from_document(doc) -> Network:
    if not isinstance(doc, dict) or not doc:
        raise ParseError("empty or non-object model document", "document")
    version = _require(doc, "format_version", "")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r}", "format_version")
    arch = _require(doc, "architecture", "")
    if arch not in ("shallow", "deep", "vector"):
        raise ParseError(f"unknown architecture {arch!r}", "architecture")
    dim = _require(doc, "ambient_dim", "")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError("must be a positive integer", "ambient_dim")
    act = activation_from_dict(_require(doc, "activation", ""))
    params = _require(doc, "parameters", "")
    if not isinstance(params, dict):
        raise ParseError("expected an object", "parameters")

    wanted = {
        "shallow": {"alphas": 1, "ells": 2, "As": 3, "bs": 2},
        "deep": {"ells": 2, "As": 3, "bs": 2},
        "vector": {"alphas": 2, "ells": 3, "As": 4, "bs": 3, "vs": 2},
    }[arch]
    arrays = {}
    for key, nd in wanted.items():
        raw = _require(params, key, "parameters.")
        try:
            arr = np.array(raw, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("not a rectangular numeric array", f"parameters.{key}") from None
        if arr.ndim != nd:
            raise ParseError(f"expected {nd} axes, got shape {arr.shape}", f"parameters.{key}")
        if key not in ("vs", "alphas") and arr.shape[-1] != dim:
            raise ParseError(f"last axis {arr.shape[-1]} != ambient_dim {dim}", f"parameters.{key}")
        arrays[key] = arr
    for key in set(params) - set(wanted):
        raise ParseError("unexpected field", f"parameters.{key}")

    try:
        if arch == "shallow":
            return ShallowNet(act, **arrays)
        if arch == "deep":
            ells = arrays.pop("ells")
            if ells.shape[0] != 1:
                raise ParseError("deep nets carry exactly one readout functional", "parameters.ells")
            return DeepNet(act, ells[0], step=doc.get("residual_step", 1.0), **arrays)
        return VectorNet(act, **arrays)
    except (DimensionError, ValidationError) as exc:
        raise ParseError(str(exc), "parameters") from exc


def deserialize(text: str) -> Network:
    if not text.strip():
        raise ParseError("empty model document", "document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg} at line {exc.lineno})", "document") from None
    return from_document(doc)
