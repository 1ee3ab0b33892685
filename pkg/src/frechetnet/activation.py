"""Activation functions ``sigma: X -> X`` and empirical property checks.

Six constructions are provided:

``SeparatingBump``
    ``F_1(x) u_+ + F_-1(x) u_- + F_0(x) u_0`` where each ``F`` is the
    Lipschitz bump ``max(1 - d(x, Y)/eps, 0)`` of a half-space or hyperplane.
``ReluLike``
    identity on the ball of radius ``R``, switching to ``u_ge``/``u_le`` far
    out along ``psi``.
``RankOne``
    ``beta(<psi, x>) z``.
``ThreeCoord``
    ``beta1(x_1) e_1 + beta2(x_2) e_2 + beta3(x_1) e_3``.
``TruncatedSum``
    ``sum_{j<=J} beta_j(<psi, x>) z_j``.
``CoordinateWise``
    ``sum_k sigma_hat(x_k) e_k``.

Every activation evaluates on arrays of shape ``(..., D)`` and exposes its
Jacobian, a vector-Jacobian product for backpropagation, the separating
limits it claims (if any) and analytic Lipschitz/boundedness constants.
Derivatives at kinks are right derivatives in the scalar argument of the
piece that kinks.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import ClassVar, NamedTuple

import numpy as np

from . import space
from .errors import DimensionError, ParseError, ValidationError
from .space import HalfSpaceLabel, SeminormFamily, Side

DEFAULT_EPS = 0.2
RANK_TOL = 1e-10


class ScalarSigmoid(enum.Enum):
    """Scalar maps with ``beta(0) = 0``, ``beta(-inf) = 0``, ``beta(+inf) = 1``."""

    RAMP = "ramp"
    SMOOTH_RAMP = "smooth_ramp"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self is ScalarSigmoid.RAMP:
            return np.clip(t, 0.0, 1.0)
        tp = np.maximum(t, 0.0)
        return tp / (1.0 + tp)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self is ScalarSigmoid.RAMP:
            return ((t >= 0.0) & (t < 1.0)).astype(float)
        tp = np.maximum(t, 0.0)
        return np.where(t >= 0.0, 1.0 / (1.0 + tp) ** 2, 0.0)

    @property
    def lipschitz(self) -> float:
        return 1.0

    @property
    def sup(self) -> float:
        return 1.0


class SeparatingLimits(NamedTuple):
    """Limits of ``sigma(lambda x)`` on either side of ``ker(psi)``."""

    psi: np.ndarray
    u_plus: np.ndarray
    u_minus: np.ndarray
    u_zero: np.ndarray

    def for_label(self, label: HalfSpaceLabel) -> np.ndarray:
        return {
            HalfSpaceLabel.PLUS: self.u_plus,
            HalfSpaceLabel.MINUS: self.u_minus,
            HalfSpaceLabel.ZERO: self.u_zero,
        }[label]


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _in_span(v: np.ndarray, others: list[np.ndarray]) -> bool:
    """Whether ``v`` lies in the span of ``others`` (numerical rank test)."""
    base = np.linalg.matrix_rank(np.stack(others, axis=1), tol=RANK_TOL) if others else 0
    full = np.linalg.matrix_rank(np.stack(others + [v], axis=1), tol=RANK_TOL)
    return full == base


def _norm(v) -> float:
    return float(space.seminorm(SeminormFamily.HILBERT, 1, v))


def _dual_weight(psi: np.ndarray, fam: SeminormFamily, k: int) -> float:
    """A constant ``c`` with ``|<psi, v>| <= c p_k(v)`` for every ``v``."""
    if fam is SeminormFamily.HILBERT:
        return _norm(psi)
    n = np.arange(1, psi.shape[-1] + 1, dtype=float)
    return float(np.sum(np.abs(psi) * n**-k))


def _bump(t, level: float, side: Side, eps: float):
    """``max(1 - d/eps, 0)`` with ``d`` the distance from level ``t`` to the set."""
    return np.maximum(1.0 - space.level_distance(t, level, side) / eps, 0.0)


def _bump_slope(t, level: float, side: Side, eps: float):
    t = np.asarray(t, dtype=float)
    if side is Side.GE:
        return np.where((t >= level - eps) & (t < level), 1.0 / eps, 0.0)
    if side is Side.LE:
        return np.where((t >= level) & (t < level + eps), -1.0 / eps, 0.0)
    up = np.where((t >= level) & (t < level + eps), -1.0 / eps, 0.0)
    return up + np.where((t >= level - eps) & (t < level), 1.0 / eps, 0.0)


@dataclass(frozen=True, eq=False)
class Activation:
    """Common machinery; concrete variants override the underscored hooks.

    ``restricted_to = n`` marks the restriction ``Pi_n o sigma o Pi_n`` that
    :meth:`project` produces. Restricted activations skip the construction
    checks that projection can legitimately break (unit ``psi``, span
    conditions).
    """

    kind: ClassVar[str] = ""
    restricted_to: int | None = field(default=None, kw_only=True)

    # -- hooks ---------------------------------------------------------------
    @property
    def dim(self) -> int | None:
        return None

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jacobian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _vjp(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...ij->...j", g, self._jacobian(x))

    def _params(self) -> dict:
        return {}

    def separating(self, dim: int) -> SeparatingLimits | None:
        return None

    def lipschitz_bound(self, fam: SeminormFamily, k: int, dim: int) -> float | None:
        return None

    def norm_bound(self, fam: SeminormFamily, k: int, dim: int) -> float | None:
        return None

    # -- public surface ------------------------------------------------------
    def _prepare(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim is not None and x.shape[-1] != self.dim:
            raise DimensionError(
                f"{self.kind} activation lives in dimension {self.dim}, got {x.shape[-1]}"
            )
        if self.restricted_to is not None:
            x = space.project(x, self.restricted_to)
        return x

    def __call__(self, x) -> np.ndarray:
        out = self._eval(self._prepare(x))
        if self.restricted_to is not None:
            out = space.project(out, self.restricted_to)
        return out

    def jacobian(self, x) -> np.ndarray:
        """Jacobian ``d sigma / d x`` with shape ``(..., D, D)``."""
        jac = self._jacobian(self._prepare(x))
        if self.restricted_to is not None:
            jac = space.project_operator(jac, self.restricted_to)
        return jac

    def vjp(self, x, g) -> np.ndarray:
        """Row vector ``g^T J(x)``; the hot path of backpropagation."""
        x = self._prepare(x)
        g = np.asarray(g, dtype=float)
        if self.restricted_to is not None:
            g = space.project(g, self.restricted_to)
            return space.project(self._vjp(x, g), self.restricted_to)
        return self._vjp(x, g)

    def project(self, n: int) -> "Activation":
        """Restrict to ``span{e_1..e_n}`` by projecting every parameter vector."""
        if self.dim is not None and not 1 <= n <= self.dim:
            raise DimensionError(f"projection dimension {n} outside 1..{self.dim}")
        if self.restricted_to is not None:
            n = min(n, self.restricted_to)
        changes = {
            name: space.project(value, n)
            for name, value in self._params().items()
            if isinstance(value, np.ndarray)
        }
        return dataclasses.replace(self, restricted_to=n, **changes)

    def to_dict(self) -> dict:
        doc: dict = {"kind": self.kind}
        for name, value in self._params().items():
            if isinstance(value, np.ndarray):
                doc[name] = value.tolist()
            elif isinstance(value, ScalarSigmoid):
                doc[name] = value.value
            elif isinstance(value, tuple):
                doc[name] = [v.value for v in value]
            else:
                doc[name] = value
        doc["restricted_to"] = self.restricted_to
        return doc


class _LevelActivation(Activation):
    """``sigma(x) = sum_j c_j(<psi, x>) w_j`` for scalar profiles ``c_j``."""

    psi: np.ndarray

    @property
    def dim(self) -> int:
        return self.psi.shape[-1]

    def _pieces(self):
        """Yield ``(profile, slope, direction)`` triples."""
        raise NotImplementedError

    def _level(self, x):
        return np.einsum("...i,i->...", x, self.psi)

    def _eval(self, x):
        t = self._level(x)
        out = np.zeros(x.shape)
        for prof, _, w in self._pieces():
            out = out + np.asarray(prof(t))[..., None] * w
        return out

    def _jacobian(self, x):
        t = self._level(x)
        jac = np.zeros(x.shape + (x.shape[-1],))
        for _, slope, w in self._pieces():
            jac = jac + np.asarray(slope(t))[..., None, None] * np.multiply.outer(w, self.psi)
        return jac

    def _vjp(self, x, g):
        t = self._level(x)
        coef = np.zeros(t.shape)
        for _, slope, w in self._pieces():
            coef = coef + np.asarray(slope(t)) * np.einsum("...i,i->...", g, w)
        return coef[..., None] * self.psi

    def _check_vectors(self, names):
        for name in names:
            v = getattr(self, name)
            if v.shape != (self.dim,):
                raise DimensionError(f"{name} has shape {v.shape}, expected ({self.dim},)")


@dataclass(frozen=True, eq=False)
class SeparatingBump(_LevelActivation):
    kind: ClassVar[str] = "separating_bump"

    psi: np.ndarray
    u_plus: np.ndarray
    u_minus: np.ndarray
    u_zero: np.ndarray
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        for name in ("psi", "u_plus", "u_minus", "u_zero"):
            object.__setattr__(self, name, _frozen(space.as_vector(getattr(self, name), name)))
        self._check_vectors(("u_plus", "u_minus", "u_zero"))
        if not 0.0 < self.eps < 0.25:
            # the three supports are disjoint only when 4 eps < d({psi=1},{psi=0}) = 1
            raise ValidationError(f"eps must lie in (0, 0.25), got {self.eps!r}")
        if self.restricted_to is None:
            space.check_unit(self.psi)
            up, um, u0 = self.u_plus, self.u_minus, self.u_zero
            if _in_span(up, [u0, um]) and _in_span(um, [u0, up]):
                raise ValidationError(
                    "span condition violated: need u_plus not in span{u_zero, u_minus} "
                    "or u_minus not in span{u_zero, u_plus}"
                )

    def _params(self):
        return {"psi": self.psi, "u_plus": self.u_plus, "u_minus": self.u_minus,
                "u_zero": self.u_zero, "eps": self.eps}

    def _pieces(self):
        e = self.eps
        yield (lambda t: _bump(t, 1.0, Side.GE, e), lambda t: _bump_slope(t, 1.0, Side.GE, e), self.u_plus)
        yield (lambda t: _bump(t, -1.0, Side.LE, e), lambda t: _bump_slope(t, -1.0, Side.LE, e), self.u_minus)
        yield (lambda t: _bump(t, 0.0, Side.EQ, e), lambda t: _bump_slope(t, 0.0, Side.EQ, e), self.u_zero)

    def separating(self, dim):
        return SeparatingLimits(self.psi, self.u_plus, self.u_minus, self.u_zero)

    def lipschitz_bound(self, fam, k, dim):
        spread = sum(space.seminorm(fam, k, u) for u in (self.u_plus, self.u_minus, self.u_zero))
        return spread * _dual_weight(self.psi, fam, k) / self.eps

    def norm_bound(self, fam, k, dim):
        return float(sum(space.seminorm(fam, k, u) for u in (self.u_plus, self.u_minus, self.u_zero)))


@dataclass(frozen=True, eq=False)
class ReluLike(_LevelActivation):
    """``U(x) x + I_ge(x) u_ge + I_le(x) u_le`` with ``U = clamp(R + 1 - ||x||, 0, 1)``."""

    kind: ClassVar[str] = "relu_like"

    psi: np.ndarray
    u_ge: np.ndarray
    u_le: np.ndarray
    radius: float = 1.0
    eps: float = 0.5

    def __post_init__(self):
        for name in ("psi", "u_ge", "u_le"):
            object.__setattr__(self, name, _frozen(space.as_vector(getattr(self, name), name)))
        self._check_vectors(("u_ge", "u_le"))
        if not self.radius > 0.0:
            raise ValidationError(f"radius must be positive, got {self.radius!r}")
        if not 0.0 < self.eps < 1.0:
            raise ValidationError(f"eps must lie in (0, 1), got {self.eps!r}")
        if self.restricted_to is None:
            space.check_unit(self.psi)
            if np.linalg.matrix_rank(np.stack([self.u_ge, self.u_le], axis=1), tol=RANK_TOL) < 2:
                raise ValidationError("u_ge and u_le must be linearly independent")

    def _params(self):
        return {"psi": self.psi, "u_ge": self.u_ge, "u_le": self.u_le,
                "radius": self.radius, "eps": self.eps}

    def _pieces(self):
        far, e = self.radius + 2.0, self.eps
        yield (lambda t: _bump(t, far, Side.GE, e), lambda t: _bump_slope(t, far, Side.GE, e), self.u_ge)
        yield (lambda t: _bump(t, -far, Side.LE, e), lambda t: _bump_slope(t, -far, Side.LE, e), self.u_le)

    def _radial(self, x):
        r = np.sqrt(np.einsum("...i,...i->...", x, x))
        s = self.radius + 1.0 - r
        u = np.clip(s, 0.0, 1.0)
        du_ds = ((s >= 0.0) & (s < 1.0)).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = np.where(r[..., None] > 0, -du_ds[..., None] * x / r[..., None], 0.0)
        return u, grad

    def _eval(self, x):
        u, _ = self._radial(x)
        return u[..., None] * x + super()._eval(x)

    def _jacobian(self, x):
        u, grad = self._radial(x)
        eye = np.eye(x.shape[-1])
        return u[..., None, None] * eye + x[..., :, None] * grad[..., None, :] + super()._jacobian(x)

    def _vjp(self, x, g):
        u, grad = self._radial(x)
        gx = np.einsum("...i,...i->...", g, x)
        return u[..., None] * g + gx[..., None] * grad + super()._vjp(x, g)

    def separating(self, dim):
        return SeparatingLimits(self.psi, self.u_ge, self.u_le, np.zeros(self.dim))

    def lipschitz_bound(self, fam, k, dim):
        if fam is not SeminormFamily.HILBERT:
            return None
        # x -> U(x) x is radial with profile r (R+1-r) on [R, R+1]: slope at most R+1
        return self.radius + 1.0 + (_norm(self.u_ge) + _norm(self.u_le)) / self.eps

    def norm_bound(self, fam, k, dim):
        if fam is not SeminormFamily.HILBERT:
            return None
        return self.radius + 1.0 + _norm(self.u_ge) + _norm(self.u_le)


@dataclass(frozen=True, eq=False)
class RankOne(_LevelActivation):
    kind: ClassVar[str] = "rank_one"

    psi: np.ndarray
    z: np.ndarray
    beta: ScalarSigmoid = ScalarSigmoid.RAMP

    def __post_init__(self):
        object.__setattr__(self, "beta", ScalarSigmoid(self.beta))
        for name in ("psi", "z"):
            object.__setattr__(self, name, _frozen(space.as_vector(getattr(self, name), name)))
        self._check_vectors(("z",))
        if self.restricted_to is None:
            if not np.any(self.psi):
                raise ValidationError("psi must be a nonzero functional")
            if not np.any(self.z):
                raise ValidationError("z must be nonzero")

    def _params(self):
        return {"psi": self.psi, "z": self.z, "beta": self.beta}

    def _pieces(self):
        yield self.beta, self.beta.derivative, self.z

    def separating(self, dim):
        zero = np.zeros(self.dim)
        return SeparatingLimits(self.psi, self.z, zero, zero)

    def lipschitz_bound(self, fam, k, dim):
        return self.beta.lipschitz * space.seminorm(fam, k, self.z) * _dual_weight(self.psi, fam, k)

    def norm_bound(self, fam, k, dim):
        return self.beta.sup * space.seminorm(fam, k, self.z)


@dataclass(frozen=True, eq=False)
class TruncatedSum(_LevelActivation):
    """``sum_{j<=terms} beta_j(<psi, x>) z_j``; ``zs`` may hold more rows than used."""

    kind: ClassVar[str] = "truncated_sum"

    psi: np.ndarray
    zs: np.ndarray
    betas: tuple = ()
    terms: int | None = None

    def __post_init__(self):
        psi = _frozen(space.as_vector(self.psi, "psi"))
        zs = _frozen(np.atleast_2d(space.as_vector(self.zs, "zs")))
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "zs", zs)
        if zs.shape[-1] != psi.shape[-1]:
            raise DimensionError(f"zs rows have dimension {zs.shape[-1]}, psi has {psi.shape[-1]}")
        betas = tuple(ScalarSigmoid(b) for b in self.betas) or (ScalarSigmoid.RAMP,) * len(zs)
        if len(betas) != len(zs):
            raise ValidationError(f"{len(betas)} betas for {len(zs)} directions")
        object.__setattr__(self, "betas", betas)
        terms = len(zs) if self.terms is None else int(self.terms)
        if not 1 <= terms <= len(zs):
            raise ValidationError(f"terms must lie in 1..{len(zs)}, got {terms}")
        object.__setattr__(self, "terms", terms)
        if self.restricted_to is None:
            if not np.any(psi):
                raise ValidationError("psi must be a nonzero functional")
            if not np.any(self.limit_direction):
                raise ValidationError("sum of the used directions z_j must be nonzero")

    @property
    def limit_direction(self) -> np.ndarray:
        return self.zs[: self.terms].sum(axis=0)

    def truncate(self, terms: int) -> "TruncatedSum":
        return dataclasses.replace(self, terms=terms)

    def _params(self):
        return {"psi": self.psi, "zs": self.zs, "betas": self.betas, "terms": self.terms}

    def _pieces(self):
        for beta, z in zip(self.betas[: self.terms], self.zs[: self.terms]):
            yield beta, beta.derivative, z

    def separating(self, dim):
        zero = np.zeros(self.dim)
        return SeparatingLimits(self.psi, self.limit_direction, zero, zero)

    def lipschitz_bound(self, fam, k, dim):
        spread = sum(b.lipschitz * space.seminorm(fam, k, z) for b, z in zip(self.betas, self.zs[: self.terms]))
        return spread * _dual_weight(self.psi, fam, k)

    def norm_bound(self, fam, k, dim):
        return max(b.sup for b in self.betas) * float(
            sum(space.seminorm(fam, k, z) for z in self.zs[: self.terms])
        )


def _beta1(t):
    return np.clip(t, -1.0, 1.0)


def _beta1_slope(t):
    return ((t >= -1.0) & (t < 1.0)).astype(float)


def _beta3(t):
    return -np.clip(t, 0.0, 1.0) + 2.0 * np.clip(-t, 0.0, 1.0)


def _beta3_slope(t):
    return np.where((t >= -1.0) & (t < 0.0), -2.0, np.where((t >= 0.0) & (t < 1.0), -1.0, 0.0))


@dataclass(frozen=True, eq=False)
class ThreeCoord(Activation):
    """``beta1(x_1) e_1 + beta2(x_2) e_2 + beta3(x_1) e_3`` in any dimension ``>= 3``.

    ``beta1 = clamp(t, -1, 1)``, ``beta2 = 1`` and ``beta3`` is piecewise linear
    from 2 (at ``-inf``) through 0 (at 0) to -1 (at ``+inf``).
    """

    kind: ClassVar[str] = "three_coord"

    @staticmethod
    def _need3(d):
        if d < 3:
            raise DimensionError(f"three_coord needs dimension >= 3, got {d}")

    def _eval(self, x):
        self._need3(x.shape[-1])
        out = np.zeros(x.shape)
        out[..., 0] = _beta1(x[..., 0])
        out[..., 1] = 1.0
        out[..., 2] = _beta3(x[..., 0])
        return out

    def _jacobian(self, x):
        self._need3(x.shape[-1])
        jac = np.zeros(x.shape + (x.shape[-1],))
        jac[..., 0, 0] = _beta1_slope(x[..., 0])
        jac[..., 2, 0] = _beta3_slope(x[..., 0])
        return jac

    def _vjp(self, x, g):
        self._need3(x.shape[-1])
        out = np.zeros(x.shape)
        out[..., 0] = g[..., 0] * _beta1_slope(x[..., 0]) + g[..., 2] * _beta3_slope(x[..., 0])
        return out

    def separating(self, dim):
        self._need3(dim)
        e1, e2, e3 = (space.basis_vector(k, dim) for k in (1, 2, 3))
        return SeparatingLimits(e1, e1 + e2 - e3, -e1 + e2 + 2 * e3, e2)

    def lipschitz_bound(self, fam, k, dim):
        return float(np.sqrt(5.0)) if fam is SeminormFamily.HILBERT else 2.0 * 3.0**k

    def norm_bound(self, fam, k, dim):
        return float(np.sqrt(6.0)) if fam is SeminormFamily.HILBERT else 2.0 * 3.0**k


@dataclass(frozen=True, eq=False)
class CoordinateWise(Activation):
    kind: ClassVar[str] = "coordinatewise"

    sigma_hat: ScalarSigmoid = ScalarSigmoid.RAMP

    def __post_init__(self):
        object.__setattr__(self, "sigma_hat", ScalarSigmoid(self.sigma_hat))
        if float(self.sigma_hat(0.0)) != 0.0:
            raise ValidationError("sigma_hat(0) must be 0 so that sigma(0) stays in the space")

    def _params(self):
        return {"sigma_hat": self.sigma_hat}

    def _eval(self, x):
        return self.sigma_hat(x)

    def _jacobian(self, x):
        d = self.sigma_hat.derivative(x)
        return d[..., :, None] * np.eye(x.shape[-1])

    def _vjp(self, x, g):
        return g * self.sigma_hat.derivative(x)

    def lipschitz_bound(self, fam, k, dim):
        return self.sigma_hat.lipschitz

    def norm_bound(self, fam, k, dim):
        # only on the truncated model: the bound grows without limit in dim
        sup = self.sigma_hat.sup
        if fam is SeminormFamily.HILBERT:
            return sup * float(np.sqrt(dim))
        return sup * float(dim) ** k


VARIANTS: dict[str, type[Activation]] = {
    cls.kind: cls
    for cls in (SeparatingBump, ReluLike, RankOne, ThreeCoord, TruncatedSum, CoordinateWise)
}


def eval_activation(act: Activation, x) -> np.ndarray:
    return act(x)


def jacobian_activation(act: Activation, x) -> np.ndarray:
    return act.jacobian(x)


# -- serialization -------------------------------------------------------------

_VECTOR_FIELDS = {"psi", "z", "u_plus", "u_minus", "u_zero", "u_ge", "u_le", "zs"}


def activation_from_dict(doc, where: str = "activation") -> Activation:
    """Build an activation from its document form, naming bad fields on failure."""
    if not isinstance(doc, dict):
        raise ParseError("expected an object", where)
    kind = doc.get("kind")
    if kind not in VARIANTS:
        raise ParseError(f"unknown kind {kind!r}; expected one of {sorted(VARIANTS)}", f"{where}.kind")
    cls = VARIANTS[kind]
    allowed = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        if key == "kind":
            continue
        if key not in allowed:
            raise ParseError("unexpected field", f"{where}.{key}")
        if key in _VECTOR_FIELDS:
            try:
                value = np.asarray(value, dtype=float)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"not a numeric array ({exc})", f"{where}.{key}") from None
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValidationError, DimensionError, ValueError, TypeError) as exc:
        raise ParseError(str(exc), where) from exc


def default_activation(name: str, dim: int) -> Activation:
    """Canonical instance of each variant in ambient dimension ``dim``.

    Directions are basis vectors, so every default survives projection onto
    the first few coordinates unchanged.
    """
    def e(k):
        return space.basis_vector(k, dim) if k <= dim else np.zeros(dim)

    if name == "separating_bump":
        return SeparatingBump(e(1), e(1), e(2), e(3), eps=DEFAULT_EPS)
    if name == "relu_like":
        return ReluLike(e(1), e(1), e(2), radius=1.0, eps=0.5)
    if name == "rank_one":
        return RankOne(e(1), e(1), ScalarSigmoid.RAMP)
    if name == "truncated_sum":
        count = min(dim, 4)
        zs = np.stack([2.0 ** -j * e(j) for j in range(1, count + 1)])
        return TruncatedSum(e(1), zs)
    if name == "three_coord":
        return ThreeCoord()
    if name == "coordinatewise":
        return CoordinateWise(ScalarSigmoid.RAMP)
    raise KeyError(f"unknown activation {name!r}; expected one of {sorted(VARIANTS)}")


# -- empirical property checks -------------------------------------------------


class LimitReport(NamedTuple):
    label: HalfSpaceLabel
    empirical_limit: np.ndarray
    converged: bool


def check_separating_limits(act: Activation, psi, x, lambdas, tol: float = 1e-9,
                            side_tol: float = space.DEFAULT_TOL) -> LimitReport:
    """Follow ``sigma(lambda x)`` along ``lambdas`` and compare with the claimed limit.

    ``converged`` requires the last two evaluations to agree within ``tol``
    and the final one to match the limit vector declared for the half-space
    of ``x``, both in the Hilbert norm. Failure is reported, never raised.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise ValueError("lambdas must be nonempty")
    if np.any(np.diff(lambdas) <= 0) or lambdas[0] <= 0:
        raise ValueError("lambdas must be positive and increasing")
    if lambdas[-1] < 1e4:
        raise ValueError("largest lambda must be at least 1e4")
    x = space.as_vector(x)
    label = space.half_space_classify(psi, x, 0.0, side_tol)
    values = act(lambdas[:, None] * x)
    final = values[-1]
    limits = act.separating(x.shape[-1])
    if limits is None:
        return LimitReport(label, final, False)
    settled = len(values) < 2 or _norm(values[-1] - values[-2]) < tol
    matches = _norm(final - limits.for_label(label)) < tol
    return LimitReport(label, final, bool(settled and matches))


def _pairs(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    if arr.ndim != 3 or arr.shape[1] != 2:
        raise ValueError(f"expected pairs with shape (P, 2, D), got {arr.shape}")
    return arr[:, 0], arr[:, 1]


def estimate_lipschitz(act, fam: SeminormFamily, k: int, samples) -> float:
    """``max p_k(sigma(x) - sigma(y)) / p_k(x - y)`` over the sampled pairs.

    A lower bound on the true graded Lipschitz constant. Pairs with
    ``p_k(x - y) = 0`` carry no information and are skipped.
    """
    x, y = _pairs(samples)
    den = np.atleast_1d(space.seminorm(fam, k, x - y))
    num = np.atleast_1d(space.seminorm(fam, k, act(x) - act(y)))
    keep = den > 0
    if not np.any(keep):
        raise ValueError("every sample pair has p_k(x - y) = 0")
    return float(np.max(num[keep] / den[keep]))


def von_neumann_bound(act, fam: SeminormFamily, k: int, samples) -> float:
    """``max p_k(sigma(x))`` over the samples."""
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise ValueError("samples must be nonempty")
    return float(np.max(np.atleast_1d(space.seminorm(fam, k, act(np.atleast_2d(xs))))))
