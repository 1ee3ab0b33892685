"""Coordinate model of a Frechet/Hilbert space with a Schauder basis.

An element ``x = sum_k x_k e_k`` is stored as the float array of its first
``D`` coefficients, where ``D`` is the declared ambient dimension. Functionals
and operators are stored the same way (a length-``D`` vector, a ``D x D``
matrix). Every function here is pure and accepts arrays with extra leading
batch axes wherever that is cheap.

Two seminorm families generate the topology:

* ``HILBERT``: ``p_k(x) = ||x||_2`` for every ``k``;
* ``GRADED``: ``p_k(x) = max_n n**k |x_n|``, an increasing family modelling a
  space of rapidly decreasing sequences.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionError, ValidationError

DEFAULT_DIM = 64
DEFAULT_TERMS = 64
DEFAULT_TOL = 1e-12
UNIT_TOL = 1e-9


class SeminormFamily(enum.Enum):
    HILBERT = "hilbert"
    GRADED = "graded"


class HalfSpaceLabel(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ZERO = "zero"


class Side(enum.Enum):
    GE = "ge"
    LE = "le"
    EQ = "eq"


def as_vector(x, name: str = "x") -> np.ndarray:
    """Validate a coefficient vector (or a batch of them) and return a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] < 1:
        raise ValidationError(f"{name} must have at least one coefficient")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def as_operator(a, name: str = "A") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def basis_vector(k: int, dim: int) -> np.ndarray:
    """The coefficient vector of ``e_k`` (1-based ``k``)."""
    if not 1 <= k <= dim:
        raise DimensionError(f"basis index {k} outside 1..{dim}")
    e = np.zeros(dim)
    e[k - 1] = 1.0
    return e


def _same_dim(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(
            f"{what}: ambient dimensions differ ({a.shape[-1]} vs {b.shape[-1]})"
        )


def seminorm(fam: SeminormFamily, k: int, x) -> np.ndarray | float:
    """Evaluate ``p_k(x)``.

    >>> seminorm(SeminormFamily.GRADED, 2, [0.0, 1.0, 0.0])
    4.0
    """
    if k < 1:
        raise ValueError("seminorm index k must be >= 1")
    x = np.asarray(x, dtype=float)
    if fam is SeminormFamily.HILBERT:
        # scale by the largest entry so tiny and huge vectors neither under- nor overflow
        big = np.max(np.abs(x), axis=-1, keepdims=True)
        safe = np.where(big > 0, big, 1.0)
        out = big[..., 0] * np.sqrt(np.einsum("...i,...i->...", x / safe, x / safe))
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            weights = np.arange(1, x.shape[-1] + 1, dtype=float) ** k
            scaled = weights * np.abs(x)
        scaled = np.where(x == 0.0, 0.0, scaled)
        out = np.max(scaled, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def metric(fam: SeminormFamily, x, y, terms: int = DEFAULT_TERMS) -> float:
    """Partial sum ``sum_{k<=terms} 2^-k p_k(x-y) / (1 + p_k(x-y))``.

    The neglected tail is at most ``2**-terms`` whatever ``x`` and ``y`` are.
    """
    x, y = as_vector(x), as_vector(y, "y")
    _same_dim(x, y, "metric")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    diff = x - y
    total = 0.0
    for k in range(1, terms + 1):
        p = seminorm(fam, k, diff)
        frac = 1.0 if np.isinf(p) else p / (1.0 + p)
        total += 2.0**-k * frac
    return total


def pairing(ell, x) -> np.ndarray | float:
    """Canonical pairing ``<ell, x> = sum_k ell_k x_k``."""
    ell, x = np.asarray(ell, dtype=float), np.asarray(x, dtype=float)
    _same_dim(ell, x, "pairing")
    out = np.einsum("...i,...i->...", ell, x)
    return float(out) if np.ndim(out) == 0 else out


def apply_operator(a, x) -> np.ndarray:
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    _same_dim(a, x, "apply_operator")
    return np.einsum("...ij,...j->...i", a, x)


def _check_n(n: int, dim: int) -> None:
    if not 1 <= n <= dim:
        raise DimensionError(f"projection dimension {n} outside 1..{dim}")


def project(x, n: int) -> np.ndarray:
    """Schauder projection: keep coefficients ``1..n``, zero the rest."""
    x = np.array(x, dtype=float)
    _check_n(n, x.shape[-1])
    x[..., n:] = 0.0
    return x


def project_operator(a, n: int) -> np.ndarray:
    """``Pi_n A Pi_n``: zero every row and column beyond ``n``."""
    a = np.array(a, dtype=float)
    _check_n(n, a.shape[-1])
    a[..., n:, :] = 0.0
    a[..., :, n:] = 0.0
    return a


def half_space_classify(psi, x, t: float = 0.0, tol: float = DEFAULT_TOL) -> HalfSpaceLabel:
    """Which side of the affine hyperplane ``{<psi, .> = t}`` the point ``x`` is on."""
    psi = as_vector(psi, "psi")
    if not np.any(psi):
        raise ValidationError("psi is the zero functional; hyperplane undefined")
    s = pairing(psi, as_vector(x)) - t
    if s > tol:
        return HalfSpaceLabel.PLUS
    if s < -tol:
        return HalfSpaceLabel.MINUS
    return HalfSpaceLabel.ZERO


def check_unit(psi, name: str = "psi") -> np.ndarray:
    psi = as_vector(psi, name)
    norm = float(np.sqrt(np.einsum("i,i->", psi, psi)))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValidationError(f"{name} must have unit norm, got {norm!r}")
    return psi


def distance_to_halfspace(psi, c: float, side: Side, x) -> np.ndarray | float:
    """Hilbert distance from ``x`` to ``{psi >= c}``, ``{psi <= c}`` or ``{psi = c}``.

    ``psi`` must have unit norm, which makes the distance a function of
    ``<psi, x>`` alone.
    """
    psi = check_unit(psi)
    return level_distance(pairing(psi, x), c, side)


def level_distance(t, c: float, side: Side):
    """Distance from the level ``t = <psi, x>`` to the set selected by ``side``."""
    side = Side(side)
    if side is Side.GE:
        out = np.maximum(c - t, 0.0)
    elif side is Side.LE:
        out = np.maximum(t - c, 0.0)
    else:
        out = np.abs(t - c)
    return float(out) if np.ndim(out) == 0 else out
