"""Experiment harness behind the command line: fits, projection sweeps and checks.

Every function returns plain data (dataclasses, lists and dicts) and leaves
file handling to :mod:`frechetnet.cli`. All randomness is drawn from named
streams of the run seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import activation as act_mod
from . import data as data_mod
from . import space
from .activation import Activation
from .errors import ValidationError
from .network import ArchSpec, InitScheme, Network, ShallowNet, init_params, project_network
from .rng import stream
from .space import SeminormFamily
from .training import (CompactBox, Dataset, TrainConfig, TrainResult, finite_diff_grad, grad,
                       gradient_rel_error, mse_loss, predict, sample_compact, sup_error, train)

GRADCHECK_TOL = 1e-5
DEFAULT_DELTA = 1e-3


# -- builtin targets -------------------------------------------------------------


@dataclass(frozen=True)
class Target:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return self.fn(np.atleast_2d(np.asarray(x, dtype=float)))


def linear_direction(dim: int) -> np.ndarray:
    """Unit functional with weights proportional to ``1/k``."""
    w = 1.0 / np.arange(1, dim + 1)
    return w / np.linalg.norm(w)


def builtin_target(name: str, dim: int, m: int = 3) -> Target:
    """``linear`` ``<psi, x>``, ``quadratic`` ``||Pi_m x||^2`` or ``softplus_linear``."""
    psi = linear_direction(dim)
    if name == "linear":
        return Target(name, lambda x: x @ psi)
    if name == "quadratic":
        if not 1 <= m <= dim:
            raise ValidationError(f"quadratic target needs 1 <= m <= {dim}")
        return Target(name, lambda x: np.einsum("bi,bi->b", x[:, :m], x[:, :m]))
    if name == "softplus_linear":
        return Target(name, lambda x: np.logaddexp(0.0, x @ psi))
    raise ValidationError(f"unknown target {name!r}; expected linear, quadratic or softplus_linear")


BUILTIN_TARGETS = ("linear", "quadratic", "softplus_linear")


# -- fitting -------------------------------------------------------------------


@dataclass(frozen=True)
class FitSpec:
    dim: int = space.DEFAULT_DIM
    activation: Activation | None = None
    neurons: int = 8
    layers: int = 1
    box: tuple[float, float] = (1.0, 1.0)
    train_size: int = 512
    test_size: int = 512
    target: str = "linear"
    init: InitScheme = field(default_factory=InitScheme)
    train: TrainConfig = field(default_factory=TrainConfig)

    def arch(self) -> ArchSpec:
        act = self.activation or act_mod.default_activation("rank_one", self.dim)
        kind = "shallow" if self.layers == 1 else "deep"
        return ArchSpec(kind, self.dim, act, neurons=self.neurons, layers=self.layers)


@dataclass
class FitOutcome:
    result: TrainResult
    initial: Network
    train_loss: float
    test_sup_error: float


def fit_data(spec: FitSpec) -> tuple[Dataset, Callable | np.ndarray, np.ndarray]:
    """Training set, test reference and test cloud for ``spec``.

    A builtin target is sampled on the box ``s_k = c k^-p``. Otherwise
    ``spec.target`` names a coefficient CSV whose last ``test_size`` rows are
    held out (with ``test_size = 0`` the training rows double as test cloud).
    """
    seed = spec.train.seed
    if spec.target in BUILTIN_TARGETS:
        box = CompactBox.from_rule(*spec.box, spec.dim)
        target = builtin_target(spec.target, spec.dim)
        xtr = sample_compact(box, spec.train_size, seed, "train")
        xte = sample_compact(box, spec.test_size, seed, "test")
        return Dataset(xtr, target(xtr), box), target, xte
    path = Path(spec.target)
    if not path.exists() and not path.suffix and len(path.parts) == 1:
        raise ValidationError(f"unknown target {spec.target!r}; expected one of {BUILTIN_TARGETS} or a CSV path")
    table = data_mod.load_dataset_csv(path)
    if table.inputs.shape[1] != spec.dim:
        raise ValidationError(f"dataset has dimension {table.inputs.shape[1]}, run uses --dim {spec.dim}")
    n_test = spec.test_size if spec.test_size < len(table) else 0
    if n_test == 0:
        return table, table.targets, table.inputs
    cut = len(table) - n_test
    return table.subset(slice(0, cut)), table.targets[cut:], table.inputs[cut:]


def _cloud_error(net: Network, reference, cloud) -> float:
    if callable(reference):
        return sup_error(net, reference, cloud)
    return float(np.max(np.abs(predict(net, cloud) - reference)))


def run_fit(spec: FitSpec) -> FitOutcome:
    """Initialize, train with a held-out sup-error monitor and report."""
    data, reference, cloud = fit_data(spec)
    net = init_params(spec.arch(), spec.train.seed, spec.init)
    result = train(net, data, spec.train, monitor=lambda n: _cloud_error(n, reference, cloud))
    loss = result.losses[-1] if result.history else mse_loss(net, data, spec.train.threads)
    return FitOutcome(result, net, loss, _cloud_error(result.net, reference, cloud))


# -- projection sweep ------------------------------------------------------------


def project_sweep(net: Network, dims, cloud) -> list[tuple[int, float]]:
    """``(N, max_x |net(x) - net_N(x)|)`` for each ``N`` with ``net_N`` the projected net."""
    cloud = np.atleast_2d(np.asarray(cloud, dtype=float))
    full = predict(net, cloud)
    rows = []
    for n in dims:
        dev = predict(project_network(net, int(n)), cloud) - full
        if dev.ndim == 2:
            dev = np.sqrt(np.einsum("bi,bi->b", dev, dev))
        rows.append((int(n), float(np.max(np.abs(dev)))))
    return rows


def measured_n_star(rows, delta: float = DEFAULT_DELTA) -> int | None:
    """Smallest swept ``N`` such that every swept ``N' >= N`` deviates by at most ``delta``."""
    best = None
    for n, dev in sorted(rows, reverse=True):
        if dev > delta:
            break
        best = n
    return best


# -- activation checks -----------------------------------------------------------

_FAMILIES = ((SeminormFamily.HILBERT, 1), (SeminormFamily.GRADED, 1),
             (SeminormFamily.GRADED, 2), (SeminormFamily.GRADED, 3))


def region_points(psi, label: space.HalfSpaceLabel, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random points with ``<psi, x>`` positive, negative or zero.

    ``psi`` must be a unit vector. Off the hyperplane the level is at least
    ``1e-3`` in absolute value.
    """
    psi = space.check_unit(psi)
    y = rng.normal(size=(n, psi.shape[0]))
    y -= np.outer(y @ psi, psi)
    if label is space.HalfSpaceLabel.ZERO:
        return y
    level = 10.0 ** rng.uniform(-3.0, 0.0, size=n)
    sign = 1.0 if label is space.HalfSpaceLabel.PLUS else -1.0
    return y + sign * np.outer(level, psi)


def lambda_ladder(lam_max: float, count: int = 13) -> np.ndarray:
    return np.geomspace(1.0, lam_max, count)


def _check(name, passed, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def check_activation(act: Activation, dim: int, seed: int, samples: int = 10_000,
                     per_region: int = 100, lam_max: float = 1e6, tol: float = 1e-9) -> dict:
    """Run the separating-limit, Lipschitz, boundedness and ``sigma_hat(0)`` checks.

    A property the variant does not declare is reported as skipped, not as
    a failure. The returned report is JSON-ready.
    """
    checks = []
    limits = act.separating(dim)
    if limits is None:
        checks.append(_check("separating", True, skipped="no separating limits declared"))
    else:
        lambdas = lambda_ladder(lam_max)
        rng = stream(seed, "check", "regions")
        for label in space.HalfSpaceLabel:
            pts = region_points(limits.psi, label, per_region, rng)
            worst, ok = 0.0, True
            for x in pts:
                rep = act_mod.check_separating_limits(act, limits.psi, x, lambdas, tol)
                gap = float(np.linalg.norm(rep.empirical_limit - limits.for_label(label)))
                worst = max(worst, gap)
                ok &= rep.converged and rep.label is label
            checks.append(_check(f"separating_{label.value}", ok, points=per_region,
                                 max_limit_error=worst, lambda_max=lam_max))
    rng = stream(seed, "check", "pairs")
    scale = 10.0 ** rng.uniform(-1.0, 1.5, size=(samples, 1))
    x = rng.normal(size=(samples, dim)) * scale
    y = x + rng.normal(size=(samples, dim)) * 10.0 ** rng.uniform(-6.0, 0.0, size=(samples, 1))
    pairs = np.stack([x, y], axis=1)
    for fam, k in _FAMILIES:
        tag = f"{fam.value}_k{k}"
        bound = act.lipschitz_bound(fam, k, dim)
        if bound is None:
            checks.append(_check(f"lipschitz_{tag}", True, skipped="no analytic bound"))
        else:
            est = act_mod.estimate_lipschitz(act, fam, k, pairs)
            checks.append(_check(f"lipschitz_{tag}", est <= bound * (1 + 1e-9), estimate=est, bound=bound))
        bound = act.norm_bound(fam, k, dim)
        if bound is None:
            checks.append(_check(f"bounded_{tag}", True, skipped="no analytic bound"))
        else:
            est = act_mod.von_neumann_bound(act, fam, k, x)
            checks.append(_check(f"bounded_{tag}", est <= bound * (1 + 1e-9), estimate=est, bound=bound))
    if isinstance(act, act_mod.CoordinateWise):
        value = float(act.sigma_hat(0.0))
        checks.append(_check("sigma_hat_zero", value == 0.0, value=value))
    return {
        "activation": act.to_dict(),
        "dim": dim,
        "seed": seed,
        "samples": samples,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


# -- gradient checks -------------------------------------------------------------


class _CorruptedActivation:
    """Negative control: the forward map is intact, the backward map is scaled."""

    def __init__(self, inner: Activation, factor: float = 1.5):
        self.inner, self.factor = inner, factor

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def __call__(self, x):
        return self.inner(x)

    def vjp(self, x, g):
        return self.factor * self.inner.vjp(x, g)

    def project(self, n):
        return _CorruptedActivation(self.inner.project(n), self.factor)

    def to_dict(self):
        return self.inner.to_dict()


GRADCHECK_ARCHS = ("shallow", "deep", "vector")


def random_instance(act, arch: str, dim: int, samples: int, seed: int, case: int):
    """A small random network and dataset for :func:`gradcheck`."""
    spec = ArchSpec(arch, dim, act, neurons=2, layers=2, outputs=2, residual_step=0.7)
    rng = stream(seed, "gradcheck", arch, dim, case)
    net = init_params(spec, int(rng.integers(2**63)), InitScheme("uniform", 1.0))
    if samples == 0:
        return net, None
    x = rng.uniform(-1.5, 1.5, size=(samples, dim))
    if arch == "vector":
        y = rng.normal(size=(samples, dim))
    else:
        y = rng.normal(size=samples)
    return net, Dataset(x, y)


def gradcheck(acts: dict[str, Activation | Callable[[int], Activation]], dims, nets: int, seed: int,
              samples: int = 8, step: float = 1e-6, corrupt: bool = False) -> dict:
    """Compare :func:`grad` with central differences on random instances.

    ``acts`` maps a label to an activation or to a factory taking the
    dimension. The report passes iff every relative error is below ``1e-5``;
    with ``samples = 0`` there is no loss and every gradient is zero.
    """
    cases = []
    for label, make in acts.items():
        for dim in dims:
            act = make(dim) if callable(make) and not isinstance(make, Activation) else make
            if corrupt:
                act = _CorruptedActivation(act)
            for case in range(nets):
                arch = GRADCHECK_ARCHS[case % len(GRADCHECK_ARCHS)]
                net, data = random_instance(act, arch, dim, samples, seed, case)
                if data is None:
                    err = 0.0
                else:
                    err = gradient_rel_error(grad(net, data), finite_diff_grad(net, data, step))
                cases.append({"activation": label, "dim": dim, "case": case,
                              "architecture": arch, "rel_error": err})
    worst = max((c["rel_error"] for c in cases), default=0.0)
    return {
        "tolerance": GRADCHECK_TOL,
        "step": step,
        "max_rel_error": worst,
        "cases": cases,
        "passed": bool(worst < GRADCHECK_TOL) and not math.isnan(worst),
    }


def random_shallow(dim: int, act: Activation, neurons: int, seed: int,
                   scheme: InitScheme = InitScheme()) -> ShallowNet:
    return init_params(ArchSpec("shallow", dim, act, neurons=neurons), seed, scheme)
