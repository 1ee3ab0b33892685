"""Shared instance generators for the test modules."""

import numpy as np

from frechetnet import activation as A
from frechetnet import network as N
from frechetnet import training as T
from frechetnet.network import _hidden

LS_VARIANTS = ("rank_one", "relu_like", "coordinatewise", "separating_bump", "truncated_sum")
LS_MAX_CONDITION = 1e3


def feature_condition(net, x):
    """Condition number of the hidden-feature Gram matrix of a shallow net."""
    feats = _hidden(net.act, net.ells, net.As, net.bs, x)[2]
    ev = np.linalg.eigvalsh(feats.T @ feats)
    return np.inf if ev[0] <= 0 else ev[-1] / ev[0]


def least_squares_instances(count, max_neurons=8, max_samples=64):
    """Random small final-layer problems with well-conditioned features.

    Seeds whose feature Gram matrix has condition number above ``1e3`` are
    skipped; a first-order method cannot be expected to hit ``1e-6`` on a
    nearly singular problem within a fixed budget. Returns the instances and
    the number of rejected seeds.
    """
    out, rejected, seed = [], 0, 0
    while len(out) < count:
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 7))
        m = int(rng.integers(1, max_neurons + 1))
        n = int(rng.integers(4 * m, max_samples + 1))
        act = A.default_activation(LS_VARIANTS[seed % len(LS_VARIANTS)], d)
        net = N.init_params(N.ArchSpec("shallow", d, act, neurons=m), seed, N.InitScheme("uniform", 1.0))
        x = rng.uniform(-1.5, 1.5, size=(n, d))
        data = T.Dataset(x, rng.normal(size=n))
        if feature_condition(net, x) <= LS_MAX_CONDITION:
            out.append((net, data))
        else:
            rejected += 1
        seed += 1
    return out, rejected


LS_CONFIG = T.TrainConfig("adaptive", 1e-2, 3000, train_final_layer_only=True)
