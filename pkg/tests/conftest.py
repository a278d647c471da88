import numpy as np
import pytest

from quarticdual.instance import generate_random, inst_a, inst_b

SQRT_HALF = 1 / np.sqrt(2)


@pytest.fixture
def A_inst():
    return inst_a()


@pytest.fixture
def B_inst():
    return inst_b()


def central_diff(fun, x, h):
    """Central differences of ``fun`` (scalar- or vector-valued) at ``x``.

    Column k of the result is d fun / d x_k.
    """
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def rel_err(approx, exact):
    approx, exact = np.asarray(approx), np.asarray(exact)
    return float(np.abs(approx - exact).max() / max(1.0, np.abs(exact).max()))


def grid_extrema(A, B, gamma, c, lo=-3.0, hi=3.0, step=1e-4):
    """Brute-force 1-D oracle: local minima and maxima of J on a dense grid.

    Uses its own evaluation of J, independent of the package.
    """
    x = np.arange(lo, hi + step / 2, step)
    J = 0.5 * A * x**2 + 0.5 * gamma * (0.5 * B * x**2 + c) ** 2
    mid = J[1:-1]
    mins = np.flatnonzero((mid < J[:-2]) & (mid < J[2:])) + 1
    maxs = np.flatnonzero((mid > J[:-2]) & (mid > J[2:])) + 1
    return [(x[i], J[i]) for i in mins], [(x[i], J[i]) for i in maxs]


def random_pairs(count, seed=0, n_max=8, N_max=4):
    """(instance, point) pairs over varied dimensions and case targets."""
    rng = np.random.default_rng(seed)
    targets = ("unbiased", "global_min", "convex_at_root", "local_max")
    for k in range(count):
        n = int(rng.integers(1, n_max + 1))
        N = int(rng.integers(1, N_max + 1))
        inst = generate_random(1000 + k, n, N, targets[k % 4])
        yield inst, rng.standard_normal(n)
