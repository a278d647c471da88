"""Problem instances: construction, validation, canonical JSON and generation.

An instance fixes the functional

    J(x) = 1/2 x'Ax + sum_j gamma_j/2 (x'B_j x/2 + c_j)^2 - f'x

through the data ``(A, B, gamma, c, f)``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, BinaryIO

import numpy as np

CASE_TARGETS = ("convex_at_root", "global_min", "local_max", "unbiased")

_KEY_ORDER = ("n", "N", "A", "B", "gamma", "c", "f", "name", "seed")
_REQUIRED = ("n", "N", "A", "B", "gamma", "c", "f")


class InstanceError(ValueError):
    """Base class for bad instance input. ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class InstanceParseError(InstanceError):
    pass


class InstanceValidationError(InstanceError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        first = report.violations[0]
        super().__init__(first.field, "; ".join(str(v) for v in report.violations))


class DimensionError(ValueError):
    pass


def _frozen(a: Any) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    n: int
    N: int
    A: np.ndarray
    B: np.ndarray  # shape (N, n, n)
    gamma: np.ndarray
    c: np.ndarray
    f: np.ndarray
    name: str | None = None
    seed: int | None = None

    def __post_init__(self):
        for attr in ("A", "B", "gamma", "c", "f"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))

    def check_vector(self, x, size: int | None = None, what: str = "x") -> np.ndarray:
        """Return ``x`` as a float array whose last axis has length ``size``."""
        size = self.n if size is None else size
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != size:
            raise DimensionError(f"{what} must have trailing dimension {size}, got shape {x.shape}")
        return x


def make_instance(A, B, gamma, c, f, name: str | None = None, seed: int | None = None) -> ProblemInstance:
    """Build an instance, inferring ``n`` and ``N`` from the arrays."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 2:
        B = B[None]
    return ProblemInstance(
        n=A.shape[0], N=B.shape[0], A=A, B=B,
        gamma=np.atleast_1d(gamma), c=np.atleast_1d(c), f=np.atleast_1d(f),
        name=name, seed=seed,
    )


@dataclass(frozen=True)
class Violation:
    field: str
    description: str
    measured: float | None = None

    def __str__(self):
        if self.measured is None:
            return f"{self.field}: {self.description}"
        return f"{self.field}: {self.description} (measured {self.measured:.6g})"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sym_tol(M: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.abs(M).max(initial=0.0)))


def validate(inst: ProblemInstance) -> ValidationReport:
    """Collect every violated invariant; nothing is repaired."""
    rep = ValidationReport()
    bad = rep.violations.append
    n, N = inst.n, inst.N
    if n < 1:
        bad(Violation("n", "must be >= 1", n))
    if N < 1:
        bad(Violation("N", "must be >= 1", N))

    shapes = {
        "A": (inst.A, (n, n)),
        "B": (inst.B, (N, n, n)),
        "gamma": (inst.gamma, (N,)),
        "c": (inst.c, (N,)),
        "f": (inst.f, (n,)),
    }
    shapes_ok = True
    for name, (arr, want) in shapes.items():
        if arr.shape != want:
            bad(Violation(name, f"shape {arr.shape} inconsistent with n={n}, N={N}"))
            shapes_ok = False
        elif not np.all(np.isfinite(arr)):
            bad(Violation(name, "contains non-finite entries"))
            shapes_ok = False
    if not shapes_ok:
        return rep

    asym = float(np.abs(inst.A - inst.A.T).max())
    if asym > sym_tol(inst.A):
        bad(Violation("A", "not symmetric: max|A - A^T|", asym))
    for j, Bj in enumerate(inst.B):
        asym = float(np.abs(Bj - Bj.T).max())
        if asym > sym_tol(Bj):
            bad(Violation(f"B[{j}]", "not symmetric: max|B - B^T|", asym))
    for j, g in enumerate(inst.gamma):
        if not g > 0:
            bad(Violation(f"gamma[{j}]", "must be > 0", float(g)))
    return rep


# ---------------------------------------------------------------------------
# canonical JSON


def _to_document(inst: ProblemInstance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "n": inst.n,
        "N": inst.N,
        "A": inst.A.tolist(),
        "B": inst.B.tolist(),
        "gamma": inst.gamma.tolist(),
        "c": inst.c.tolist(),
        "f": inst.f.tolist(),
    }
    if inst.name is not None:
        doc["name"] = inst.name
    if inst.seed is not None:
        doc["seed"] = inst.seed
    return doc


def save_instance(inst: ProblemInstance) -> bytes:
    """Canonical UTF-8 JSON: fixed key order, one key per line, repr floats."""
    doc = _to_document(inst)
    lines = [f"  {json.dumps(k)}: {json.dumps(doc[k], separators=(', ', ': '))}"
             for k in _KEY_ORDER if k in doc]
    return ("{\n" + ",\n".join(lines) + "\n}\n").encode("utf-8")


def instance_digest(inst: ProblemInstance) -> str:
    return hashlib.sha256(save_instance(inst)).hexdigest()


def _read_bytes(source: bytes | str | BinaryIO) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        return source.encode("utf-8")
    data = source.read()
    return data.encode("utf-8") if isinstance(data, str) else data


def load_instance(source: bytes | str | BinaryIO, strict: bool = True) -> ProblemInstance:
    """Parse an instance document.

    Raises
    ------
    InstanceParseError
        Malformed JSON, a missing key, or an entry of the wrong type.
    InstanceValidationError
        The parsed data violates an invariant (only when ``strict``).
    """
    try:
        doc = json.loads(_read_bytes(source).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InstanceParseError("<document>", f"malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InstanceParseError("<document>", "top level must be a JSON object")
    for key in _REQUIRED:
        if key not in doc:
            raise InstanceParseError(key, "missing required field")
    for key in ("n", "N"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise InstanceParseError(key, "must be an integer")
    arrays = {}
    for key in ("A", "B", "gamma", "c", "f"):
        try:
            arrays[key] = np.array(doc[key], dtype=float)
        except (TypeError, ValueError):
            raise InstanceParseError(key, "must be a (nested) array of numbers") from None
        if arrays[key].dtype == object:
            raise InstanceParseError(key, "ragged array")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise InstanceParseError("name", "must be a string")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise InstanceParseError("seed", "must be an integer")

    inst = ProblemInstance(n=doc["n"], N=doc["N"], name=name, seed=seed, **arrays)
    if strict:
        rep = validate(inst)
        if not rep.ok:
            raise InstanceValidationError(rep)
    return inst


# ---------------------------------------------------------------------------
# reference instances and random generation


def inst_a() -> ProblemInstance:
    """Double well: critical points 0 (local max) and +-1/sqrt(2) (minima)."""
    return make_instance([[1.0]], [[[2.0]]], [1.0], [-1.0], [0.0], name="INST-A")


def inst_b() -> ProblemInstance:
    """Unique critical point 0, the global minimum."""
    return make_instance([[1.0]], [[[2.0]]], [1.0], [1.0], [0.0], name="INST-B")


def _sym_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2


def generate_random(seed: int, n: int, N: int, case_target: str = "unbiased") -> ProblemInstance:
    """Deterministic random instance biased toward one extremal structure.

    ``global_min`` draws a positive definite ``A``, positive semidefinite
    ``B_j`` and ``c_j > 0``, which makes J convex. ``convex_at_root`` and
    ``local_max`` shift ``A`` so that the Hessian at the origin,
    ``A + sum_j gamma_j c_j B_j``, is definite with margin 1, and shrink ``f``
    so a nearby critical point inherits that sign. The bias is best effort.
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    if N < 1:
        raise DimensionError(f"N must be >= 1, got {N}")
    if case_target not in CASE_TARGETS:
        raise ValueError(f"unknown case_target {case_target!r}; expected one of {CASE_TARGETS}")

    rng = np.random.default_rng(seed)
    A = _sym_normal(rng, n)
    gamma = rng.uniform(0.5, 2.0, N)
    f = rng.standard_normal(n)

    if case_target == "global_min":
        A = A + (1.0 - np.linalg.eigvalsh(A)[0]) * np.eye(n)
        B = np.empty((N, n, n))
        for j in range(N):
            G = rng.standard_normal((n, n))
            B[j] = G @ G.T / n
        c = rng.uniform(0.1, 1.0, N)
    else:
        B = np.stack([_sym_normal(rng, n) for _ in range(N)])
        c = rng.uniform(-1.0, 1.0, N)

    if case_target in ("convex_at_root", "local_max"):
        H0 = A + np.einsum("j,jab->ab", gamma * c, B)
        w = np.linalg.eigvalsh(H0)
        if case_target == "convex_at_root":
            A = A + max(0.0, 1.0 - w[0]) * np.eye(n)
        else:
            A = A - max(0.0, w[-1] + 1.0) * np.eye(n)
        f = 0.1 * f

    # exact symmetry in the stored data
    A = (A + A.T) / 2
    B = (B + np.swapaxes(B, 1, 2)) / 2
    return ProblemInstance(n=n, N=N, A=A, B=B, gamma=gamma, c=c, f=f,
                           name=f"random-{case_target}-{seed}", seed=seed)
