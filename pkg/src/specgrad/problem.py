"""Problem abstractions: quadratic objectives, box constraints, smooth oracles.

A quadratic problem is min 0.5*x'Ax - b'x with A symmetric positive
definite. The Hessian A may be stored dense, as a diagonal vector, or as
a sparse symmetric matrix; all solver code only ever needs Hessian-vector
products. Box constraints are per-coordinate intervals, possibly
unbounded (IEEE +-inf sentinels). General smooth objectives enter through
``ObjectiveOracle``, a thin wrapper counting function/gradient calls.
"""

from __future__ import annotations

import json
from typing import Callable

import numpy as np
import scipy.sparse as sp

__all__ = [
    "QuadraticProblem",
    "BoxBounds",
    "ObjectiveOracle",
    "hessian_apply",
    "gradient",
    "project_box",
]


class QuadraticProblem:
    """Strictly convex quadratic objective 0.5*x'Ax - b'x.

    Parameters
    ----------
    hessian : array_like or sparse matrix
        Either a 1-D array of strictly positive diagonal entries, a 2-D
        symmetric positive definite matrix, or a scipy sparse symmetric
        matrix.
    b : array_like, optional
        Linear term; defaults to the zero vector.

    The stored problem is immutable; solvers share instances freely.
    """

    def __init__(self, hessian, b=None):
        if sp.issparse(hessian):
            self.kind = "sparse"
            self._h = hessian.tocsr().astype(np.float64)
            n = self._h.shape[0]
            if self._h.shape[0] != self._h.shape[1]:
                raise ValueError("sparse Hessian must be square")
        else:
            h = np.asarray(hessian, dtype=np.float64)
            if h.ndim == 1:
                if np.any(h <= 0.0):
                    raise ValueError("diagonal Hessian entries must be strictly positive")
                self.kind = "diag"
                self._h = h.copy()
                n = h.shape[0]
            elif h.ndim == 2:
                if h.shape[0] != h.shape[1]:
                    raise ValueError("dense Hessian must be square")
                self.kind = "dense"
                self._h = h.copy()
                n = h.shape[0]
            else:
                raise ValueError("Hessian must be a vector, matrix, or sparse matrix")
        self.dim = n
        if b is None:
            self.b = np.zeros(n)
        else:
            self.b = np.asarray(b, dtype=np.float64).copy()
            if self.b.shape != (n,):
                raise ValueError(f"b has length {self.b.shape}, expected ({n},)")

    @property
    def hessian(self):
        return self._h

    @property
    def diagonal(self) -> np.ndarray:
        """Eigenvalues of a diagonal problem (error for other kinds)."""
        if self.kind != "diag":
            raise ValueError("problem Hessian is not stored in diagonal form")
        return self._h

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Hessian-vector product A v."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.dim},)")
        if self.kind == "diag":
            return self._h * v
        return self._h @ v

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient A x - b."""
        return self.apply(x) - self.b

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(x @ self.apply(x)) - float(self.b @ x)

    def solution(self) -> np.ndarray:
        """Exact minimizer A^{-1} b (test oracle; dense solve for sparse kinds)."""
        if self.kind == "diag":
            return self.b / self._h
        if self.kind == "dense":
            return np.linalg.solve(self._h, self.b)
        from scipy.sparse.linalg import spsolve

        return spsolve(self._h.tocsc(), self.b)

    def as_oracle(self) -> "ObjectiveOracle":
        """Fresh counting oracle over this objective (one per solver run)."""
        return ObjectiveOracle(self.objective, self.gradient)

    def to_json(self) -> dict:
        """Explicit JSON description (arrays inlined; see from_json)."""
        if self.kind == "diag":
            return {"kind": "diag", "eigenvalues": self._h.tolist(), "b": self.b.tolist()}
        if self.kind == "dense":
            return {"kind": "dense", "matrix": self._h.tolist(), "b": self.b.tolist()}
        coo = self._h.tocoo()
        return {
            "kind": "sparse",
            "n": self.dim,
            "rows": coo.row.tolist(),
            "cols": coo.col.tolist(),
            "vals": coo.data.tolist(),
            "b": self.b.tolist(),
        }

    @staticmethod
    def from_json(desc: dict) -> "QuadraticProblem":
        """Build a problem from its JSON description.

        Accepted kinds: ``diag`` / ``dense`` / ``sparse`` with explicit
        arrays, ``laplace3d`` with grid parameters, or ``diag`` / ``dense``
        carrying a ``family`` plus (n, kappa, seed) resolved through the
        benchmark generators. The linear term may be an explicit array or
        ``{"kind": "random", "seed": ..., "range": [lo, hi]}``.
        """
        kind = desc.get("kind")
        if kind == "laplace3d":
            from .generators import LaplaceSpec, gen_laplace3d

            spec = LaplaceSpec(variant=desc["variant"], N=int(desc["N"]))
            problem, _ = gen_laplace3d(spec)
            return problem
        if "family" in desc:
            from .generators import SpectrumSpec, gen_diag_problem, gen_rotated_problem

            spec = SpectrumSpec(
                family=desc["family"],
                n=int(desc["n"]),
                kappa=float(desc.get("kappa", desc["n"])),
                seed=int(desc.get("seed", 0)),
            )
            if kind == "dense":
                return gen_rotated_problem(spec)
            return gen_diag_problem(spec)

        if kind == "diag":
            h = np.asarray(desc["eigenvalues"], dtype=np.float64)
        elif kind == "dense":
            h = np.asarray(desc["matrix"], dtype=np.float64)
        elif kind == "sparse":
            n = int(desc["n"])
            h = sp.coo_matrix(
                (desc["vals"], (desc["rows"], desc["cols"])), shape=(n, n)
            ).tocsr()
        else:
            raise ValueError(f"unknown problem kind: {kind!r}")
        n = h.shape[0]
        b = _resolve_b(desc.get("b"), n)
        return QuadraticProblem(h, b)

    @staticmethod
    def load(path: str) -> "QuadraticProblem":
        with open(path) as fh:
            return QuadraticProblem.from_json(json.load(fh))

    def __repr__(self) -> str:
        return f"QuadraticProblem(kind={self.kind!r}, dim={self.dim})"


def _resolve_b(spec, n: int) -> np.ndarray | None:
    if spec is None or spec == 0:
        return None
    if isinstance(spec, dict):
        if spec.get("kind") != "random":
            raise ValueError(f"unknown linear-term spec: {spec!r}")
        lo, hi = spec.get("range", (-10.0, 10.0))
        rng = np.random.default_rng(int(spec["seed"]))
        return lo + (hi - lo) * rng.random(n)
    return np.asarray(spec, dtype=np.float64)


class BoxBounds:
    """Per-coordinate bounds l <= x <= u; +-inf marks a free side."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=np.float64).copy()
        self.upper = np.asarray(upper, dtype=np.float64).copy()
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower/upper must be equal-length vectors")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        self.dim = self.lower.shape[0]

    @staticmethod
    def free(n: int) -> "BoxBounds":
        return BoxBounds(np.full(n, -np.inf), np.full(n, np.inf))

    def project(self, x: np.ndarray) -> np.ndarray:
        """Euclidean projection: componentwise clamp onto [l, u]."""
        return np.clip(np.asarray(x, dtype=np.float64), self.lower, self.upper)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def __repr__(self) -> str:
        return f"BoxBounds(dim={self.dim})"


class ObjectiveOracle:
    """Counting wrapper around (f, grad) callables.

    Each solver run owns its oracle; the counters are the run's
    function/gradient evaluation totals.
    """

    def __init__(self, f: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray]):
        self._f = f
        self._grad = grad
        self.eval_count = 0
        self.grad_count = 0

    def f(self, x: np.ndarray) -> float:
        self.eval_count += 1
        return float(self._f(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        self.grad_count += 1
        return np.asarray(self._grad(x), dtype=np.float64)


def hessian_apply(p: QuadraticProblem, v: np.ndarray) -> np.ndarray:
    """Hessian-vector product A v."""
    return p.apply(v)


def gradient(p: QuadraticProblem, x: np.ndarray) -> np.ndarray:
    """Gradient A x - b of the quadratic objective."""
    return p.gradient(x)


def project_box(bounds: BoxBounds, x: np.ndarray) -> np.ndarray:
    """Componentwise clamp of x onto the box."""
    return bounds.project(x)
