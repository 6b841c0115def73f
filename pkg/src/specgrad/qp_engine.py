"""Fixed-rule gradient iteration x_{k+1} = x_k - alpha_k g_k on quadratics.

The engine runs one strategy on one problem and records a full trace.
Each iteration costs exactly one Hessian-vector product: the gradient is
advanced by the recurrence g_{k+1} = g_k - alpha_k A g_k and the
objective by the exact quadratic identity
f(x - alpha g) = f(x) - alpha ||g||^2 + alpha^2/2 g'Ag.

Iterates are indexed from k = 1 (the starting point); cyclic long/short
schedules evaluate mod(k, h+s) on that index directly. Where a rule is
undefined at the start (one-step-back quantities at k <= 2) the strategy
takes its long-phase stepsize and the trace labels the iteration
``fallback``.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .problem import QuadraticProblem
from .stepsize import StepsizeUndefinedError, bar_alpha_direct, hat_alpha_direct, yuan_stepsize

__all__ = [
    "METHODS",
    "StrategySpec",
    "RunTrace",
    "DivergedError",
    "run",
    "eigencomponents",
    "stepsize_history_diagnostic",
]

METHODS = (
    "SD",
    "BB1",
    "BB2",
    "DY",
    "SDC",
    "ABBMIN2",
    "AOPT",
    "AOPT_RETARD",
    "NEWS0",
    "NEWS",
    "NEWS2",
    "NEWS3",
    "NEWS4",
)

HS_METHODS = frozenset({"SDC", "NEWS0", "NEWS", "NEWS2", "NEWS3", "NEWS4"})
_HS_METHODS = HS_METHODS
_NEWS_FAMILY = {"NEWS0", "NEWS", "NEWS2", "NEWS3", "NEWS4"}
_MONOTONE = {"SD", "AOPT", "DY", "SDC", "NEWS0", "NEWS"}


class DivergedError(RuntimeError):
    """The iteration produced a nonfinite objective value."""


@dataclass(frozen=True)
class StrategySpec:
    """Which stepsize rule to run, with its schedule parameters.

    h long steps followed by s short steps for the cyclic methods; tau and
    abb_window only apply to ABBMIN2.
    """

    method: str
    h: int = 10
    s: int = 30
    tau: float = 0.9
    abb_window: int = 5

    def __post_init__(self):
        m = self.method.upper()
        if m not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "method", m)
        if m in _HS_METHODS:
            if self.h < 2:
                raise ValueError("h must be at least 2")
            if self.s < 1:
                raise ValueError("s must be at least 1")
        if m == "ABBMIN2":
            if not 0.0 < self.tau < 1.0:
                raise ValueError("tau must lie in (0, 1)")
            if self.abb_window < 1:
                raise ValueError("abb_window must be positive")

    @property
    def monotone(self) -> bool:
        return self.method in _MONOTONE


@dataclass
class RunTrace:
    """Per-iteration record of one solver run.

    ``f`` and ``gnorm`` cover every visited iterate including the final
    one (length iterations + 1); ``alpha`` and ``branch`` cover the steps
    taken. ``gradients`` is populated only when gradient retention was
    requested. The evaluation counters are filled by the oracle-based
    solvers and stay zero for the quadratic engine.
    """

    f: np.ndarray
    gnorm: np.ndarray
    alpha: np.ndarray
    branch: list[str]
    iterations: int
    termination: str
    gradients: list[np.ndarray] | None = None
    func_evals: int = 0
    grad_evals: int = 0
    cpu_seconds: float = 0.0
    pg_inf: np.ndarray | None = None
    ls_records: list[dict] | None = field(default=None, repr=False)
    x_final: np.ndarray | None = field(default=None, repr=False)

    @property
    def final_gnorm_ratio(self) -> float:
        if self.gnorm[0] == 0.0:
            return 0.0
        return float(self.gnorm[-1] / self.gnorm[0])

    def summary(self) -> dict:
        out = {
            "iterations": self.iterations,
            "termination": self.termination,
            "final_gnorm_ratio": self.final_gnorm_ratio,
        }
        if self.grad_evals > 0:
            # oracle-based run: evaluation counters are part of the record
            out["func_evals"] = self.func_evals
            out["grad_evals"] = self.grad_evals
            out["cpu_seconds"] = self.cpu_seconds
        return out

    def to_csv(self, path: str) -> None:
        """Write columns k,f,gnorm,alpha,branch (step fields blank on the
        final visited iterate)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "f", "gnorm", "alpha", "branch"])
            for i in range(len(self.f)):
                if i < self.iterations:
                    writer.writerow(
                        [
                            i + 1,
                            repr(float(self.f[i])),
                            repr(float(self.gnorm[i])),
                            repr(float(self.alpha[i])),
                            self.branch[i],
                        ]
                    )
                else:
                    writer.writerow([i + 1, repr(float(self.f[i])), repr(float(self.gnorm[i])), "", ""])


class _Caches:
    """Rolling scalars/vectors the stepsize rules read (one iterate back)."""

    __slots__ = (
        "g", "w", "gg", "gw", "ww", "gnorm", "sd", "aopt",
        "g_prev", "w_prev", "gw_prev", "ww_prev", "gnorm_prev", "sd_prev", "aopt_prev",
        "bar_cur", "bar_prev",
    )

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, None)


def _refresh(c: _Caches, p: QuadraticProblem, g: np.ndarray) -> None:
    c.g = g
    c.w = p.apply(g)
    c.gg = float(g @ g)
    c.gw = float(g @ c.w)
    c.ww = float(c.w @ c.w)
    c.gnorm = math.sqrt(c.gg)
    if c.gg == 0.0:
        # stationary point: the loop terminates before any rule reads these
        c.sd = None
        c.aopt = None
    else:
        c.sd = c.gg / c.gw
        c.aopt = c.gnorm / math.sqrt(c.ww)


def _advance(c: _Caches) -> None:
    c.g_prev = c.g
    c.w_prev = c.w
    c.gw_prev = c.gw
    c.ww_prev = c.ww
    c.gnorm_prev = c.gnorm
    c.sd_prev = c.sd
    c.aopt_prev = c.aopt
    c.bar_prev = c.bar_cur
    c.bar_cur = None


def _bar_alpha_cached(c: _Caches) -> float | None:
    """Spectral quotient for (g_{k-1}, g_k) from cached products; None when
    the normalized gradients cancel (or rounding makes d'd nonpositive)."""
    cross_gg = float(c.g_prev @ c.g)
    cross_wg = float(c.w_prev @ c.g)
    denom = c.gnorm_prev * c.gnorm
    dd = 2.0 - 2.0 * cross_gg / denom
    dad = c.gw_prev / c.gnorm_prev**2 + c.gw / c.gnorm**2 - 2.0 * cross_wg / denom
    if dd <= 0.0 or dad <= 0.0:
        return None
    return dd / dad


def _choose_alpha(spec: StrategySpec, k: int, c: _Caches, state: dict) -> tuple[float, str]:
    """Stepsize at iterate k plus its trace label (long/short/fallback)."""
    m = spec.method

    if m == "SD":
        return c.sd, "long"

    if m == "AOPT":
        return c.aopt, "long"

    if m == "AOPT_RETARD":
        if k == 1:
            return c.aopt, "long"
        return c.aopt_prev, "long"

    if m == "BB1":
        if k == 1:
            return c.sd, "long"
        return c.sd_prev, "long"

    if m == "BB2":
        if k == 1:
            return c.sd, "long"
        return c.gw_prev / c.ww_prev, "long"

    if m == "DY":
        if k % 4 < 2:
            return c.sd, "long"
        return yuan_stepsize(c.sd_prev, c.sd, c.gnorm_prev, c.gnorm), "short"

    if m == "SDC":
        if k % (spec.h + spec.s) < spec.h:
            return c.sd, "long"
        if k % (spec.h + spec.s) == spec.h:
            state["sdc_frozen"] = yuan_stepsize(c.sd_prev, c.sd, c.gnorm_prev, c.gnorm)
        return state["sdc_frozen"], "short"

    if m == "ABBMIN2":
        if k == 1:
            return c.sd, "long"
        bb1 = c.sd_prev
        bb2 = c.gw_prev / c.ww_prev
        window = state["bb2_window"]
        window.append(bb2)
        if bb2 / bb1 < spec.tau:
            return min(window), "short"
        return bb1, "long"

    # NEWS family: cyclic long steps with spectral short steps.
    if m == "NEWS0":
        long_val = c.aopt
    elif m == "NEWS":
        long_val = c.aopt
    elif m == "NEWS2":
        long_val = c.aopt_prev if k > 1 else c.aopt
    elif m == "NEWS3":
        long_val = c.sd_prev if k > 1 else c.aopt
    else:  # NEWS4
        long_val = (c.gw_prev / c.ww_prev) if k > 1 else c.aopt

    if k % (spec.h + spec.s) < spec.h:
        return long_val, "long"
    bar = c.bar_cur if m == "NEWS0" else c.bar_prev
    if bar is None:
        return long_val, "fallback"
    return min(long_val, bar), "short"


def run(
    p: QuadraticProblem,
    x1: np.ndarray,
    spec: StrategySpec,
    eps: float = 1e-9,
    max_iter: int = 20000,
    retain_gradients: bool = False,
) -> RunTrace:
    """Iterate until ||g_k|| <= eps * ||g_1|| or the step count hits max_iter.

    Same problem, start, and spec give a bitwise-identical trace.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    x = np.asarray(x1, dtype=np.float64).copy()
    if x.shape != (p.dim,):
        raise ValueError(f"x1 has shape {x.shape}, expected ({p.dim},)")

    g = p.gradient(x)
    gnorm1 = float(np.linalg.norm(g))
    f = 0.5 * float(x @ g) - 0.5 * float(p.b @ x)

    fs = [f]
    gnorms = [gnorm1]
    alphas: list[float] = []
    branches: list[str] = []
    grads = [g.copy()] if retain_gradients else None

    if gnorm1 == 0.0:
        return RunTrace(
            np.array(fs), np.array(gnorms), np.array([]), [], 0, "gradient_tol", grads,
            x_final=x,
        )

    tol = eps * gnorm1
    c = _Caches()
    _refresh(c, p, g)
    state: dict = {"bb2_window": deque(maxlen=spec.abb_window), "sdc_frozen": None}
    needs_bar = spec.method in _NEWS_FAMILY

    k = 1
    termination = "iter_cap"
    while True:
        if c.gnorm <= tol:
            termination = "gradient_tol"
            break
        if k > max_iter:
            break

        if needs_bar and k > 1:
            c.bar_cur = _bar_alpha_cached(c)

        alpha, label = _choose_alpha(spec, k, c, state)

        x -= alpha * c.g
        f = f - alpha * c.gg + 0.5 * alpha * alpha * c.gw
        if not math.isfinite(f):
            raise DivergedError(f"nonfinite objective at iteration {k}")
        g_new = c.g - alpha * c.w

        _advance(c)
        _refresh(c, p, g_new)

        alphas.append(alpha)
        branches.append(label)
        fs.append(f)
        gnorms.append(c.gnorm)
        if retain_gradients:
            grads.append(g_new.copy())
        k += 1

    return RunTrace(
        f=np.array(fs),
        gnorm=np.array(gnorms),
        alpha=np.array(alphas),
        branch=branches,
        iterations=len(alphas),
        termination=termination,
        gradients=grads,
        x_final=x,
    )


def eigencomponents(trace: RunTrace, p: QuadraticProblem) -> np.ndarray:
    """Gradient components along the eigenvectors, one row per iterate.

    Only meaningful for diagonal problems, where the coordinate basis is
    the eigenbasis; requires a gradient-retaining trace.
    """
    if p.kind != "diag":
        raise ValueError("eigencomponents require a diagonal problem")
    if trace.gradients is None:
        raise ValueError("trace did not retain gradients")
    return np.asarray(trace.gradients)


def stepsize_history_diagnostic(
    trace: RunTrace, p: QuadraticProblem
) -> list[tuple[int, float, float]]:
    """Series (k, quotient over normalized-gradient difference, quotient over
    sum) for consecutive retained gradient pairs; degenerate pairs emit NaN."""
    if trace.gradients is None or len(trace.gradients) < 2:
        return []
    out = []
    for k in range(2, len(trace.gradients) + 1):
        g_prev, g_cur = trace.gradients[k - 2], trace.gradients[k - 1]
        try:
            bar = bar_alpha_direct(g_prev, g_cur, p)
        except StepsizeUndefinedError:
            bar = math.nan
        try:
            hat = hat_alpha_direct(g_prev, g_cur, p)
        except StepsizeUndefinedError:
            hat = math.nan
        out.append((k, bar, hat))
    return out
