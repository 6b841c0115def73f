"""Projected gradient methods for bound-constrained minimization.

``solve_box`` implements a gradient projection method whose trial
stepsize cycles between h "long" iterations using a norm-ratio (or BB)
stepsize and s "short" iterations where that value is capped by a
Hessian-free spectral estimate reconstructed from the two most recent
steps. Steps along the projection arc d = P(x - alpha g) - x are accepted
by an adaptive nonmonotone line search built around a reference value
f_r: a unit step is taken whenever

    f(x + d) <= f_r + sigma g'd,

and otherwise the step length backtracks until

    f(x + lambda d) <= min(f_max, f_r) + sigma lambda g'd,

with f_max the worst objective over the last M accepted iterates. The
reference value is managed by ``update_reference``: an improvement over
the best value resets the scheme, while M consecutive non-improving
steps promote the worst recent candidate to become the new reference.

``solve_spg`` provides the classic spectral projected gradient baseline
(safeguarded BB1 stepsize, max-of-recent-values Armijo test) under the
same stopping rule, for benchmark comparisons.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .problem import BoxBounds, ObjectiveOracle
from .qp_engine import DivergedError, RunTrace
from .stepsize import (
    StepsizeMemory,
    StepsizeUndefinedError,
    bar_alpha_general,
    bar_bb_stepsizes,
    modified_y,
)

__all__ = [
    "BOX_VARIANTS",
    "LineSearchError",
    "LineSearchState",
    "BoxRunConfig",
    "direction",
    "nonmonotone_search",
    "update_reference",
    "solve_box",
    "solve_spg",
]

BOX_VARIANTS = ("A1", "A1_BB1", "A1_BB2", "SPG")

BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 50


class LineSearchError(RuntimeError):
    """Backtracking exhausted or no usable descent direction."""


@dataclass
class LineSearchState:
    """Adaptive reference-value bookkeeping for the nonmonotone search."""

    f_r: float
    f_best: float
    f_c: float
    L: int
    M: int
    sigma: float
    recent_f: deque = field(repr=False, default=None)

    @staticmethod
    def fresh(f1: float, M: int, sigma: float) -> "LineSearchState":
        state = LineSearchState(f_r=f1, f_best=f1, f_c=f1, L=0, M=M, sigma=sigma)
        state.recent_f = deque([f1], maxlen=M)
        return state

    @property
    def f_max(self) -> float:
        return max(self.recent_f)


def update_reference(ls: LineSearchState, f_new: float) -> LineSearchState:
    """Advance the reference scheme with the newly accepted value.

    Improvement on the best value resets the candidate and counter; after
    M consecutive non-improving steps the candidate (the worst value seen
    since the last improvement) becomes the new reference.
    """
    if f_new < ls.f_best:
        ls.f_best = f_new
        ls.f_c = f_new
        ls.L = 0
    else:
        ls.f_c = max(ls.f_c, f_new)
        ls.L += 1
        if ls.L == ls.M:
            ls.f_r = ls.f_c
            ls.f_c = f_new
            ls.L = 0
    ls.recent_f.append(f_new)
    return ls


def direction(x: np.ndarray, g: np.ndarray, alpha: float, bounds: BoxBounds) -> np.ndarray:
    """Projection-arc direction d = P(x - alpha g) - x."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return bounds.project(x - alpha * g) - x


def nonmonotone_search(
    oracle: ObjectiveOracle,
    x: np.ndarray,
    d: np.ndarray,
    g: np.ndarray,
    ls: LineSearchState,
) -> tuple[float, float, bool]:
    """Step length along d: unit step against f_r, else backtrack against
    min(f_max, f_r).

    Returns (lambda, f at the accepted point, whether the unit step was
    accepted).
    """
    gd = float(g @ d)
    if gd >= 0.0:
        raise ValueError("not a descent direction: g'd >= 0")
    f_trial = oracle.f(x + d)
    if f_trial <= ls.f_r + ls.sigma * gd:
        return 1.0, f_trial, True
    bound = min(ls.f_max, ls.f_r)
    lam = 1.0
    for _ in range(MAX_BACKTRACKS):
        lam *= BACKTRACK_FACTOR
        f_trial = oracle.f(x + lam * d)
        if f_trial <= bound + ls.sigma * lam * gd:
            return lam, f_trial, False
    raise LineSearchError(f"no acceptable step after {MAX_BACKTRACKS} backtracks")


@dataclass(frozen=True)
class BoxRunConfig:
    """Solver parameters for the bound-constrained runs."""

    alpha_min: float = 1e-30
    alpha_max: float = 1e30
    h: int = 10
    s: int = 4
    M: int = 8
    sigma: float = 1e-4
    eps_pg: float = 1e-6
    max_iter: int = 20000
    variant: str = "A1"
    retard_spectral: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")
        if self.h < 1 or self.s < 1 or self.M < 1:
            raise ValueError("h, s, M must be positive")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        v = self.variant.upper().replace("-", "_")
        if v not in BOX_VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {BOX_VARIANTS}")
        object.__setattr__(self, "variant", v)


def _pg_norm(x: np.ndarray, g: np.ndarray, bounds: BoxBounds) -> float:
    return float(np.max(np.abs(bounds.project(x - g) - x))) if x.size else 0.0


def _initial_alpha(gnorm: float, cfg: BoxRunConfig) -> float:
    if gnorm == 0.0:
        return 1.0
    return max(cfg.alpha_min, min(1.0 / gnorm, cfg.alpha_max))


def solve_box(
    oracle: ObjectiveOracle,
    bounds: BoxBounds,
    x1: np.ndarray,
    cfg: BoxRunConfig,
) -> RunTrace:
    """Gradient projection with the adaptive nonmonotone line search.

    The trial stepsize for the next iteration is updated after each
    accepted step: when s'y > 0 the long phase takes the variant's
    stepsize (norm ratio over the masked gradient difference for A1, the
    masked BB pair for A1_BB1/A1_BB2) and the short phase caps it with
    the reconstructed spectral estimate when that estimate is positive,
    falling back to the short BB stepsize otherwise; when s'y <= 0 the
    next stepsize is 1/||g||. Stops when the projected gradient
    sup-norm reaches cfg.eps_pg.
    """
    if cfg.variant == "SPG":
        return solve_spg(oracle, bounds, x1, cfg)
    t0 = time.perf_counter()
    x = bounds.project(np.asarray(x1, dtype=np.float64))
    g = oracle.grad(x)
    fx = oracle.f(x)
    if not math.isfinite(fx):
        raise DivergedError("nonfinite objective at the starting point")
    gnorm = float(np.linalg.norm(g))

    ls = LineSearchState.fresh(fx, M=cfg.M, sigma=cfg.sigma)
    mem = StepsizeMemory()
    mem.start(g)
    alpha = _initial_alpha(gnorm, cfg)

    fs = [fx]
    gnorms = [gnorm]
    pgs = [_pg_norm(x, g, bounds)]
    alphas: list[float] = []
    branches: list[str] = []
    records: list[dict] = []
    prev_spectral: float | None = None

    k = 1
    termination = "iter_cap"
    while True:
        if pgs[-1] <= cfg.eps_pg:
            termination = "gradient_tol"
            break
        if k > cfg.max_iter:
            break

        d = direction(x, g, alpha, bounds)
        gd = float(g @ d)
        if gd >= 0.0:
            # alpha so small the arc collapsed numerically; retry once at 1/||g||
            alpha = _initial_alpha(float(np.linalg.norm(g)), cfg)
            d = direction(x, g, alpha, bounds)
            gd = float(g @ d)
            if gd >= 0.0:
                raise LineSearchError("projection arc yields no descent direction")

        rec = {"k": k, "alpha": alpha, "gd": gd, "f_r": ls.f_r, "f_max": ls.f_max, "sigma": ls.sigma}
        lam, f_new, unit = nonmonotone_search(oracle, x, d, g, ls)
        if not math.isfinite(f_new):
            raise DivergedError(f"nonfinite objective at iteration {k}")
        rec.update({"lam": lam, "f_new": f_new, "unit": unit})
        records.append(rec)

        x_new = x + lam * d
        g_new = oracle.grad(x_new)
        s = x_new - x
        y = g_new - g
        sty = float(s @ y)
        moved = bool(np.any(s))
        mem.push(g_new, s, alpha_used=alpha)

        spectral = None
        if cfg.retard_spectral or (moved and sty > 0.0 and k % (cfg.h + cfg.s) >= cfg.h):
            try:
                spectral = bar_alpha_general(mem)
            except StepsizeUndefinedError:
                spectral = None
        rec["spectral"] = spectral

        if moved and sty > 0.0:
            ybar = modified_y(s, y)
            bb1m, bb2m = bar_bb_stepsizes(s, ybar)
            if cfg.variant == "A1":
                long_next = float(np.linalg.norm(s)) / float(np.linalg.norm(ybar))
            elif cfg.variant == "A1_BB1":
                long_next = bb1m
            else:
                long_next = bb2m
            if k % (cfg.h + cfg.s) >= cfg.h:
                use = prev_spectral if cfg.retard_spectral else spectral
                if use is not None and math.isfinite(use) and use > 0.0:
                    tilde = min(use, long_next)
                    label = "short_min"
                else:
                    tilde = bb2m
                    label = "short_bb2"
            else:
                tilde = long_next
                label = "long"
            alpha = max(cfg.alpha_min, min(tilde, cfg.alpha_max))
        else:
            gn_new = float(np.linalg.norm(g_new))
            alpha = 1.0 / gn_new if gn_new > 0.0 else 1.0
            label = "sy_nonpos"
        prev_spectral = spectral

        update_reference(ls, f_new)
        x, g, fx = x_new, g_new, f_new
        alphas.append(rec["alpha"])
        branches.append(label)
        fs.append(fx)
        gnorms.append(float(np.linalg.norm(g)))
        pgs.append(_pg_norm(x, g, bounds))
        k += 1

    return RunTrace(
        f=np.array(fs),
        gnorm=np.array(gnorms),
        alpha=np.array(alphas),
        branch=branches,
        iterations=len(alphas),
        termination=termination,
        func_evals=oracle.eval_count,
        grad_evals=oracle.grad_count,
        cpu_seconds=time.perf_counter() - t0,
        pg_inf=np.array(pgs),
        ls_records=records,
        x_final=x,
    )


def solve_spg(
    oracle: ObjectiveOracle,
    bounds: BoxBounds,
    x1: np.ndarray,
    cfg: BoxRunConfig,
) -> RunTrace:
    """Spectral projected gradient baseline.

    Safeguarded BB1 stepsize on the projection arc with a nonmonotone
    Armijo test against the maximum objective over the last M accepted
    iterates; same stopping rule as solve_box.
    """
    t0 = time.perf_counter()
    x = bounds.project(np.asarray(x1, dtype=np.float64))
    g = oracle.grad(x)
    fx = oracle.f(x)
    if not math.isfinite(fx):
        raise DivergedError("nonfinite objective at the starting point")

    fs = [fx]
    gnorms = [float(np.linalg.norm(g))]
    pgs = [_pg_norm(x, g, bounds)]
    alphas: list[float] = []
    branches: list[str] = []
    records: list[dict] = []
    fhist = deque([fx], maxlen=cfg.M)

    pg1 = pgs[0]
    alpha = max(cfg.alpha_min, min(1.0 / pg1 if pg1 > 0.0 else 1.0, cfg.alpha_max))

    k = 1
    termination = "iter_cap"
    while True:
        if pgs[-1] <= cfg.eps_pg:
            termination = "gradient_tol"
            break
        if k > cfg.max_iter:
            break

        d = direction(x, g, alpha, bounds)
        gd = float(g @ d)
        if gd >= 0.0:
            raise LineSearchError("projection arc yields no descent direction")
        f_max = max(fhist)
        rec = {"k": k, "alpha": alpha, "gd": gd, "f_r": math.inf, "f_max": f_max, "sigma": cfg.sigma}

        lam = 1.0
        f_new = oracle.f(x + d)
        unit = True
        backtracks = 0
        while f_new > f_max + cfg.sigma * lam * gd:
            backtracks += 1
            if backtracks > MAX_BACKTRACKS:
                raise LineSearchError(f"no acceptable step after {MAX_BACKTRACKS} backtracks")
            lam *= BACKTRACK_FACTOR
            unit = False
            f_new = oracle.f(x + lam * d)
        if not math.isfinite(f_new):
            raise DivergedError(f"nonfinite objective at iteration {k}")
        rec.update({"lam": lam, "f_new": f_new, "unit": unit})
        records.append(rec)

        x_new = x + lam * d
        g_new = oracle.grad(x_new)
        s = x_new - x
        y = g_new - g
        sty = float(s @ y)
        if sty > 0.0:
            alpha = max(cfg.alpha_min, min(float(s @ s) / sty, cfg.alpha_max))
            label = "bb"
        else:
            alpha = cfg.alpha_max
            label = "sy_nonpos"

        fhist.append(f_new)
        x, g, fx = x_new, g_new, f_new
        alphas.append(rec["alpha"])
        branches.append(label)
        fs.append(fx)
        gnorms.append(float(np.linalg.norm(g)))
        pgs.append(_pg_norm(x, g, bounds))
        k += 1

    return RunTrace(
        f=np.array(fs),
        gnorm=np.array(gnorms),
        alpha=np.array(alphas),
        branch=branches,
        iterations=len(alphas),
        termination=termination,
        func_evals=oracle.eval_count,
        grad_evals=oracle.grad_count,
        cpu_seconds=time.perf_counter() - t0,
        pg_inf=np.array(pgs),
        ls_records=records,
        x_final=x,
    )
