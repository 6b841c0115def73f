"""Stepsize formulas for gradient methods, as pure functions of a rolling memory.

Every rule here is a pure function: identical inputs give identical
outputs, and degenerate inputs raise ``StepsizeUndefinedError`` instead of
silently substituting a fallback. Policy (what to do when a rule is
undefined or negative) belongs to the solver engines, not to this module.

Denominator checks compare against exact 0.0 on purpose: the engines
already branch on the sign of the returned value, and an epsilon here
would silently change method behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import QuadraticProblem

__all__ = [
    "StepsizeUndefinedError",
    "StepsizeMemory",
    "sd_stepsize",
    "aopt_stepsize",
    "bb_stepsizes",
    "yuan_stepsize",
    "bar_alpha_direct",
    "hat_alpha_direct",
    "modified_y",
    "bar_bb_stepsizes",
    "p_stepsize",
    "bar_alpha_general",
]


class StepsizeUndefinedError(ValueError):
    """A stepsize rule was queried with degenerate or insufficient data."""


@dataclass
class StepsizeMemory:
    """Rolling per-run state feeding the memory-based stepsize rules.

    ``push`` advances the memory by one iterate. With the newest gradient
    g_k stored in ``g_cur``, the fields hold: the previous gradient and
    the step/gradient differences s_{k-1}, y_{k-1}, the masked difference
    ybar_{k-1}, the last two stepsizes actually taken, gradient norms at
    k, k-1, k-2, and the masked-difference BB pair for the two most
    recent (s, y) records. A memory instance belongs to exactly one
    solver run.
    """

    g_prev: np.ndarray | None = None
    g_cur: np.ndarray | None = None
    s_prev: np.ndarray | None = None
    y_prev: np.ndarray | None = None
    ybar_prev: np.ndarray | None = None
    alpha_prev: float | None = None
    alpha_prev2: float | None = None
    sd_prev: float | None = None
    baralpha_prev: float | None = None
    gnorm_cur: float | None = None
    gnorm_prev: float | None = None
    gnorm_prev2: float | None = None
    barbb1_cur: float | None = field(default=None, repr=False)
    barbb2_cur: float | None = field(default=None, repr=False)
    barbb1_prev: float | None = field(default=None, repr=False)
    barbb2_prev: float | None = field(default=None, repr=False)

    @property
    def warm(self) -> bool:
        """Two iterates seen: s/y differences exist."""
        return self.g_prev is not None

    @property
    def retard_ready(self) -> bool:
        """Enough history for the retarded general rule (three iterates)."""
        return (
            self.gnorm_prev2 is not None
            and self.alpha_prev2 is not None
            and self.barbb1_prev is not None
        )

    def start(self, g1: np.ndarray) -> None:
        """Record the first gradient; memory stays cold until the next push."""
        self.g_cur = np.asarray(g1, dtype=np.float64)
        self.gnorm_cur = float(np.linalg.norm(self.g_cur))

    def push(
        self,
        g_new: np.ndarray,
        s_new: np.ndarray,
        alpha_used: float,
        sd_cur: float | None = None,
        baralpha: float | None = None,
    ) -> None:
        """Advance by one iterate: shift the window and ingest g_k, s_{k-1}.

        ``alpha_used`` is the stepsize that produced s_new; ``sd_cur`` and
        ``baralpha`` optionally record the exact-line-search stepsize and
        the spectral estimate computed at the previous iterate (quadratic
        track only).
        """
        if self.g_cur is None:
            raise StepsizeUndefinedError("push before start: no initial gradient")
        g_new = np.asarray(g_new, dtype=np.float64)
        s_new = np.asarray(s_new, dtype=np.float64)

        self.g_prev = self.g_cur
        self.gnorm_prev2 = self.gnorm_prev
        self.gnorm_prev = self.gnorm_cur
        self.alpha_prev2 = self.alpha_prev
        self.alpha_prev = float(alpha_used)
        self.sd_prev = sd_cur
        self.baralpha_prev = baralpha
        self.barbb1_prev = self.barbb1_cur
        self.barbb2_prev = self.barbb2_cur

        self.g_cur = g_new
        self.gnorm_cur = float(np.linalg.norm(g_new))
        self.s_prev = s_new
        self.y_prev = g_new - self.g_prev
        self.ybar_prev = modified_y(s_new, self.y_prev)

        sty = float(self.s_prev @ self.ybar_prev)
        yty = float(self.ybar_prev @ self.ybar_prev)
        self.barbb1_cur = float(self.s_prev @ self.s_prev) / sty if sty != 0.0 else None
        self.barbb2_cur = sty / yty if yty != 0.0 else None


def sd_stepsize(g: np.ndarray, p: QuadraticProblem) -> float:
    """Exact line-search (Cauchy) stepsize g'g / g'Ag."""
    gg = float(g @ g)
    if gg == 0.0:
        raise StepsizeUndefinedError("zero gradient")
    return gg / float(g @ p.apply(g))


def aopt_stepsize(g: np.ndarray, p: QuadraticProblem) -> float:
    """Norm-quotient stepsize ||g|| / ||Ag||, at most the Cauchy stepsize."""
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        raise StepsizeUndefinedError("zero gradient")
    return gn / float(np.linalg.norm(p.apply(g)))


def bb_stepsizes(mem: StepsizeMemory) -> tuple[float, float]:
    """Barzilai-Borwein pair (s's/s'y, s'y/y'y) from the last step."""
    if not mem.warm:
        raise StepsizeUndefinedError("memory cold: no step recorded")
    s, y = mem.s_prev, mem.y_prev
    sty = float(s @ y)
    yty = float(y @ y)
    if yty == 0.0:
        raise StepsizeUndefinedError("zero gradient difference: both BB stepsizes undefined")
    if sty == 0.0:
        raise StepsizeUndefinedError("s'y = 0: first BB stepsize undefined")
    return float(s @ s) / sty, sty / yty


def yuan_stepsize(sd_prev: float, sd_cur: float, gnorm_prev: float, gnorm_cur: float) -> float:
    """Two-point stepsize forcing finite termination on 2-D quadratics.

    All arguments must be strictly positive: the two most recent Cauchy
    stepsizes and gradient norms.
    """
    if min(sd_prev, sd_cur, gnorm_prev, gnorm_cur) <= 0.0:
        raise StepsizeUndefinedError("yuan_stepsize needs strictly positive inputs")
    a = 1.0 / sd_prev
    c = 1.0 / sd_cur
    root = math.sqrt((a - c) ** 2 + 4.0 * gnorm_cur**2 / (sd_prev * gnorm_prev) ** 2)
    return 2.0 / (root + a + c)


def _quotient_over(d: np.ndarray, p: QuadraticProblem) -> float:
    dd = float(d @ d)
    if dd == 0.0:
        raise StepsizeUndefinedError("degenerate direction: normalized gradients cancel")
    dAd = float(d @ p.apply(d))
    if dAd == 0.0:
        raise StepsizeUndefinedError("degenerate curvature: d'Ad = 0")
    return dd / dAd


def bar_alpha_direct(g_prev: np.ndarray, g_cur: np.ndarray, p: QuadraticProblem) -> float:
    """Rayleigh quotient of the normalized-gradient difference.

    d = g_prev/||g_prev|| - g_cur/||g_cur||; returns d'd / d'Ad, which
    lies in [1/lambda_max, 1/lambda_min] for SPD A and tracks the inverse
    of the largest eigenvalue along norm-quotient trajectories.
    """
    np_prev = float(np.linalg.norm(g_prev))
    np_cur = float(np.linalg.norm(g_cur))
    if np_prev == 0.0 or np_cur == 0.0:
        raise StepsizeUndefinedError("zero gradient")
    return _quotient_over(g_prev / np_prev - g_cur / np_cur, p)


def hat_alpha_direct(g_prev: np.ndarray, g_cur: np.ndarray, p: QuadraticProblem) -> float:
    """Companion quotient over the normalized-gradient sum (diagnostic only)."""
    np_prev = float(np.linalg.norm(g_prev))
    np_cur = float(np.linalg.norm(g_cur))
    if np_prev == 0.0 or np_cur == 0.0:
        raise StepsizeUndefinedError("zero gradient")
    return _quotient_over(g_prev / np_prev + g_cur / np_cur, p)


def modified_y(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient difference masked to the coordinates that actually moved."""
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError("s and y must have equal length")
    return np.where(s == 0.0, 0.0, y)


def bar_bb_stepsizes(s: np.ndarray, ybar: np.ndarray) -> tuple[float, float]:
    """BB pair computed against a masked gradient difference.

    The first value coincides with the unmasked BB1 (masked coordinates
    contribute nothing to s'y); only the second changes under masking.
    """
    sty = float(s @ ybar)
    yty = float(ybar @ ybar)
    if yty == 0.0:
        raise StepsizeUndefinedError("masked difference is zero: pair undefined")
    if sty == 0.0:
        raise StepsizeUndefinedError("s'ybar = 0: first stepsize undefined")
    return float(s @ s) / sty, sty / yty


def p_stepsize(mem: StepsizeMemory, use_modified_y: bool = False) -> float:
    """Norm-ratio stepsize ||s||/||y||, the geometric mean of the BB pair.

    With ``use_modified_y`` the masked difference replaces y, which is the
    form suited to bound-constrained runs where bound-locked coordinates
    should not pollute the curvature estimate.
    """
    if not mem.warm:
        raise StepsizeUndefinedError("memory cold: no step recorded")
    y = mem.ybar_prev if use_modified_y else mem.y_prev
    yn = float(np.linalg.norm(y))
    if yn == 0.0:
        raise StepsizeUndefinedError("zero gradient difference")
    return float(np.linalg.norm(mem.s_prev)) / yn


def bar_alpha_general(mem: StepsizeMemory) -> float:
    """Hessian-free reconstruction of the spectral quotient, one step retarded.

    Evaluates the rational expression that reproduces
    ``bar_alpha_direct(g_{k-2}, g_{k-1}, A)`` on exact quadratic
    trajectories, using only stored norms, stepsizes, and the masked BB
    pairs. For general nonlinear data the value may be negative or
    ill-conditioned; callers must branch on its sign.
    """
    if not mem.retard_ready:
        raise StepsizeUndefinedError("memory cold: retarded rule needs three iterates")
    if mem.barbb1_cur is None or mem.barbb2_prev is None:
        raise StepsizeUndefinedError("undefined: BB pair unavailable")
    b1p = mem.barbb1_prev
    b2p = mem.barbb2_prev
    b1c = mem.barbb1_cur
    if b1p == 0.0 or b2p == 0.0 or b1c == 0.0 or mem.gnorm_prev == 0.0:
        raise StepsizeUndefinedError("undefined: zero denominator")
    ratio = mem.gnorm_prev2 / mem.gnorm_prev
    num = 2.0 - 2.0 * ratio * (b1p - mem.alpha_prev2) / b1p
    den = 1.0 / b1p + 1.0 / b1c - 2.0 * ratio * (b2p - mem.alpha_prev2) / (b1p * b2p)
    if den == 0.0:
        raise StepsizeUndefinedError("undefined: zero denominator")
    return num / den
