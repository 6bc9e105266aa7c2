"""Cumulative-prospect-theory evaluation of finite lotteries.

A decision maker is described by a reference point, a value function that is
zero at the reference and strictly increasing, and two probability weighting
functions (one applied to gains, one to losses).  A lottery is a finite list
of (probability, outcome) pairs whose probabilities sum to one.  The CPT
value of a lottery is a rank-weighted sum: outcomes are sorted from best to
worst, cumulative probabilities are passed through the weighting functions,
and consecutive differences of the weighted cumulatives multiply the value
of each outcome.

Everything in this module is immutable and side-effect free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

PROB_SUM_TOL = 1e-9

__all__ = [
    "PROB_SUM_TOL",
    "WeightingFunction",
    "identity_weighting",
    "prelec_weighting",
    "tabulated_weighting",
    "ValueFunction",
    "identity_value",
    "piecewise_power_value",
    "CptPreferences",
    "eut_preferences",
    "Lottery",
    "RegretTriples",
    "evaluate_weight",
    "rank_outcomes",
    "decision_weights",
    "cpt_value",
    "cpt_regret",
    "preferences_to_dict",
    "preferences_from_dict",
]


# ---------------------------------------------------------------------------
# probability weighting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightingFunction:
    """Strictly increasing map of [0, 1] onto itself with w(0)=0, w(1)=1.

    Kinds:
      * ``identity``   w(p) = p
      * ``prelec``     w(p) = exp(-(-ln p)**gamma) with gamma > 0
      * ``tabulated``  linear interpolation of a strictly monotone grid
    """

    kind: str
    gamma: float | None = None
    grid: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == "identity":
            return
        if self.kind == "prelec":
            if self.gamma is None or not np.isfinite(self.gamma) or self.gamma <= 0:
                raise ValueError("prelec weighting needs gamma > 0")
            return
        if self.kind == "tabulated":
            if not self.grid or len(self.grid) < 2:
                raise ValueError("tabulated weighting needs at least two grid points")
            ps = np.array([p for p, _ in self.grid], dtype=float)
            ws = np.array([w for _, w in self.grid], dtype=float)
            if ps[0] != 0.0 or ps[-1] != 1.0 or ws[0] != 0.0 or ws[-1] != 1.0:
                raise ValueError("tabulated weighting endpoints must be (0,0) and (1,1)")
            if np.any(np.diff(ps) <= 0) or np.any(np.diff(ws) <= 0):
                raise ValueError("tabulated weighting must be strictly increasing")
            return
        raise ValueError(f"unknown weighting kind {self.kind!r}")

    def __call__(self, p):
        """Evaluate the weight at a scalar or array of probabilities."""
        arr = np.asarray(p, dtype=float)
        if self.kind == "identity":
            out = arr.copy()
        elif self.kind == "prelec":
            out = np.zeros_like(arr)
            inner = (arr > 0.0) & (arr < 1.0)
            out[inner] = np.exp(-((-np.log(arr[inner])) ** self.gamma))
            out[arr == 1.0] = 1.0
        else:
            ps = np.array([q for q, _ in self.grid])
            ws = np.array([w for _, w in self.grid])
            out = np.interp(arr, ps, ws)
        return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def identity_weighting() -> WeightingFunction:
    return WeightingFunction("identity")


def prelec_weighting(gamma: float) -> WeightingFunction:
    return WeightingFunction("prelec", gamma=float(gamma))


def tabulated_weighting(points: Sequence[tuple[float, float]]) -> WeightingFunction:
    return WeightingFunction("tabulated", grid=tuple((float(p), float(w)) for p, w in points))


def evaluate_weight(w: WeightingFunction, p: float) -> float:
    """Evaluate ``w`` at probability ``p``, rejecting out-of-domain input."""
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability {p} outside [0, 1]")
    return float(w(p))


# ---------------------------------------------------------------------------
# outcome valuation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValueFunction:
    """Reference-dependent valuation of payoffs, zero at the reference.

    ``identity`` maps z to z - reference.  ``piecewise_power`` raises gains
    to ``alpha``, losses to ``beta`` scaled by ``loss_aversion``:

        v(z) = (z - r)**alpha          for z >= r
        v(z) = -L * (r - z)**beta      for z <  r
    """

    reference: float
    kind: str = "identity"
    alpha: float | None = None
    beta: float | None = None
    loss_aversion: float | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.reference):
            raise ValueError("reference point must be finite")
        if self.kind == "identity":
            return
        if self.kind != "piecewise_power":
            raise ValueError(f"unknown value kind {self.kind!r}")
        for name, lo, hi in (("alpha", 0.0, 1.0), ("beta", 0.0, 1.0)):
            x = getattr(self, name)
            if x is None or not (lo < x <= hi):
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.loss_aversion is None or self.loss_aversion < 1.0:
            raise ValueError("loss_aversion must be >= 1")
        # Monotonicity is analytic for these parameters; the sampled check
        # guards against future kinds and parameter regressions.
        zs = self.reference + np.linspace(-5.0, 5.0, 41)
        vs = self(zs)
        if np.any(np.diff(vs) <= 0):
            raise ValueError("value function is not strictly increasing")

    def __call__(self, z):
        arr = np.asarray(z, dtype=float)
        d = arr - self.reference
        if self.kind == "identity":
            out = d
        else:
            out = np.where(
                d >= 0.0,
                np.abs(d) ** self.alpha,
                -self.loss_aversion * np.abs(d) ** self.beta,
            )
        return float(out) if np.isscalar(z) or arr.ndim == 0 else out


def identity_value(reference: float = 0.0) -> ValueFunction:
    return ValueFunction(reference=float(reference), kind="identity")


def piecewise_power_value(
    reference: float, alpha: float, beta: float, loss_aversion: float
) -> ValueFunction:
    return ValueFunction(
        reference=float(reference),
        kind="piecewise_power",
        alpha=float(alpha),
        beta=float(beta),
        loss_aversion=float(loss_aversion),
    )


@dataclass(frozen=True)
class CptPreferences:
    """Bundle of value function and gain/loss weighting functions."""

    value: ValueFunction
    weight_gain: WeightingFunction
    weight_loss: WeightingFunction

    @property
    def reference(self) -> float:
        return self.value.reference

    @property
    def is_eut(self) -> bool:
        """True when CPT degenerates to plain expected value of z - r."""
        return (
            self.value.kind == "identity"
            and self.weight_gain.kind == "identity"
            and self.weight_loss.kind == "identity"
        )


def eut_preferences(reference: float = 0.0) -> CptPreferences:
    """Expected-utility special case: identity value and weights."""
    return CptPreferences(identity_value(reference), identity_weighting(), identity_weighting())


# ---------------------------------------------------------------------------
# lotteries
# ---------------------------------------------------------------------------


def _as_probabilities(probs, label: str) -> np.ndarray:
    p = np.asarray(probs, dtype=float).copy()
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{label} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{label} must be finite")
    if np.any(p < -PROB_SUM_TOL) or np.any(p > 1.0 + PROB_SUM_TOL):
        raise ValueError(f"{label} entries must lie in [0, 1]")
    np.clip(p, 0.0, 1.0, out=p)
    # exactly rounded summation keeps the acceptance decision independent of
    # the entry order; entries are stored as given and the off-by-epsilon
    # mass is normalized away inside the cumulative evaluation
    s = math.fsum(p)
    if abs(s - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"{label} must sum to 1 (got {s!r})")
    return p


@dataclass(frozen=True)
class Lottery:
    """Exhaustive finite lottery: probabilities and real outcomes.

    Zero-probability entries and repeated outcomes are allowed.  The
    probability vector must sum to one within ``PROB_SUM_TOL``; entries are
    stored as given and any sub-tolerance mass deviation is normalized away
    during evaluation.
    """

    probs: np.ndarray
    outcomes: np.ndarray

    def __init__(self, probs, outcomes):
        p = _as_probabilities(probs, "lottery probabilities")
        z = np.asarray(outcomes, dtype=float)
        if z.shape != p.shape:
            raise ValueError("probabilities and outcomes must have equal length")
        if not np.all(np.isfinite(z)):
            raise ValueError("outcomes must be finite")
        p.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "outcomes", z)

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[float, float]]) -> "Lottery":
        return cls([p for p, _ in entries], [z for _, z in entries])

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class RegretTriples:
    """Shared probabilities with counterfactual and realized outcomes."""

    probs: np.ndarray
    counterfactual: np.ndarray
    realized: np.ndarray

    def __init__(self, probs, counterfactual, realized):
        p = _as_probabilities(probs, "regret probabilities")
        zc = np.asarray(counterfactual, dtype=float)
        zr = np.asarray(realized, dtype=float)
        if zc.shape != p.shape or zr.shape != p.shape:
            raise ValueError("outcome vectors must match the probability vector")
        if not (np.all(np.isfinite(zc)) and np.all(np.isfinite(zr))):
            raise ValueError("outcomes must be finite")
        for a in (p, zc, zr):
            a.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "counterfactual", zc)
        object.__setattr__(self, "realized", zr)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def rank_outcomes(lottery: Lottery) -> np.ndarray:
    """Indices sorting outcomes from largest to smallest.

    Ties keep ascending original order, so runs are reproducible; the CPT
    value does not depend on how ties are broken.
    """
    return np.argsort(-lottery.outcomes, kind="stable")


def _block_cumulative(p: np.ndarray, z: np.ndarray, total: float) -> np.ndarray:
    """Cumulative probabilities with order-canonical tie-block boundaries.

    Weighting functions may have unbounded slope at the endpoints, so a
    one-ulp difference in a cumulative sum (tied outcomes added in a
    different order, a padded zero entry, or a probability vector off one
    ulp from mass one) would otherwise leak into the value.  Block
    boundaries use exactly rounded sums divided by the exactly rounded
    total mass, which pins them to identical floats for every permutation
    and padding and makes a full-mass cumulative exactly one.  Entries
    inside a block keep a running sum, whose evaluation cancels when the
    block telescopes.
    """
    cum = np.cumsum(p)
    start = 0.0
    i = 0
    t = p.size
    while i < t:
        j = i + 1
        while j < t and z[j] == z[i]:
            j += 1
        end = start + math.fsum(p[i:j])
        if j - i > 1:
            cum[i : j - 1] = start + np.cumsum(p[i : j - 1])
        cum[j - 1] = end
        start = end
        i = j
    return np.clip(cum / total, 0.0, 1.0)


def decision_weights(lottery: Lottery, prefs: CptPreferences) -> tuple[np.ndarray, int]:
    """Rank-dependent decision weights along the best-to-worst ordering.

    Returns ``(pi, split)`` where ``pi[j]`` weights the j-th best outcome and
    ``split`` is the number of gain entries (outcomes >= reference count as
    gains).  Gains take differences of the gain-weighted cumulative from the
    top; losses take differences of the loss-weighted cumulative from the
    bottom.  With identity weighting the weights are exactly the sorted
    probabilities.
    """
    order = rank_outcomes(lottery)
    p = lottery.probs[order]
    z = lottery.outcomes[order]
    split = int(np.count_nonzero(z >= prefs.reference))
    t = p.size
    total = math.fsum(p)
    pi = np.empty(t, dtype=float)

    if split > 0:
        if prefs.weight_gain.kind == "identity":
            pi[:split] = p[:split]
        else:
            cum = _block_cumulative(p[:split], z[:split], total)
            w = prefs.weight_gain(cum)
            pi[:split] = np.diff(np.concatenate(([0.0], w)))
    if split < t:
        if prefs.weight_loss.kind == "identity":
            pi[split:] = p[split:]
        else:
            tail = _block_cumulative(p[split:][::-1], z[split:][::-1], total)[::-1]
            w = prefs.weight_loss(tail)
            pi[split:] = w - np.concatenate((w[1:], [0.0]))
    # weighting functions are increasing, so weights are nonnegative up to
    # rounding of the cumulative sums
    np.clip(pi, 0.0, None, out=pi)
    return pi, split


def cpt_value(lottery: Lottery, prefs: CptPreferences) -> float:
    """CPT value of a lottery: decision weights times outcome values."""
    order = rank_outcomes(lottery)
    pi, _ = decision_weights(lottery, prefs)
    values = prefs.value(lottery.outcomes[order])
    return float(np.dot(pi, values))


def cpt_regret(triples: RegretTriples, prefs: CptPreferences) -> float:
    """CPT value of the counterfactual lottery minus that of the realized one."""
    hypothetical = cpt_value(Lottery(triples.probs, triples.counterfactual), prefs)
    actual = cpt_value(Lottery(triples.probs, triples.realized), prefs)
    return hypothetical - actual


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _weighting_to_dict(w: WeightingFunction) -> dict:
    if w.kind == "identity":
        return {"kind": "identity"}
    if w.kind == "prelec":
        return {"kind": "prelec", "gamma": w.gamma}
    return {"kind": "tabulated", "points": [list(pt) for pt in w.grid]}


def _weighting_from_dict(d: dict) -> WeightingFunction:
    kind = d["kind"]
    if kind == "identity":
        return identity_weighting()
    if kind == "prelec":
        return prelec_weighting(d["gamma"])
    if kind == "tabulated":
        return tabulated_weighting([tuple(pt) for pt in d["points"]])
    raise ValueError(f"unknown weighting kind {kind!r}")


def preferences_to_dict(prefs: CptPreferences) -> dict:
    """JSON form: {reference, value:{kind,...}, weight_gain:{...}, weight_loss:{...}}."""
    v = prefs.value
    if v.kind == "identity":
        value = {"kind": "identity"}
    else:
        value = {
            "kind": "piecewise-power",
            "alpha": v.alpha,
            "beta": v.beta,
            "loss_aversion": v.loss_aversion,
        }
    return {
        "reference": v.reference,
        "value": value,
        "weight_gain": _weighting_to_dict(prefs.weight_gain),
        "weight_loss": _weighting_to_dict(prefs.weight_loss),
    }


def preferences_from_dict(d: dict) -> CptPreferences:
    ref = float(d["reference"])
    v = d["value"]
    if v["kind"] == "identity":
        value = identity_value(ref)
    elif v["kind"] == "piecewise-power":
        value = piecewise_power_value(ref, v["alpha"], v["beta"], v["loss_aversion"])
    else:
        raise ValueError(f"unknown value kind {v['kind']!r}")
    return CptPreferences(
        value=value,
        weight_gain=_weighting_from_dict(d["weight_gain"]),
        weight_loss=_weighting_from_dict(d["weight_loss"]),
    )
