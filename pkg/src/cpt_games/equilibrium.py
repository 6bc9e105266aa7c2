"""Equilibrium membership checks for games with CPT preferences.

Three membership notions are decided here:

* correlated: after being told her action by a mediator drawing from the
  joint distribution, no player gains CPT value by deviating;
* Nash: a product distribution where every supported action of every
  player attains the maximal CPT value against the others' mix;
* mediated: every supported conditional lies in the convex hull of the
  per-action acceptance region, decided through a sampled inner
  approximation of the region plus a linear feasibility check.

The acceptance region of (player, action) is the set of opponent mixes
against which that action is weakly preferred to every deviation.  The
exact region is not polyhedral under CPT, so ``sample_region`` enumerates
a simplex grid; a target that itself passes the exact region test is
always added as its own hull witness, which keeps every correlated member
a mediated member at the same tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cpt import cpt_value
from .games import (
    Game,
    JointDistribution,
    OpponentDistribution,
    ProductDistribution,
    conditional,
    induced_lottery,
    marginal,
)
from .simplex import hull_residual

DEFAULT_TOL = 1e-9
DEFAULT_HULL_TOL = 1e-6
DEFAULT_GRID = 24

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_HULL_TOL",
    "DEFAULT_GRID",
    "Certificate",
    "action_values",
    "best_reaction",
    "region_membership",
    "check_correlated_eq",
    "check_nash",
    "simplex_grid",
    "sample_region",
    "hull_membership",
    "check_mediated_eq",
    "mediated_hull_distance",
    "default_grid_resolution",
]


@dataclass(frozen=True)
class Certificate:
    """Outcome of a membership check.

    ``margin`` is the minimum slack of the binding inequality, measured in
    CPT-value units for region checks and as the negated sup-norm
    reconstruction residual for hull checks.  ``witness`` identifies either
    the most violated inequality or the convex combination certifying hull
    membership.  ``meta`` carries check parameters such as the grid
    resolution attached to sampled non-member verdicts.
    """

    member: bool
    margin: float
    witness: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": "member" if self.member else "non-member",
            "margin": self.margin,
            "witness": self.witness,
            "meta": self.meta,
        }


def action_values(game: Game, i: int, pi: OpponentDistribution) -> np.ndarray:
    """CPT value of every action of player i against the opponent mix."""
    return np.array(
        [
            cpt_value(induced_lottery(game, i, pi, a), game.prefs[i])
            for a in range(game.num_actions(i))
        ]
    )


def best_reaction(game: Game, i: int, pi: OpponentDistribution) -> int:
    """Action with maximal CPT value; ties go to the lowest action index."""
    return int(np.argmax(action_values(game, i, pi)))


def region_membership(
    game: Game,
    i: int,
    a_i: int,
    dev: int,
    pi: OpponentDistribution,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """Is ``a_i`` weakly preferred to ``dev`` against ``pi``?

    Returns (member, margin) with margin = V(a_i) - V(dev); membership
    means margin >= -tol.
    """
    v_keep = cpt_value(induced_lottery(game, i, pi, a_i), game.prefs[i])
    v_dev = cpt_value(induced_lottery(game, i, pi, dev), game.prefs[i])
    margin = v_keep - v_dev
    return margin >= -tol, margin


def _region_margin(game: Game, i: int, a_i: int, pi: OpponentDistribution) -> float:
    """Worst slack of keeping a_i over all deviations (negative = violated)."""
    values = action_values(game, i, pi)
    return float(values[a_i] - values.max())


def check_correlated_eq(
    game: Game, mu: JointDistribution, tol: float = DEFAULT_TOL
) -> Certificate:
    """Membership of a joint distribution in the correlated-equilibrium set."""
    if mu.shape != game.shape:
        raise ValueError("distribution shape does not match the game")
    worst = np.inf
    worst_tuple = None
    for i in range(game.n):
        m = marginal(mu, i)
        for a_i in range(game.num_actions(i)):
            if m[a_i] <= 0.0:
                continue
            pi = conditional(mu, i, a_i)
            values = action_values(game, i, pi)
            for dev in range(game.num_actions(i)):
                if dev == a_i:
                    continue
                margin = float(values[a_i] - values[dev])
                if margin < worst:
                    worst = margin
                    worst_tuple = (i, a_i, dev)
    if worst_tuple is None:
        # single-action players everywhere; vacuously a member
        return Certificate(True, np.inf, {"kind": "none"})
    member = worst >= -tol
    witness: dict = {"kind": "none"}
    if not member:
        witness = {
            "kind": "violation",
            "player": worst_tuple[0],
            "action": worst_tuple[1],
            "deviation": worst_tuple[2],
        }
    return Certificate(member, worst, witness, {"check": "correlated", "tol": tol})


def check_nash(
    game: Game, mu: ProductDistribution, tol: float = DEFAULT_TOL
) -> Certificate:
    """Membership of a product distribution in the CPT Nash set.

    Every supported action of every player must attain the maximum CPT
    value against the others' mix; because the averaged value of a mixed
    deviation is linear in its weights, checking pure deviations suffices.
    """
    if not isinstance(mu, ProductDistribution):
        raise TypeError("check_nash requires a product-form distribution")
    if tuple(len(f) for f in mu.factors) != game.shape:
        raise ValueError("distribution shape does not match the game")
    worst = np.inf
    worst_tuple = None
    for i in range(game.n):
        pi = mu.opponent_mix(i)
        values = action_values(game, i, pi)
        top = values.max()
        for a_i in range(game.num_actions(i)):
            if mu.factors[i][a_i] <= 0.0:
                continue
            margin = float(values[a_i] - top)
            if margin < worst:
                worst = margin
                worst_tuple = (i, a_i, int(np.argmax(values)))
    member = worst >= -tol
    witness: dict = {"kind": "none"}
    if not member and worst_tuple is not None:
        witness = {
            "kind": "violation",
            "player": worst_tuple[0],
            "action": worst_tuple[1],
            "deviation": worst_tuple[2],
        }
    return Certificate(member, worst, witness, {"check": "nash", "tol": tol})


def simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All probability vectors of length ``dim`` with denominator ``resolution``.

    Rows are ordered lexicographically by the integer compositions, which
    fixes a deterministic enumeration.
    """
    if dim < 1 or resolution < 1:
        raise ValueError("need dim >= 1 and resolution >= 1")
    combos = itertools.combinations(range(resolution + dim - 1), dim - 1)
    out = np.empty((math.comb(resolution + dim - 1, dim - 1), dim), dtype=float)
    for r, cut in enumerate(combos):
        prev = -1
        for j, c in enumerate(cut):
            out[r, j] = c - prev - 1
            prev = c
        out[r, dim - 1] = resolution + dim - 2 - prev
    out /= float(resolution)
    return out


def default_grid_resolution(game: Game, i: int) -> int:
    """Default sampling resolution, scaled down with opponent-space size.

    Grid cardinality is C(resolution + d - 1, d - 1); the defaults keep it
    in the low thousands so checks stay interactive.
    """
    d = game.num_opponent_profiles(i)
    if d <= 4:
        return DEFAULT_GRID
    if d <= 8:
        return 6
    return 2


def sample_region(
    game: Game, i: int, a_i: int, resolution: int, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Grid points of the opponent simplex where ``a_i`` is weakly best.

    Returns the flat opponent-profile vectors (denominator ``resolution``)
    whose worst deviation slack is >= -tol, in deterministic grid order.
    """
    d = game.num_opponent_profiles(i)
    grid = simplex_grid(d, resolution)
    shape = game.opponent_shape(i)
    keep = []
    for row in grid:
        pi = OpponentDistribution(i, row.reshape(shape))
        if _region_margin(game, i, a_i, pi) >= -tol:
            keep.append(row)
    return np.array(keep).reshape(len(keep), d)


def hull_membership(
    target: OpponentDistribution | np.ndarray,
    points: np.ndarray,
    tol: float = DEFAULT_HULL_TOL,
) -> Certificate:
    """Can ``target`` be written as a convex combination of ``points``?

    Solved as a linear feasibility problem minimizing the sup-norm
    reconstruction error; the witness holds the combination weights and the
    points used.  An empty point list is an immediate non-member.
    """
    y = target.flat() if isinstance(target, OpponentDistribution) else np.asarray(target, float)
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return Certificate(False, -np.inf, {"kind": "hull", "theta": [], "points": []})
    residual, theta = hull_residual(pts, y)
    member = residual <= tol
    used = theta > 1e-12
    witness = {
        "kind": "hull",
        "theta": theta[used].tolist(),
        "points": pts[used].tolist(),
    }
    return Certificate(member, -residual, witness, {"check": "hull", "tol": tol})


def _hull_check_one(
    game: Game,
    i: int,
    a_i: int,
    pi: OpponentDistribution,
    resolution: int,
    tol: float,
    region_cache: dict | None,
) -> Certificate:
    """Hull membership of one conditional against its acceptance region."""
    # a conditional that passes the exact region test certifies itself
    if _region_margin(game, i, a_i, pi) >= -tol:
        return Certificate(
            True, 0.0, {"kind": "hull", "theta": [1.0], "points": [pi.flat().tolist()]}
        )
    key = (i, a_i)
    if region_cache is not None and key in region_cache:
        points = region_cache[key]
    else:
        points = sample_region(game, i, a_i, resolution, tol)
        if region_cache is not None:
            region_cache[key] = points
    return hull_membership(pi, points, tol)


def check_mediated_eq(
    game: Game,
    mu: JointDistribution,
    resolution: int | None = None,
    tol: float = DEFAULT_HULL_TOL,
    region_cache: dict | None = None,
) -> Certificate:
    """Grid-approximated membership in the mediated-equilibrium set.

    Every supported conditional of every player must lie in the convex
    hull of its sampled acceptance region.  Membership verdicts are sound
    up to the region tolerance; non-membership is relative to the grid
    resolution recorded in ``meta``.
    """
    if mu.shape != game.shape:
        raise ValueError("distribution shape does not match the game")
    worst = np.inf
    worst_key = None
    hulls = {}
    for i in range(game.n):
        m = marginal(mu, i)
        res = resolution if resolution is not None else default_grid_resolution(game, i)
        for a_i in range(game.num_actions(i)):
            if m[a_i] <= 0.0:
                continue
            pi = conditional(mu, i, a_i)
            cert = _hull_check_one(game, i, a_i, pi, res, tol, region_cache)
            hulls[f"{i}:{a_i}"] = cert.witness
            if cert.margin < worst:
                worst = cert.margin
                worst_key = (i, a_i)
    if worst_key is None:
        return Certificate(True, np.inf, {"kind": "none"})
    member = worst >= -tol
    witness: dict = {"kind": "mediated", "per_action": hulls}
    if not member:
        witness = {
            "kind": "violation",
            "player": worst_key[0],
            "action": worst_key[1],
            "deviation": None,
        }
    return Certificate(
        member,
        worst,
        witness,
        {"check": "mediated", "tol": tol, "resolution": resolution or "default"},
    )


def mediated_hull_distance(
    game: Game,
    mu: JointDistribution,
    resolution: int | None = None,
    tol: float = DEFAULT_HULL_TOL,
    players: list[int] | None = None,
    region_cache: dict | None = None,
) -> float:
    """Largest sup-norm hull residual over the supported conditionals.

    Zero for members of the sampled mediated set.  Restricting ``players``
    measures the per-player hull distance used by convergence diagnostics.
    """
    worst = 0.0
    for i in players if players is not None else range(game.n):
        m = marginal(mu, i)
        res = resolution if resolution is not None else default_grid_resolution(game, i)
        for a_i in range(game.num_actions(i)):
            if m[a_i] <= 0.0:
                continue
            pi = conditional(mu, i, a_i)
            cert = _hull_check_one(game, i, a_i, pi, res, tol, region_cache)
            worst = max(worst, -cert.margin)
    return worst
