"""Deterministic calibrated replay of a mediated equilibrium.

Given a mediated game with a pure strategy profile, this builds an explicit
T-step script per player: a signal sequence whose empirical law tracks the
mediator distribution (largest-deficit quota scheduling), the assessment
each player predicts on receiving her signal (the signal's induced
opponent-action distribution), and the action she plays (her pure strategy
at that signal).  By construction the assessments are calibrated and the
empirical distribution of play tracks the pushforward of the mediator.

Two different signals can induce the same assessment while prescribing
different actions; a single best-reaction rule cannot produce both.  The
repair substitutes, on geometrically growing occurrence blocks of the
colliding signal, nearby user-supplied points of the relevant acceptance
region, pairwise distinct from every other assessment in use.  Scores stay
small because the substitutes approach the original assessment; repair
points are caller-supplied because their existence rests on the region
having no isolated points, which is not checkable numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibration import ForecastRecord, calibration_score
from .equilibrium import _region_margin
from .games import Game, JointDistribution, OpponentDistribution
from .mediated import MediatedGame, RandomizedStrategyProfile, induced_action_distribution, signal_assessment

__all__ = [
    "AssessmentCollisionError",
    "ReplayScripts",
    "construct_calibrated_replay",
    "repair_block_starts",
]


class AssessmentCollisionError(RuntimeError):
    """Two signals share an assessment but prescribe different actions."""

    def __init__(self, player: int, signal_a: int, signal_b: int):
        self.player = player
        self.signal_a = signal_a
        self.signal_b = signal_b
        super().__init__(
            f"player {player}: signals {signal_a} and {signal_b} induce the same "
            "assessment but different actions; supply repair points"
        )


def repair_block_starts(occurrences: int) -> list[int]:
    """Occurrence indices starting each perturbation block (1-based).

    Block boundaries grow geometrically: each start is the smallest integer
    exceeding the block index times the previous start.
    """
    starts = [1]
    l = 1
    while starts[-1] <= occurrences:
        l += 1
        starts.append(l * starts[-1] + 1)
    return starts


@dataclass
class ReplayScripts:
    """Per-player deterministic scripts plus the replay report."""

    signals: np.ndarray  # (T, n) signal indices
    actions: np.ndarray  # (T, n) action indices
    assessments: list[list[np.ndarray]]  # per player, per step
    report: dict = field(default_factory=dict)


def _quota_schedule(psi: JointDistribution, T: int) -> np.ndarray:
    """Deterministic signal-profile sequence tracking ``psi``.

    Greedy largest-deficit scheduling; the empirical law after T steps is
    within |B|/T of the mediator distribution in the sup norm.
    """
    weights = psi.flat()
    support = np.flatnonzero(weights > 0.0)
    w = weights[support]
    counts = np.zeros(support.size)
    out = np.empty(T, dtype=np.int64)
    for t in range(1, T + 1):
        deficit = t * w - counts
        pick = int(np.argmax(deficit))
        counts[pick] += 1
        out[t - 1] = support[pick]
    return out


def _assessment_key(vec: np.ndarray) -> bytes:
    return np.round(np.asarray(vec, dtype=float), 12).tobytes()


def construct_calibrated_replay(
    mg: MediatedGame,
    sigma: RandomizedStrategyProfile,
    T: int,
    repair_points: dict[tuple[int, int], list] | None = None,
) -> ReplayScripts:
    """Emit calibrated assessment and action scripts realizing the mediator.

    ``repair_points[(player, signal)]`` lists opponent-mix vectors used to
    perturb that signal's assessment on successive occurrence blocks; they
    must lie in the acceptance region of the signal's action and be
    distinct from every other assessment.  A collision without repair
    points raises :class:`AssessmentCollisionError`.
    """
    if T < 1:
        raise ValueError("horizon must be >= 1")
    if not sigma.is_pure():
        raise ValueError("calibrated replay needs a pure strategy profile")
    game = mg.base
    n = game.n
    repair_points = repair_points or {}

    # supported signals, their assessments and pure actions
    assess: list[dict[int, np.ndarray]] = [dict() for _ in range(n)]
    act: list[dict[int, int]] = [dict() for _ in range(n)]
    for i in range(n):
        psi_i = mg.signal_marginal(i)
        for b in range(len(mg.signals[i])):
            if psi_i[b] <= 0.0:
                continue
            assess[i][b] = signal_assessment(mg, sigma, i, b).flat()
            act[i][b] = sigma.pure_action(i, b)

    # collision scan: group supported signals by assessment key
    repaired: list[dict[int, list[np.ndarray]]] = [dict() for _ in range(n)]
    used_keys: set[bytes] = set()
    for i in range(n):
        for b, vec in assess[i].items():
            used_keys.add(_assessment_key(vec))
    for i in range(n):
        groups: dict[bytes, list[int]] = {}
        for b in sorted(assess[i]):
            groups.setdefault(_assessment_key(assess[i][b]), []).append(b)
        for key, members in groups.items():
            actions_here = {act[i][b] for b in members}
            if len(actions_here) <= 1:
                continue
            # lowest signal keeps the original assessment; others need repair
            for b in members[1:]:
                pts = repair_points.get((i, b))
                if not pts:
                    raise AssessmentCollisionError(i, members[0], b)
                validated = []
                for p_idx, p in enumerate(pts):
                    vec = np.asarray(p, dtype=float).ravel()
                    pkey = _assessment_key(vec)
                    if pkey in used_keys:
                        raise ValueError(
                            f"repair point {p_idx} for player {i} signal {b} "
                            "coincides with an assessment already in use"
                        )
                    pi = OpponentDistribution(i, vec.reshape(game.opponent_shape(i)))
                    if _region_margin(game, i, act[i][b], pi) < -1e-9:
                        raise ValueError(
                            f"repair point {p_idx} for player {i} signal {b} "
                            "is outside the acceptance region of its action"
                        )
                    used_keys.add(pkey)
                    validated.append(vec)
                repaired[i][b] = validated

    schedule_flat = _quota_schedule(mg.mediator, T)
    signal_shape = mg.signal_shape
    profiles = np.array(np.unravel_index(schedule_flat, signal_shape)).T  # (T, n)

    actions = np.zeros((T, n), dtype=np.int64)
    assessments: list[list[np.ndarray]] = [[] for _ in range(n)]
    occurrence: list[dict[int, int]] = [dict() for _ in range(n)]
    for t in range(T):
        for i in range(n):
            b = int(profiles[t, i])
            actions[t, i] = act[i][b]
            k = occurrence[i].get(b, 0) + 1
            occurrence[i][b] = k
            if b in repaired[i]:
                starts = repair_block_starts(k)
                block = int(np.searchsorted(np.asarray(starts), k, side="right"))
                pts = repaired[i][b]
                assessments[i].append(pts[min(block, len(pts)) - 1])
            else:
                assessments[i].append(assess[i][b])

    # report: calibration scores, empirical deviations
    eta = induced_action_distribution(mg, sigma)
    counts = np.zeros(game.shape, dtype=np.int64)
    np.add.at(counts, tuple(actions.T), 1)
    xi = counts / float(T)
    scores = []
    for i in range(n):
        opp_shape = game.opponent_shape(i)
        rec = ForecastRecord(int(np.prod(opp_shape)))
        opp_cols = [j for j in range(n) if j != i]
        flat = np.ravel_multi_index(tuple(actions[:, j] for j in opp_cols), opp_shape)
        for t in range(T):
            rec.append(rec.intern(assessments[i][t]), int(flat[t]))
        scores.append(float(calibration_score(rec).max()))

    sig_counts = np.zeros(signal_shape, dtype=np.int64)
    np.add.at(sig_counts, tuple(profiles.T), 1)
    report = {
        "horizon": T,
        "calibration_scores": scores,
        "action_empirical_sup_distance": float(np.abs(xi - eta.weights).max()),
        "signal_empirical_sup_distance": float(
            np.abs(sig_counts / float(T) - mg.mediator.weights).max()
        ),
        "collisions_repaired": sum(len(r) for r in repaired),
    }
    return ReplayScripts(
        signals=profiles, actions=actions, assessments=assessments, report=report
    )
