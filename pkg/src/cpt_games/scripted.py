"""Canonical counterexample game and its scripted calibrated-play runs.

The two-row game pits a probability-weighting row player against an
indifferent column player with four actions.  The top-row payoff spread is
scaled by ``beta = 1 / w(0.5)`` (computed from the row player's Prelec
coefficient, never pasted in), which makes the row player strictly prefer
the top row against either of two half-half column mixes but the bottom
row against their average.  Cyclic column play with alternating half-half
assessments is then calibrated while the empirical distribution converges
to a point outside the correlated-equilibrium set; it stays inside the
mediated set.

The three-player variant gives the column players a coordination payoff so
that their cyclic play is itself a strict best reaction to calibrated
point-mass assessments.

Also here: the block-switching adversary used to defeat no-regret play,
the Monte-Carlo tail probe for its regret lower bound, and the martingale
diagnostic for within-block empirical balance.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cpt import CptPreferences, identity_value, prelec_weighting
from .engine import (
    ActionScriptStrategy,
    AssessmentDrivenStrategy,
    FixedMixStrategy,
    ForecastingBestReaction,
    MixScheduleStrategy,
    RunTrace,
    Strategy,
    max_calibration_score,
    regret_matrix_from_counts,
    run_engine,
)
from .equilibrium import check_correlated_eq, check_mediated_eq, mediated_hull_distance
from .games import Game

__all__ = [
    "ODD_MIX",
    "EVEN_MIX",
    "UNIFORM_MIX",
    "counterexample_game",
    "counterexample_game_3p",
    "odd_cycle_distribution",
    "even_cycle_distribution",
    "cycle_average_distribution",
    "scripted_cycle_run",
    "BlockSchedule",
    "block_adversary",
    "regret_tail_probe",
    "probe_strategy_family",
    "wilson_interval",
    "block_balance_probe",
]

ODD_MIX = np.array([0.5, 0.0, 0.5, 0.0])
EVEN_MIX = np.array([0.0, 0.5, 0.0, 0.5])
UNIFORM_MIX = np.array([0.25, 0.25, 0.25, 0.25])

COLUMN_LABELS = ("I", "II", "III", "IV")


def counterexample_game(gamma_row: float = 0.5, gamma_col: float = 1.0) -> Game:
    """Two-player 2x4 game with a nonconvex correlated-equilibrium set."""
    w = prelec_weighting(gamma_row)
    beta = 1.0 / w(0.5)
    payoffs = np.zeros((2, 2, 4))
    payoffs[0, 0] = [2.0 * beta, beta + 1.0, 0.0, 1.0]
    payoffs[0, 1] = 1.99
    payoffs[1, 0] = 1.0
    payoffs[1, 1] = 0.0
    prefs = (
        CptPreferences(identity_value(0.0), w, w),
        CptPreferences(
            identity_value(0.0), prelec_weighting(gamma_col), prelec_weighting(gamma_col)
        ),
    )
    return Game((("0", "1"), COLUMN_LABELS), payoffs, prefs)


def counterexample_game_3p(gamma_row: float = 0.5, gamma_col: float = 1.0) -> Game:
    """Three-player variant: the two column players must coordinate.

    All payoffs are -1 when players 2 and 3 split; when they agree the
    payoffs follow the two-player table with their common action as the
    column.
    """
    two = counterexample_game(gamma_row, gamma_col)
    payoffs = np.full((3, 2, 4, 4), -1.0)
    for a1 in range(2):
        for c in range(4):
            payoffs[0, a1, c, c] = two.payoffs[0, a1, c]
            payoffs[1, a1, c, c] = two.payoffs[1, a1, c]
            payoffs[2, a1, c, c] = two.payoffs[1, a1, c]
    prefs = (two.prefs[0], two.prefs[1], two.prefs[1])
    return Game((("0", "1"), COLUMN_LABELS, COLUMN_LABELS), payoffs, prefs)


def _row0_joint(column_weights: np.ndarray) -> np.ndarray:
    w = np.zeros((2, 4))
    w[0] = column_weights
    return w


def odd_cycle_distribution() -> np.ndarray:
    """Empirical joint of top-row play against columns I and III."""
    return _row0_joint(ODD_MIX)


def even_cycle_distribution() -> np.ndarray:
    return _row0_joint(EVEN_MIX)


def cycle_average_distribution() -> np.ndarray:
    """Mean of the odd and even cycle distributions; outside the correlated set."""
    return _row0_joint(UNIFORM_MIX)


def _alternating_assessment_2p(t: int) -> np.ndarray:
    return ODD_MIX if t % 2 == 1 else EVEN_MIX


def _alternating_assessment_3p(t: int) -> np.ndarray:
    out = np.zeros((4, 4))
    if t % 2 == 1:
        out[0, 0] = 0.5
        out[2, 2] = 0.5
    else:
        out[1, 1] = 0.5
        out[3, 3] = 0.5
    return out.ravel()


def _column_assessment_3p(player: int, t: int) -> np.ndarray:
    """Point mass on (row 0, the other column player's cyclic action)."""
    c = (t - 1) % 4
    out = np.zeros((2, 4))
    out[0, c] = 1.0
    return out.ravel()


def scripted_cycle_run(
    variant: str,
    T: int,
    resolution: int | None = None,
    tol: float = 1e-6,
    seed: int = 0,
) -> tuple[RunTrace, dict]:
    """Run the calibrated cyclic-play script and summarize it.

    ``variant`` is "2p" or "3p".  The report carries per-player calibration
    scores, the correlated-equilibrium margin of the final empirical
    distribution, its mediated verdict, and the sampled-hull distance at
    every checkpoint.
    """
    if T < 4:
        raise ValueError("need at least one full cycle")
    if variant == "2p":
        game = counterexample_game()
        strategies: list[Strategy] = [
            AssessmentDrivenStrategy(_alternating_assessment_2p),
            ActionScriptStrategy(
                lambda t: (t - 1) % 4,
                assessment_at=lambda t: np.array([1.0, 0.0]),
            ),
        ]
    elif variant == "3p":
        game = counterexample_game_3p()
        strategies = [
            AssessmentDrivenStrategy(_alternating_assessment_3p),
            AssessmentDrivenStrategy(lambda t: _column_assessment_3p(1, t)),
            AssessmentDrivenStrategy(lambda t: _column_assessment_3p(2, t)),
        ]
    else:
        raise ValueError(f"unknown variant {variant!r}")

    trace = run_engine(game, strategies, T, seed)
    xi = trace.empirical()
    scores = [max_calibration_score(trace, i) for i in range(game.n)]
    corr = check_correlated_eq(game, xi)
    region_cache: dict = {}
    med = check_mediated_eq(game, xi, resolution=resolution, tol=tol, region_cache=region_cache)
    distances = [
        (
            cp.t,
            mediated_hull_distance(
                game,
                trace.empirical(cp.t),
                resolution=resolution,
                tol=tol,
                region_cache=region_cache,
            ),
        )
        for cp in trace.checkpoints
    ]
    report = {
        "variant": variant,
        "horizon": T,
        "calibration_scores": scores,
        "correlated_verdict": "member" if corr.member else "non-member",
        "correlated_margin": corr.margin,
        "correlated_witness": corr.witness,
        "mediated_verdict": "member" if med.member else "non-member",
        "mediated_margin": med.margin,
        "hull_distances": distances,
        "grid_resolution": resolution if resolution is not None else "default",
    }
    return trace, report


# ---------------------------------------------------------------------------
# block-switching adversary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSchedule:
    """Geometric block plan over the odd/even column mixes.

    Step 1 plays the odd mix and step 2 the even mix; thereafter block k
    plays odd on (2 T^k, T^(k+1)] and even on (T^(k+1), 2 T^(k+1)].
    """

    T: int

    def __post_init__(self) -> None:
        if self.T <= 2:
            raise ValueError("block base must be an integer > 2")

    def phase(self, t: int) -> str:
        if t < 1:
            raise ValueError("steps start at 1")
        if t == 1:
            return "odd"
        if t == 2:
            return "even"
        k = 0
        while True:
            if 2 * self.T**k < t <= self.T ** (k + 1):
                return "odd"
            if self.T ** (k + 1) < t <= 2 * self.T ** (k + 1):
                return "even"
            k += 1

    def mix(self, t: int) -> np.ndarray:
        return ODD_MIX if self.phase(t) == "odd" else EVEN_MIX

    def even_fraction(self, t: int) -> float:
        """Fraction of steps up to t on the even mix."""
        return sum(1 for u in range(1, t + 1) if self.phase(u) == "even") / t


def block_adversary(T: int) -> MixScheduleStrategy:
    """Column strategy drawing i.i.d. inside the block schedule's phases."""
    sched = BlockSchedule(T)
    return MixScheduleStrategy(sched.mix)


def _bar_regret(game: Game, trace: RunTrace, T_block: int, k: int) -> float:
    """Positive-part sum of the three scheduled regret terms for the row player."""
    t1 = T_block ** (k + 1)
    t2 = 2 * t1
    r1 = regret_matrix_from_counts(game, 0, trace.counts(t1), t1)
    r2 = regret_matrix_from_counts(game, 0, trace.counts(t2), t2)
    return max(r1[1, 0], 0.0) + max(r2[0, 1], 0.0) + max(r2[1, 0], 0.0)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _probe_threads() -> int:
    raw = os.environ.get("CPT_GAMES_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def regret_tail_probe(
    row_strategy_factory,
    T_block: int,
    k: int,
    n_runs: int,
    seed: int,
    eps_tilde: float = 0.004,
    max_horizon: int = 10_000_000,
) -> dict:
    """Monte-Carlo frequency of a large block-regret tail event.

    Runs the counterexample game with the block-switching adversary as the
    column player and ``row_strategy_factory()`` as the row player, over
    ``n_runs`` independent seeds, and estimates the probability that the
    positive-part sum of the scheduled regret terms exceeds ``eps_tilde``.
    The probe tests named strategy families only; no finite experiment can
    quantify over all strategies, and the report says so.
    """
    horizon = 2 * T_block ** (k + 1)
    if horizon > max_horizon:
        raise ValueError(f"horizon {horizon} exceeds the configured bound {max_horizon}")
    game = counterexample_game()

    def one(run_idx: int) -> float:
        strategies = [row_strategy_factory(), block_adversary(T_block)]
        trace = run_engine(
            game, strategies, horizon, seed + run_idx, checkpoints=False
        )
        return _bar_regret(game, trace, T_block, k)

    threads = _probe_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            values = list(ex.map(one, range(n_runs)))
    else:
        values = [one(r) for r in range(n_runs)]
    values = np.array(values)
    hits = int((values > eps_tilde).sum())
    lo, hi = wilson_interval(hits, n_runs)
    return {
        "horizon": horizon,
        "block_base": T_block,
        "block_index": k,
        "eps_tilde": eps_tilde,
        "runs": n_runs,
        "frequency": hits / n_runs,
        "wilson_low": lo,
        "wilson_high": hi,
        "mean_bar_regret": float(values.mean()),
        "note": (
            "tests the named row-strategy family only; the universal "
            "no-regret impossibility is not desk-verifiable"
        ),
    }


def probe_strategy_family(name: str, epsilon: float = 0.1):
    """Row-player strategy factories exercised by the tail probe."""
    if name == "always-top":
        return lambda: FixedMixStrategy([1.0, 0.0])
    if name == "always-bottom":
        return lambda: FixedMixStrategy([0.0, 1.0])
    if name == "calibrated":
        return lambda: ForecastingBestReaction(epsilon)
    raise ValueError(f"unknown strategy family {name!r}")


def block_balance_probe(l_steps: int, n_seeds: int, seed: int, delta: float = 0.05) -> float:
    """Frequency of near-equal within-block empirical frequencies.

    Draws ``l_steps`` i.i.d. half-half picks between the two odd-phase
    columns (the row player pinned to the top row) per seed and reports how
    often the two empirical frequencies differ by less than ``delta``;
    the martingale concentration bound makes this approach one.
    """
    rng = np.random.default_rng(seed)
    firsts = rng.binomial(l_steps, 0.5, size=n_seeds)
    gap = np.abs(2.0 * firsts / l_steps - 1.0)
    return float((gap < delta).mean())
