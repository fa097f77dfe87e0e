"""Iterative morphological decomposition: filtering, atomicity scoring,
Otsu thresholding and lexicon extraction.

The pipeline is type-only: it looks at the candidate strings and nothing
else. Scores start at ``1/len(t)``; each round a token whose best split into
pool members outscores it is pushed down to ``S0 / (1 + BEP)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import (AlphabetConfig, Candidate, ConfigError, Decomposition, EmptyDataError,
                   MorphemeLexicon, ScoreTable)

logger = logging.getLogger(__name__)


def _is_proper_or_acronym(surface: str) -> bool:
    if surface[0].isupper():
        return True
    return sum(ch.isupper() for ch in surface) >= 2


def prefilter(raw: Iterable[Candidate], cfg: AlphabetConfig) -> list[Candidate]:
    """Drop candidates that are foreign-script, non-alphabetic, proper nouns
    or acronyms, or outside the length bounds."""
    kept = []
    for cand in raw:
        s = cand.surface
        if _is_proper_or_acronym(s):
            continue
        if not s.isalpha():
            continue
        if any(ch not in cfg.valid_chars for ch in s):
            continue
        n = len(s)
        if n > cfg.max_length or n < cfg.min_length:
            if not (n == 1 and s in cfg.whitelist):
                continue
        kept.append(cand)
    return kept


def dedupe_surfaces(candidates: Iterable[Candidate]) -> list[Candidate]:
    """Collapse candidates sharing a surface, keeping the first."""
    seen: dict[str, Candidate] = {}
    for cand in candidates:
        seen.setdefault(cand.surface, cand)
    return list(seen.values())


class SupportIndex:
    """Type-support counts over a deduplicated candidate pool.

    All counts are computed up front by enumerating the substrings of every
    candidate (bounded by the longest candidate) against a hash index of the
    pool, so a query is a dictionary lookup.
    """

    def __init__(self, candidates: Sequence[Candidate]):
        self.candidates = list(candidates)
        surfaces = [c.surface for c in self.candidates]
        if len(set(surfaces)) != len(surfaces):
            raise ValueError("support index needs candidates deduplicated on surface")
        counts = kernels.substring_counts(surfaces, surfaces, True)
        self._support = dict(zip(surfaces, counts.tolist()))

    def support(self, token: str) -> int:
        return self._support[token]

    def __len__(self) -> int:
        return len(self.candidates)

    def __contains__(self, token) -> bool:
        return token in self._support


def build_support_index(candidates: Sequence[Candidate]) -> SupportIndex:
    return SupportIndex(candidates)


def support_filter(index: SupportIndex, m: int) -> list[Candidate]:
    return [c for c in index.candidates if index.support(c.surface) >= m]


def _surfaces(pool: Iterable) -> list[str]:
    return [c.surface if isinstance(c, Candidate) else c for c in pool]


def initial_scores(pool: Iterable[Candidate]) -> ScoreTable:
    surfaces = _surfaces(pool)
    if not surfaces:
        raise EmptyDataError("cannot score an empty pool")
    return ScoreTable({s: 1.0 / len(s) for s in surfaces}, iteration=0)


def _forward_best(token: str, scores, whitelist) -> float | None:
    n = len(token)
    neg = -math.inf
    best = [neg] * (n + 1)
    best[0] = 0.0
    for j in range(1, n + 1):
        for i in range(j):
            if (i == 0 and j == n) or best[i] == neg:
                continue
            seg = token[i:j]
            if seg not in scores or (j - i == 1 and seg not in whitelist):
                continue
            v = best[i] + scores[seg]
            if v > best[j]:
                best[j] = v
    return None if best[n] == neg else best[n]


def best_explanation(token: str, scores: ScoreTable, whitelist) -> Decomposition | None:
    """Highest-scoring split of ``token`` into two or more pool members.

    Single-character parts must be whitelisted. When several splits reach
    the same score, the one with the shortest first part wins (then the
    shortest second part, and so on).
    """
    if token not in scores:
        raise KeyError(f"token {token!r} is not in the score table")
    table = scores.entries
    total = _forward_best(token, table, whitelist)
    if total is None:
        return None
    n = len(token)
    neg = -math.inf
    # suffix DP for the tie-broken part sequence; the sum itself comes from
    # the forward pass so it matches the batch kernel bit for bit
    suffix = [neg] * (n + 1)
    choice = [0] * (n + 1)
    suffix[n] = 0.0
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n + 1):
            if (i == 0 and j == n) or suffix[j] == neg:
                continue
            seg = token[i:j]
            if seg not in table or (j - i == 1 and seg not in whitelist):
                continue
            v = table[seg] + suffix[j]
            if v > suffix[i]:
                suffix[i], choice[i] = v, j
    parts, i = [], 0
    while i < n:
        parts.append(token[i:choice[i]])
        i = choice[i]
    return Decomposition(tuple(parts), total)


class _Lattice:
    """Fixed segmentation structure of a pool; only scores vary between rounds."""

    def __init__(self, tokens: Sequence[str], whitelist):
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.whitelist = frozenset(whitelist)
        self.lengths = np.asarray([len(t) for t in self.tokens], dtype=np.int32)
        self.arrays = kernels.build_lattice(self.tokens, self.index, self.whitelist)

    def bep(self, scores: np.ndarray):
        return kernels.bep_all(scores, self.lengths, *self.arrays)


@dataclass(frozen=True)
class RefinementState:
    scores: ScoreTable
    initial_scores: ScoreTable
    iteration: int = 0
    last_max_delta: float = math.inf
    stop_reason: str | None = None
    max_delta_history: tuple = ()
    _lattice: _Lattice | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.scores.entries.keys() != self.initial_scores.entries.keys():
            raise ValueError("scores and initial scores cover different tokens")

    @classmethod
    def start(cls, pool: Iterable[Candidate]) -> "RefinementState":
        s0 = initial_scores(sorted(set(_surfaces(pool))))
        return cls(s0, s0)


def _step_arrays(lattice: _Lattice, cur: np.ndarray, s0: np.ndarray):
    bep, found = lattice.bep(cur)
    penalize = found & (bep > cur)
    new = np.where(penalize, s0 / (1.0 + bep), cur)
    delta = float(np.max(np.abs(new - cur))) if len(cur) else 0.0
    return new, delta


def refine_step(state: RefinementState, whitelist) -> RefinementState:
    """One synchronous update: every BEP reads the previous round's table."""
    tokens = sorted(state.scores.entries)
    lattice = state._lattice
    if lattice is None or lattice.tokens != tokens or lattice.whitelist != frozenset(whitelist):
        lattice = _Lattice(tokens, whitelist)
    cur = np.asarray([state.scores[t] for t in tokens], dtype=np.float64)
    s0 = np.asarray([state.initial_scores[t] for t in tokens], dtype=np.float64)
    new, delta = _step_arrays(lattice, cur, s0)
    table = ScoreTable(dict(zip(tokens, new.tolist())), state.iteration + 1)
    return RefinementState(table, state.initial_scores, state.iteration + 1, delta, None,
                           state.max_delta_history + (delta,), lattice)


def run_refinement(pool: Iterable[Candidate], cfg: AlphabetConfig,
                   epsilon: float | None = None,
                   max_iterations: int | None = None) -> RefinementState:
    """Iterate refine steps until the largest score change drops below
    epsilon or the iteration cap is reached."""
    eps = cfg.epsilon if epsilon is None else epsilon
    cap = cfg.max_iterations if max_iterations is None else max_iterations
    if cap < 1:
        raise ConfigError("max_iterations must be at least 1")
    tokens = sorted(set(_surfaces(pool)))
    if not tokens:
        raise EmptyDataError("cannot refine an empty pool")
    lattice = _Lattice(tokens, cfg.whitelist)
    s0 = 1.0 / lattice.lengths.astype(np.float64)
    cur = s0.copy()
    history = []
    reason = "max_iterations"
    for it in range(1, cap + 1):
        cur, delta = _step_arrays(lattice, cur, s0)
        history.append(delta)
        logger.debug("iteration %d max delta %.3g", it, delta)
        if delta < eps:
            reason = "converged"
            break
    table = ScoreTable(dict(zip(tokens, cur.tolist())), len(history))
    initial = ScoreTable(dict(zip(tokens, s0.tolist())), 0)
    return RefinementState(table, initial, len(history), history[-1], reason,
                           tuple(history), lattice)


OTSU_TIE_RTOL = 1e-10


@dataclass(frozen=True)
class OtsuResult:
    threshold: float
    bin_count: int
    inter_class_variance: float


def histogram(values: np.ndarray, bins: int):
    """Equal-width histogram over [min, max].

    Returns ``(edges, counts)``. A value lands in bin ``b`` exactly when
    ``edges[b] <= value`` and it is below ``edges[b + 1]`` (the top bin is
    closed), so thresholding at ``edges[b]`` keeps bins ``b`` and above.
    """
    edges = np.linspace(values.min(), values.max(), bins + 1)
    idx = np.searchsorted(edges[1:-1], values, side="right")
    return edges, np.bincount(idx, minlength=bins)


def otsu_threshold(scores: Iterable[float], bins: int = 256) -> OtsuResult:
    """Bin boundary maximising the between-class variance w0*w1*(mu0-mu1)^2.

    Class means use bin centres. Variances within ``OTSU_TIE_RTOL`` of the
    maximum count as ties (symmetric splits differ only by rounding) and go
    to the lower boundary.
    """
    if bins < 2:
        raise ConfigError("otsu needs at least 2 bins")
    values = np.asarray(list(scores), dtype=np.float64)
    if values.size == 0 or np.unique(values).size < 2:
        raise EmptyDataError("otsu needs at least two distinct values")
    edges, counts = histogram(values, bins)
    centers = (edges[:-1] + edges[1:]) / 2.0
    total = values.size
    c0 = np.cumsum(counts)[:-1].astype(np.float64)
    m0 = np.cumsum(counts * centers)[:-1]
    c1 = total - c0
    m1 = np.sum(counts * centers) - m0
    with np.errstate(divide="ignore", invalid="ignore"):
        var = (c0 / total) * (c1 / total) * (m0 / c0 - m1 / c1) ** 2
    var = np.where((c0 > 0) & (c1 > 0), var, -np.inf)
    top = var.max()
    b = int(np.argmax(var >= top - OTSU_TIE_RTOL * top))
    return OtsuResult(float(edges[b + 1]), bins, float(var[b]))


def extract_lexicon(state: RefinementState, otsu: OtsuResult,
                    language_tag: str = "") -> MorphemeLexicon:
    kept = sorted(t for t, s in state.scores.entries.items() if s >= otsu.threshold)
    if not kept:
        logger.warning("threshold %.6g is above every score; lexicon is empty", otsu.threshold)
    return MorphemeLexicon(tuple(kept), otsu.threshold, language_tag)


def reduction_stats(initial: int, final: int) -> tuple[float, float]:
    """Percent of candidates removed and the initial/final ratio."""
    if initial <= 0 or final < 0:
        raise ValueError("counts must be positive")
    if final == 0:
        raise ZeroDivisionError("final count is zero; reduction factor undefined")
    return (1.0 - final / initial) * 100.0, initial / final


@dataclass(frozen=True)
class PipelineResult:
    state: RefinementState
    otsu: OtsuResult
    lexicon: MorphemeLexicon
    pool_sizes: dict

    def report(self, config: dict | None = None) -> dict:
        percent, factor = reduction_stats(self.pool_sizes["raw"], len(self.lexicon)) \
            if len(self.lexicon) else (100.0, None)
        return {
            "iterations": self.state.iteration,
            "stop_reason": self.state.stop_reason,
            "max_delta_history": list(self.state.max_delta_history),
            "otsu_threshold": self.otsu.threshold,
            "otsu_bins": self.otsu.bin_count,
            "otsu_inter_class_variance": self.otsu.inter_class_variance,
            "pool_sizes_per_stage": dict(self.pool_sizes),
            "lexicon_size": len(self.lexicon),
            "reduction": {"percent": percent, "factor": factor},
            "config": config or {},
        }


def run_pipeline(raw: Sequence[Candidate], cfg: AlphabetConfig,
                 language_tag: str = "") -> PipelineResult:
    """Prefilter, support filter, refine, threshold and extract."""
    sizes = {"raw": len(raw)}
    filtered = prefilter(raw, cfg)
    sizes["prefiltered"] = len(filtered)
    unique = dedupe_surfaces(filtered)
    sizes["unique"] = len(unique)
    pool = support_filter(build_support_index(unique), cfg.support_m)
    sizes["support_filtered"] = len(pool)
    if not pool:
        raise EmptyDataError("no candidates survive filtering")
    state = run_refinement(pool, cfg)
    values = list(state.scores.entries.values())
    try:
        otsu = otsu_threshold(values, cfg.otsu_bins)
    except EmptyDataError:
        # a single score level cannot be split; every candidate is kept
        logger.warning("all %d final scores are equal; keeping the whole pool", len(values))
        otsu = OtsuResult(min(values), cfg.otsu_bins, 0.0)
    lexicon = extract_lexicon(state, otsu, language_tag)
    sizes["lexicon"] = len(lexicon)
    return PipelineResult(state, otsu, lexicon, sizes)
