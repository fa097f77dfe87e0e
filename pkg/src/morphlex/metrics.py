"""Lexical Morpheme Coverage, Over-Split Rate and the Integrated Performance Score."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import kernels
from .bpe import BpeModel, EncodeUnavailable
from .core import EmptyDataError, MorphemeLexicon

SQRT2 = math.sqrt(2.0)

# Continuation/word-boundary marker conventions of common tokenizer exports.
MARKER_RULES = {
    "none": None,
    "wordpiece": "##",      # BERT continuation prefix
    "sentencepiece": "▁",   # U+2581 word-start prefix
    "gpt2": "Ġ",            # byte-level space prefix
}


def marker_stripper(rule: str | None) -> Callable[[str], str]:
    """Function removing a leading marker from token surfaces."""
    marker = MARKER_RULES.get(rule or "none", rule) if rule else None
    if not marker:
        return lambda tok: tok
    return lambda tok: tok[len(marker):] if tok.startswith(marker) else tok


def _surface_vocab(model: BpeModel, strip: Callable[[str], str]) -> set:
    return {strip(tok) for tok in model.vocab}


def lexical_morpheme_coverage(lexicon: MorphemeLexicon | Sequence[str], model: BpeModel,
                              marker: str | None = None) -> float:
    covered, total = _covered(lexicon, model, marker)
    return len(covered) / total


def _covered(lexicon, model, marker):
    morphemes = list(lexicon)
    if not morphemes:
        raise EmptyDataError("lexicon is empty")
    vocab = _surface_vocab(model, marker_stripper(marker))
    return [m for m in morphemes if m in vocab], len(morphemes)


@dataclass
class OsrDiagnostics:
    numerator: int
    denominator: int
    oversplit: list = field(default_factory=list)
    absent: list = field(default_factory=list)  # occur in no eval word, excluded


def over_split_rate(lexicon: MorphemeLexicon | Sequence[str], model: BpeModel,
                    eval_words: Iterable[str], marker: str | None = None):
    """Share of morphemes found inside eval words that the tokenizer never
    emits as a whole token.

    A morpheme is in the denominator when it is a contiguous substring of at
    least one eval word. It counts as over-split when no token of any eval
    word's encoding equals it. Returns ``(osr, diagnostics)``.
    """
    if not model.can_encode:
        raise EncodeUnavailable("over-split rate needs a model with merges")
    words = list(dict.fromkeys(eval_words))
    if not words:
        raise EmptyDataError("eval word set is empty")
    morphemes = list(dict.fromkeys(lexicon))
    if not morphemes:
        raise EmptyDataError("lexicon is empty")
    strip = marker_stripper(marker)
    occurrences = kernels.substring_counts(morphemes, words, False)
    produced = set()
    for word in words:
        produced.update(strip(tok) for tok in model.encode(word))
    present = [m for m, c in zip(morphemes, occurrences.tolist()) if c > 0]
    absent = [m for m, c in zip(morphemes, occurrences.tolist()) if c == 0]
    oversplit = [m for m in present if m not in produced]
    diag = OsrDiagnostics(len(oversplit), len(present), oversplit, absent)
    if not present:
        raise EmptyDataError("no lexicon morpheme occurs in the eval words")
    return len(oversplit) / len(present), diag


def integrated_performance_score(lmc: float, osr: float) -> float:
    """One minus the normalised distance to the ideal point (LMC=1, OSR=0)."""
    for name, v in (("lmc", lmc), ("osr", osr)):
        if not 0.0 <= v <= 1.0 or math.isnan(v):
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return 1.0 - math.hypot(1.0 - lmc, osr) / SQRT2


@dataclass
class EvalReport:
    k: int
    lmc: float
    osr: float
    ips: float
    covered_morphemes: list
    oversplit_morphemes: list
    osr_denominator: int
    lexicon_size: int = 0
    absent_morphemes: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=1, sort_keys=True)

    def csv_row(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(
            [self.k, repr(self.lmc), repr(self.osr), repr(self.ips), self.osr_denominator])
        return buf.getvalue()


CSV_HEADER = "k,lmc,osr,ips,osr_denominator\n"


def evaluate(lexicon, model: BpeModel, eval_words: Sequence[str], k: int | None = None,
             marker: str | None = None) -> EvalReport:
    covered, total = _covered(lexicon, model, marker)
    lmc = len(covered) / total
    osr, diag = over_split_rate(lexicon, model, eval_words, marker)
    return EvalReport(
        k=k if k is not None else len(model.vocab),
        lmc=lmc, osr=osr, ips=integrated_performance_score(lmc, osr),
        covered_morphemes=covered, oversplit_morphemes=diag.oversplit,
        osr_denominator=diag.denominator, lexicon_size=total,
        absent_morphemes=diag.absent,
        settings={"marker": marker or "none", "occurrence": "substring"},
    )


def write_reports_csv(reports: Iterable[EvalReport], path) -> None:
    Path(path).write_text(CSV_HEADER + "".join(r.csv_row() for r in reports), encoding="utf-8")
