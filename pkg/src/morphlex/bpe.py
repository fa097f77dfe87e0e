"""Character-level BPE: deterministic trainer, encoder and vocab import/export.

Symbols are Unicode characters with no end-of-word or continuation markers.
Among equally frequent pairs the lexicographically smallest ``(left, right)``
is merged first, so training is fully deterministic.
"""

from __future__ import annotations

import heapq
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, TextIO

from .core import ConfigError, InputError, MorphlexError
from .ingest import iter_words

logger = logging.getLogger(__name__)


class EncodeUnavailable(MorphlexError):
    """The model has no merge list, so words cannot be tokenized."""


def count_words(stream: TextIO | Iterable[str], lowercase: bool = False) -> Counter:
    return Counter(iter_words(stream, lowercase))


@dataclass(frozen=True)
class BpeModel:
    vocab: Mapping[str, int]
    merges: tuple | None
    vocab_size_target: int = 0
    _ranks: dict = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        ids = list(self.vocab.values())
        if len(set(ids)) != len(ids):
            raise InputError("vocabulary has duplicate ids")
        if self.merges is not None:
            object.__setattr__(self, "merges", tuple(tuple(m) for m in self.merges))
            object.__setattr__(self, "_ranks", {m: r for r, m in enumerate(self.merges)})

    @property
    def can_encode(self) -> bool:
        return self.merges is not None

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token) -> bool:
        return token in self.vocab

    def encode(self, word: str) -> list[str]:
        """Split ``word`` into characters and apply merges lowest rank first.

        Characters missing from the vocabulary stay as single-character
        tokens; see :meth:`encode_flagged`.
        """
        if self.merges is None:
            raise EncodeUnavailable("model was imported without merges; cannot encode")
        cached = self._cache.get(word)
        if cached is not None:
            return list(cached)
        symbols = list(word)
        ranks = self._ranks
        while len(symbols) > 1:
            best_rank, best = None, None
            for pair in zip(symbols, symbols[1:]):
                r = ranks.get(pair)
                if r is not None and (best_rank is None or r < best_rank):
                    best_rank, best = r, pair
            if best is None:
                break
            symbols = _merge_symbols(symbols, best)
        self._cache[word] = tuple(symbols)
        return symbols

    def encode_flagged(self, word: str) -> list[tuple[str, bool]]:
        """Tokens paired with ``True`` when the token is outside the vocabulary."""
        return [(tok, tok not in self.vocab) for tok in self.encode(word)]

    def truncated(self, k: int) -> "BpeModel":
        """Model that training to vocabulary size ``k`` on the same counts gives."""
        if self.merges is None:
            raise EncodeUnavailable("cannot truncate a model without merges")
        merged = {"".join(m) for m in self.merges}
        base = [t for t, _ in sorted(self.vocab.items(), key=lambda kv: kv[1])
                if len(t) == 1 or t not in merged]
        if k < len(base):
            raise ConfigError(f"k={k} is smaller than the alphabet ({len(base)})")
        vocab = {t: i for i, t in enumerate(base)}
        merges = []
        for left, right in self.merges:
            if len(vocab) >= k:
                break
            merges.append((left, right))
            vocab.setdefault(left + right, len(vocab))
        return BpeModel(vocab, tuple(merges), k)

    def to_dict(self) -> dict:
        data = {"vocab": dict(self.vocab), "vocab_size_target": self.vocab_size_target}
        if self.merges is not None:
            data["merges"] = [f"{l} {r}" for l, r in self.merges]
        return data

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n",
                              encoding="utf-8")


def _merge_symbols(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    left, right = pair
    out = []
    i, n = 0, len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def train(counts: Mapping[str, int], k: int, min_frequency: int = 2) -> BpeModel:
    """Greedy BPE until the vocabulary holds ``k`` tokens or no pair reaches
    ``min_frequency``."""
    if min_frequency < 1:
        raise ConfigError("min_frequency must be at least 1")
    words = [list(w) for w in sorted(counts) if w]
    freqs = [counts[w] for w in sorted(counts) if w]
    if any(f < 1 for f in freqs):
        raise ConfigError("word counts must be positive")
    alphabet = sorted({ch for w in words for ch in w})
    if k < len(alphabet):
        raise ConfigError(f"k={k} is smaller than the alphabet ({len(alphabet)})")
    vocab = {ch: i for i, ch in enumerate(alphabet)}

    pair_counts: dict[tuple, int] = defaultdict(int)
    where: dict[tuple, set] = defaultdict(set)
    for idx, (w, f) in enumerate(zip(words, freqs)):
        for pair in zip(w, w[1:]):
            pair_counts[pair] += f
            where[pair].add(idx)
    heap = [(-c, p[0], p[1]) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    merges = []
    while len(vocab) < k and heap:
        neg, left, right = heapq.heappop(heap)
        pair = (left, right)
        if pair_counts.get(pair, 0) != -neg:
            continue  # stale entry
        if -neg < min_frequency:
            break
        merges.append(pair)
        vocab.setdefault(left + right, len(vocab))
        changed = set()
        for idx in sorted(where.pop(pair, ())):
            w, f = words[idx], freqs[idx]
            for p in zip(w, w[1:]):
                pair_counts[p] -= f
                changed.add(p)
            w = words[idx] = _merge_symbols(w, pair)
            for p in zip(w, w[1:]):
                pair_counts[p] += f
                where[p].add(idx)
                changed.add(p)
        for p in changed:
            c = pair_counts[p]
            if c <= 0:
                pair_counts.pop(p, None)
                where.pop(p, None)
            elif p != pair:
                heapq.heappush(heap, (-c, p[0], p[1]))
        pair_counts.pop(pair, None)
    logger.info("trained BPE: %d merges, vocab %d (target %d)", len(merges), len(vocab), k)
    return BpeModel(vocab, tuple(merges), k)


def _parse_merge(item, lineno=None) -> tuple[str, str]:
    if isinstance(item, (list, tuple)) and len(item) == 2:
        return str(item[0]), str(item[1])
    if isinstance(item, str):
        parts = item.split(" ")
        if len(parts) == 2 and all(parts):
            return parts[0], parts[1]
    where = f" (line {lineno})" if lineno else ""
    raise InputError(f"malformed merge entry{where}: {item!r}")


def import_vocab(path) -> BpeModel:
    """Load ``{"vocab": {...}, "merges": [...]}``; a HF ``tokenizer.json`` works too."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(data, dict) and isinstance(data.get("model"), dict):
        data = data["model"]
    if not isinstance(data, dict) or not isinstance(data.get("vocab"), dict):
        raise InputError(f"{path}: expected an object with a 'vocab' mapping")
    vocab = data["vocab"]
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in vocab.values()):
        raise InputError(f"{path}: vocabulary ids must be integers")
    merges = data.get("merges")
    if merges is not None:
        merges = tuple(_parse_merge(m) for m in merges)
    k = data.get("vocab_size_target") or len(vocab)
    return BpeModel(dict(vocab), merges, int(k))


def write_merges(model: BpeModel, path) -> None:
    if model.merges is None:
        raise EncodeUnavailable("model has no merges to write")
    Path(path).write_text("".join(f"{l} {r}\n" for l, r in model.merges), encoding="utf-8")


def read_merges(path) -> list[tuple[str, str]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return [_parse_merge(line, n) for n, line in enumerate(lines, 1)
            if line.strip() and not line.startswith("#version")]


def model_from_merges(merges: Iterable[tuple[str, str]], alphabet: Iterable[str]) -> BpeModel:
    """Rebuild a model from a base alphabet and an ordered merge list."""
    vocab = {ch: i for i, ch in enumerate(sorted(set(alphabet)))}
    merges = tuple(merges)
    for left, right in merges:
        vocab.setdefault(left + right, len(vocab))
    return BpeModel(vocab, merges, len(vocab))
