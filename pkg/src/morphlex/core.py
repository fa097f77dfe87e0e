"""Shared domain types, alphabet configuration and the file codecs.

Everything here is an immutable value object once built. File formats:

* candidate list -- UTF-8, one token per line, ``-x`` marks a suffix and
  ``x-`` a prefix;
* score table -- CSV ``token,score``;
* lexicon -- UTF-8, one morpheme per line, sorted ascending;
* config -- JSON with ``alphabet``, ``whitelist``, ``min_length``,
  ``max_length``, ``support_m``, ``epsilon``, ``max_iterations``,
  ``otsu_bins``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import unicodedata
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

HYPHENS = frozenset("-‐‑‒–−")
SCORE_TOLERANCE = 1e-12
PRINT_TOLERANCE = 1e-11


class MorphlexError(Exception):
    """Base class for all errors raised by the package."""


class InputError(MorphlexError):
    """Unreadable or malformed input file."""


class ConfigError(MorphlexError):
    """Invalid configuration value."""


class EmptyDataError(MorphlexError):
    """Input is well formed but too small or degenerate to process."""


class Source(enum.Enum):
    DIC_STEM = "dic_stem"
    AFF_ENTRY = "aff_entry"
    PLAIN_LIST = "plain_list"


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Candidate:
    surface: str
    is_prefix_marked: bool = False
    is_suffix_marked: bool = False
    source: Source = Source.PLAIN_LIST

    def __post_init__(self):
        if not self.surface:
            raise ValueError("candidate surface must be non-empty")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"candidate surface contains whitespace: {self.surface!r}")
        if any(ch in HYPHENS for ch in self.surface):
            raise ValueError(f"candidate surface contains a hyphen: {self.surface!r}")

    @classmethod
    def parse(cls, token: str, source: Source = Source.PLAIN_LIST) -> "Candidate":
        """Parse a marked token such as ``-ssa`` or ``ta-`` into a candidate."""
        token = nfc(token.strip())
        suffix = bool(token) and token[0] in HYPHENS
        prefix = len(token) > 1 and token[-1] in HYPHENS
        surface = token[1 if suffix else 0: len(token) - 1 if prefix else len(token)]
        return cls(surface, is_prefix_marked=prefix, is_suffix_marked=suffix, source=source)

    def marked(self) -> str:
        """Surface with its hyphen markers restored."""
        return ("-" if self.is_suffix_marked else "") + self.surface + (
            "-" if self.is_prefix_marked else "")


@dataclass(frozen=True)
class AlphabetConfig:
    """Alphabet, whitelist and the pipeline parameters loaded from config JSON."""

    valid_chars: frozenset
    max_length: int = 30
    min_length: int = 1
    whitelist: frozenset = frozenset()
    support_m: int = 3
    epsilon: float = 1e-7
    max_iterations: int = 100
    otsu_bins: int = 256

    def __post_init__(self):
        object.__setattr__(self, "valid_chars", frozenset(nfc(c) for c in self.valid_chars))
        object.__setattr__(self, "whitelist", frozenset(nfc(c) for c in self.whitelist))
        for w in self.whitelist:
            if len(w) != 1:
                raise ConfigError(f"whitelist entry {w!r} is not a single character")
            if w not in self.valid_chars:
                raise ConfigError(f"whitelist entry {w!r} is not in the alphabet")
        if self.min_length < 1 or self.max_length < 1:
            raise ConfigError("length bounds must be positive")
        if self.min_length > self.max_length:
            raise ConfigError("min_length exceeds max_length")
        if self.support_m < 0:
            raise ConfigError("support_m must be non-negative")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.otsu_bins < 2:
            raise ConfigError("otsu_bins must be at least 2")

    @classmethod
    def from_dict(cls, data: Mapping) -> "AlphabetConfig":
        if "alphabet" not in data:
            raise ConfigError("config is missing 'alphabet'")
        alphabet = data["alphabet"]
        chars = alphabet if isinstance(alphabet, list) else list(nfc(alphabet))
        known = {"alphabet", "whitelist", "min_length", "max_length", "support_m",
                 "epsilon", "max_iterations", "otsu_bins", "language"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: data[k] for k in ("min_length", "max_length", "support_m",
                                       "max_iterations", "otsu_bins") if k in data}
        for k, v in kwargs.items():
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{k} must be an integer, got {v!r}")
        if "epsilon" in data:
            kwargs["epsilon"] = float(data["epsilon"])
        return cls(valid_chars=frozenset(chars),
                   whitelist=frozenset(data.get("whitelist", [])), **kwargs)

    def to_dict(self) -> dict:
        return {
            "alphabet": "".join(sorted(self.valid_chars)),
            "whitelist": sorted(self.whitelist),
            "min_length": self.min_length,
            "max_length": self.max_length,
            "support_m": self.support_m,
            "epsilon": self.epsilon,
            "max_iterations": self.max_iterations,
            "otsu_bins": self.otsu_bins,
        }

    def replace(self, **changes) -> "AlphabetConfig":
        data = asdict(self)
        data.update(changes)
        return AlphabetConfig(**data)


PRESETS = ("hu", "fi", "et")


def load_config(path) -> AlphabetConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return AlphabetConfig.from_dict(data)


def preset_config(language: str) -> AlphabetConfig:
    """Shipped alphabet preset for ``hu``, ``fi`` or ``et``."""
    if language not in PRESETS:
        raise ConfigError(f"no preset for language {language!r}; have {PRESETS}")
    text = resources.files("morphlex").joinpath(f"presets/{language}.json").read_text("utf-8")
    return AlphabetConfig.from_dict(json.loads(text))


@dataclass(frozen=True)
class ScoreTable:
    entries: Mapping[str, float]
    iteration: int = 0

    def __post_init__(self):
        for token, score in self.entries.items():
            if not 0.0 < score <= 1.0:
                raise ValueError(f"score for {token!r} outside (0, 1]: {score}")
            if score > (1.0 / len(token)) * (1.0 + SCORE_TOLERANCE):
                raise ValueError(f"score for {token!r} exceeds 1/|t|: {score}")

    def __getitem__(self, token: str) -> float:
        return self.entries[token]

    def __contains__(self, token) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def ranked(self) -> list:
        """Entries sorted by score descending, then token ascending."""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class MorphemeLexicon:
    morphemes: tuple
    threshold_used: float = 0.0
    language_tag: str = ""

    def __post_init__(self):
        if len(set(self.morphemes)) != len(self.morphemes):
            raise ValueError("lexicon contains duplicate morphemes")

    def __len__(self) -> int:
        return len(self.morphemes)

    def __iter__(self):
        return iter(self.morphemes)

    def __contains__(self, item) -> bool:
        return item in self.morphemes


@dataclass(frozen=True)
class Decomposition:
    parts: tuple
    total_score: float = field(compare=False)

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("a decomposition needs at least two parts")

    @property
    def surface(self) -> str:
        return "".join(self.parts)


def _read_lines(path) -> list[str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = []
    for lineno, chunk in enumerate(raw.split(b"\n"), 1):
        try:
            lines.append(chunk.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise InputError(f"{path}:{lineno}: invalid UTF-8 ({exc.reason})") from exc
    return lines


def read_candidate_file(path, source: Source = Source.PLAIN_LIST) -> list[Candidate]:
    candidates = []
    for lineno, line in enumerate(_read_lines(path), 1):
        token = line.strip()
        if not token or all(ch in HYPHENS for ch in token):
            continue
        try:
            candidates.append(Candidate.parse(token, source))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    return candidates


def write_candidate_file(candidates: Iterable[Candidate], path) -> None:
    text = "".join(c.marked() + "\n" for c in candidates)
    Path(path).write_text(text, encoding="utf-8")


def format_score(score: float) -> str:
    return f"{score:.12g}"


def write_score_table(table: ScoreTable, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["token", "score"])
    for token, score in table.ranked():
        writer.writerow([token, format_score(score)])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_score_table(path, iteration: int = 0) -> ScoreTable:
    lines = _read_lines(path)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header != ["token", "score"]:
        raise InputError(f"{path}:1: expected header 'token,score'")
    entries = {}
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != 2:
            raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            score = float(row[1])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: bad score {row[1]!r}") from exc
        if not row[0]:
            raise InputError(f"{path}:{lineno}: empty token")
        # 12 printed digits can round 1/|t| upward; snap back onto the cap
        cap = 1.0 / len(row[0])
        if cap < score <= cap * (1.0 + PRINT_TOLERANCE):
            score = cap
        entries[row[0]] = score
    return ScoreTable(entries, iteration)


def write_lexicon(lexicon: MorphemeLexicon, path) -> None:
    Path(path).write_text("".join(m + "\n" for m in sorted(lexicon.morphemes)),
                          encoding="utf-8")


def read_lexicon(path, language_tag: str = "") -> MorphemeLexicon:
    seen = dict.fromkeys(nfc(line.strip()) for line in _read_lines(path) if line.strip())
    return MorphemeLexicon(tuple(seen), language_tag=language_tag)
