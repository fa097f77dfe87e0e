"""Hunspell ``.dic``/``.aff`` harvesting and wordlist loading.

Only surface strings are collected: stems from the dictionary and the ADD
string of every PFX/SFX rule. Rules are never applied, flags stay opaque.
"""

from __future__ import annotations

import enum
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .core import Candidate, InputError, Source, _read_lines, nfc

logger = logging.getLogger(__name__)


class AffixKind(enum.Enum):
    PREFIX = "PFX"
    SUFFIX = "SFX"


@dataclass(frozen=True)
class DicEntry:
    stem: str
    flags: str = ""

    def __post_init__(self):
        if not self.stem:
            raise ValueError("empty stem")


@dataclass(frozen=True)
class AffRule:
    kind: AffixKind
    affix_string: str

    def __post_init__(self):
        if not self.affix_string:
            raise ValueError("empty affix string")


def _split_flags(field: str) -> tuple[str, str]:
    # A backslash escapes a literal slash inside the stem.
    i = 0
    while i < len(field):
        if field[i] == "\\":
            i += 2
            continue
        if field[i] == "/":
            return field[:i].replace("\\/", "/"), field[i + 1:]
        i += 1
    return field.replace("\\/", "/"), ""


def parse_dic(path) -> list[DicEntry]:
    lines = _read_lines(path)
    if lines and lines[0].startswith("﻿"):
        lines[0] = lines[0][1:]
    content = [ln.strip() for ln in lines]
    if not any(content):
        raise InputError(f"{path}: empty dictionary file")
    declared = None
    start = 0
    first = content[0].split()
    if first and first[0].isdigit():
        declared = int(first[0])
        start = 1
    entries = []
    for line in content[start:]:
        if not line or line.startswith("#"):
            continue
        stem, flags = _split_flags(line.split(None, 1)[0])
        if stem:
            entries.append(DicEntry(nfc(stem), flags))
    if declared is not None and declared != len(entries):
        logger.warning("%s: header declares %d entries, found %d", path, declared, len(entries))
    return entries


def parse_aff(path) -> list[AffRule]:
    rules = []
    for line in _read_lines(path):
        fields = line.split()
        if len(fields) < 4 or fields[0] not in ("PFX", "SFX"):
            continue
        # Header lines read "SFX flag cross_product count"; rule lines carry
        # strip and add fields, so a header has Y/N in the third slot.
        if len(fields) == 4 and fields[2] in ("Y", "N") and fields[3].isdigit():
            continue
        add = fields[3].split("/", 1)[0]
        if add == "0" or not add:
            continue
        rules.append(AffRule(AffixKind(fields[0]), nfc(add)))
    return rules


def merge_candidates(stems: Iterable[DicEntry], affixes: Iterable[AffRule]) -> list[Candidate]:
    merged: dict[tuple, Candidate] = {}
    for entry in stems:
        cand = Candidate.parse(entry.stem, Source.DIC_STEM) if _parsable(entry.stem) else None
        if cand is not None:
            key = (cand.surface, cand.is_prefix_marked, cand.is_suffix_marked)
            merged.setdefault(key, cand)
    for rule in affixes:
        surface = rule.affix_string
        if not _parsable(surface):
            continue
        cand = Candidate(surface,
                         is_prefix_marked=rule.kind is AffixKind.PREFIX,
                         is_suffix_marked=rule.kind is AffixKind.SUFFIX,
                         source=Source.AFF_ENTRY)
        merged.setdefault((cand.surface, cand.is_prefix_marked, cand.is_suffix_marked), cand)
    return list(merged.values())


def _parsable(text: str) -> bool:
    """Whether a harvested string can become a Candidate at all.

    Hunspell stems may contain spaces or inner hyphens (multiword entries,
    compounds). Those are left for the prefilter to see only if they fit the
    Candidate invariants; otherwise they are skipped here.
    """
    stripped = text.strip("-")
    return bool(stripped) and not any(ch.isspace() or ch == "-" for ch in stripped)


def strip_edge_punctuation(word: str) -> str:
    start, end = 0, len(word)
    while start < end and unicodedata.category(word[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(word[end - 1]).startswith("P"):
        end -= 1
    return word[start:end]


_WS = re.compile(r"\s+")


def iter_words(stream: TextIO | Iterable[str], lowercase: bool = False):
    """Yield NFC, edge-punctuation-stripped words from a text stream."""
    for line in stream:
        for raw in _WS.split(nfc(line)):
            word = strip_edge_punctuation(raw)
            if word:
                yield word.lower() if lowercase else word


def load_wordlist(path, cap: int | None = None, lowercase: bool = False) -> list[str]:
    """Unique words of a text file in first-seen order, truncated at ``cap``."""
    if cap is not None and cap < 1:
        raise ValueError("cap must be a positive integer")
    words: dict[str, None] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for word in iter_words(fh, lowercase):
                if word not in words:
                    words[word] = None
                    if cap is not None and len(words) >= cap:
                        break
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: invalid UTF-8 ({exc.reason})") from exc
    return list(words)


def write_dic(entries: Iterable[DicEntry], path) -> None:
    entries = list(entries)
    body = "".join(e.stem + (f"/{e.flags}" if e.flags else "") + "\n" for e in entries)
    Path(path).write_text(f"{len(entries)}\n{body}", encoding="utf-8")
