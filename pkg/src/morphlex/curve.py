"""Key points of an IPS-vs-vocabulary-size curve.

Only grid points are ever reported; nothing is interpolated.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core import EmptyDataError, InputError
from .metrics import integrated_performance_score

logger = logging.getLogger(__name__)

APPENDIX_LANGUAGES = ("hu", "et", "fi")


class GainMode(enum.Enum):
    ABSOLUTE_DELTA = "absolute"
    PER_UNIT_DELTA = "per_unit"


@dataclass(frozen=True)
class IpsCurve:
    ks: tuple
    ips: tuple

    def __post_init__(self):
        if len(self.ks) != len(self.ips):
            raise ValueError("k and ips columns differ in length")
        if not self.ks:
            raise EmptyDataError("curve has no points")
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise ValueError("k values must be strictly increasing")

    @classmethod
    def from_points(cls, points) -> "IpsCurve":
        points = list(points)
        return cls(tuple(int(k) for k, _ in points), tuple(float(v) for _, v in points))

    @property
    def points(self) -> list:
        return list(zip(self.ks, self.ips))

    def __len__(self) -> int:
        return len(self.ks)


@dataclass(frozen=True)
class Knee:
    k: int
    distinct: bool


def kneedle(curve: IpsCurve, sensitivity: float = 1.0) -> Knee:
    """Kneedle on raw points for a concave increasing curve.

    Both axes are min-max normalised and the difference curve ``y - x`` is
    scanned. After each local maximum the threshold is that maximum minus
    ``sensitivity`` times the mean x spacing; the knee is the local maximum
    whose difference value falls below its threshold before another local
    maximum appears. With no such point the global maximum of the difference
    curve is returned and ``distinct`` is False.
    """
    if len(curve) < 3:
        raise EmptyDataError("kneedle needs at least 3 points")
    x = np.asarray(curve.ks, dtype=np.float64)
    y = np.asarray(curve.ips, dtype=np.float64)
    if y[-1] < y[0]:
        logger.warning("IPS curve is not increasing overall; elbow may be meaningless")
    xn = (x - x.min()) / (x.max() - x.min())
    span = y.max() - y.min()
    if span == 0:
        return Knee(curve.ks[0], False)
    yn = (y - y.min()) / span
    d = yn - xn
    step = sensitivity * float(np.mean(np.diff(xn)))
    lmx = None
    for j in range(1, len(d)):
        if j < len(d) - 1 and d[j] > d[j - 1] and d[j] >= d[j + 1]:
            lmx = j
            continue
        if lmx is not None and d[j] < d[lmx] - step:
            return Knee(curve.ks[lmx], True)
    return Knee(curve.ks[int(np.argmax(d))], False)


def kneedle_elbow(curve: IpsCurve, sensitivity: float = 1.0) -> int:
    knee = kneedle(curve, sensitivity)
    if not knee.distinct:
        logger.warning("no distinct knee; using the maximum of the difference curve")
    return knee.k


def q90_point(curve: IpsCurve, fraction: float = 0.9) -> int:
    """Smallest grid k whose IPS reaches ``fraction`` of the curve maximum."""
    target = fraction * max(curve.ips)
    return next(k for k, v in curve.points if v >= target)


def max_gain_point(curve: IpsCurve, mode: GainMode = GainMode.ABSOLUTE_DELTA) -> int:
    if len(curve) < 2:
        raise EmptyDataError("max gain needs at least 2 points")
    best_k, best_gain = None, None
    for (k0, v0), (k1, v1) in zip(curve.points, curve.points[1:]):
        gain = v1 - v0
        if mode is GainMode.PER_UNIT_DELTA:
            gain /= (k1 - k0)
        if best_gain is None or gain > best_gain:
            best_k, best_gain = k1, gain
    return best_k


@dataclass(frozen=True)
class CurveAnalysis:
    k_elbow: int
    k_q90: int
    k_gain: int
    recommended_range: tuple
    gain_mode: str = GainMode.ABSOLUTE_DELTA.value
    distinct_knee: bool = True
    warnings: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "k_gain": self.k_gain,
            "k_gain_mode": self.gain_mode,
            "k_elbow": self.k_elbow,
            "k_q90": self.k_q90,
            "range": list(self.recommended_range),
            "distinct_knee": self.distinct_knee,
            "warnings": list(self.warnings),
        }


def recommend_range(curve: IpsCurve, sensitivity: float = 1.0,
                    gain_mode: GainMode = GainMode.ABSOLUTE_DELTA) -> CurveAnalysis:
    knee = kneedle(curve, sensitivity)
    k_q90 = q90_point(curve)
    k_gain = max_gain_point(curve, gain_mode)
    warnings = []
    if not knee.distinct:
        warnings.append("no distinct knee")
    if knee.k > k_q90:
        warnings.append("degenerate range: elbow lies above the 90% quality point")
        logger.warning(warnings[-1])
    return CurveAnalysis(knee.k, k_q90, k_gain, (knee.k, k_q90), gain_mode.value,
                         knee.distinct, tuple(warnings))


def _parse_curve_rows(lines, source) -> IpsCurve:
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise InputError(f"{source}:1: empty curve file")
    cols = [h.strip().lower() for h in header]
    if "k" not in cols or not ("ips" in cols or {"lmc", "osr"} <= set(cols)):
        raise InputError(f"{source}:1: header needs k,ips or k,lmc,osr; got {header}")
    use_ips = "ips" in cols and not {"lmc", "osr"} <= set(cols)
    points = []
    for lineno, row in enumerate(reader, 2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(cols):
            raise InputError(f"{source}:{lineno}: expected {len(cols)} fields, got {len(row)}")
        rec = dict(zip(cols, (cell.strip() for cell in row)))
        try:
            k = int(rec["k"])
            if use_ips:
                v = float(rec["ips"])
            else:
                v = integrated_performance_score(float(rec["lmc"]), float(rec["osr"]))
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from exc
        points.append((k, v))
    if not points:
        raise EmptyDataError(f"{source}: curve has no data rows")
    try:
        return IpsCurve.from_points(points)
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from exc


def read_curve_csv(path) -> IpsCurve:
    """Load ``k,ips`` or ``k,lmc,osr`` (IPS computed on load)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return _parse_curve_rows(text.splitlines(), path)


def write_curve_csv(curve: IpsCurve, path) -> None:
    rows = "".join(f"{k},{v!r}\n" for k, v in curve.points)
    Path(path).write_text("k,ips\n" + rows, encoding="utf-8")


def appendix_curve_path(language: str):
    if language not in APPENDIX_LANGUAGES:
        raise InputError(f"no bundled curve for {language!r}; have {APPENDIX_LANGUAGES}")
    return resources.files("morphlex").joinpath(f"data/appendix_{language}.csv")


def appendix_curve(language: str) -> IpsCurve:
    """Bundled published LMC/OSR grid for ``hu``, ``et`` or ``fi`` as an IPS curve."""
    path = appendix_curve_path(language)
    return _parse_curve_rows(path.read_text("utf-8").splitlines(), path.name)
