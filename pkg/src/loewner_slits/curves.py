"""Polyline slits in the closed upper half-plane."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Curve:
    """Polyline starting at the origin with every later vertex strictly above R.

    ``arclength[k]`` is the polyline length from the origin to vertex ``k``.
    Orientation matters: side 1 is to the right of the direction of travel,
    side 2 to the left.
    """

    points: np.ndarray
    arclength: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=complex)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a curve needs at least two points")
        if pts[0] != 0:
            raise ValueError("a curve must start at the origin")
        if np.any(pts[1:].imag <= 0):
            k = int(np.argmax(pts[1:].imag <= 0)) + 1
            raise ValueError(f"vertex {k} is not strictly in the upper half-plane")
        seg = np.abs(np.diff(pts))
        if np.any(seg == 0):
            raise ValueError("consecutive curve points coincide")
        pts.setflags(write=False)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        s.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "arclength", s)

    def __len__(self):
        return self.points.size

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    @property
    def tip(self) -> complex:
        return complex(self.points[-1])

    @property
    def max_segment(self) -> float:
        return float(np.max(np.diff(self.arclength)))

    @property
    def diameter(self) -> float:
        p = self.points
        if p.size > 2000:
            # cheap bound via bounding box is enough for step-size checks
            return float(np.hypot(np.ptp(p.real), np.ptp(p.imag)))
        return float(np.max(np.abs(p[:, None] - p[None, :])))

    def scaled(self, rho: float) -> "Curve":
        return Curve(self.points * rho)

    def reflected(self) -> "Curve":
        """Mirror image in the imaginary axis."""
        return Curve(-np.conj(self.points))


def hausdorff(a: np.ndarray, b: np.ndarray, chunk: int = 2048) -> float:
    """Symmetric Hausdorff distance between two finite point sets in C."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)

    def directed(x, y):
        worst = 0.0
        for i in range(0, x.size, chunk):
            d = np.abs(x[i:i + chunk, None] - y[None, :]).min(axis=1)
            worst = max(worst, float(d.max()))
        return worst

    return max(directed(a, b), directed(b, a))


def write_curve_csv(curve: Curve | np.ndarray, path=None) -> str:
    """Write ``x,y`` rows (header included); returns the text."""
    pts = curve.points if isinstance(curve, Curve) else np.asarray(curve, complex)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for p in pts:
        w.writerow([f"{p.real:.17g}", f"{p.imag:.17g}"])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, newline="")
    return text


def read_curve_csv(source) -> Curve:
    """Read an ``x,y`` CSV from a path, or from CSV text (any string containing a newline).

    Lines starting with '#' are skipped.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = str(source)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows or [c.strip().lower() for c in rows[0][:2]] != ["x", "y"]:
        raise ValueError("curve CSV must have header row 'x,y'")
    xy = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
    if xy.size == 0 or xy[0, 0] != 0 or xy[0, 1] != 0:
        raise ValueError("first curve row must be 0,0")
    return Curve(xy[:, 0] + 1j * xy[:, 1])
