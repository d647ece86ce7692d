"""Driving terms lambda(t) of the chordal Loewner equation.

Four kinds are supported:

* ``zero``    -- lambda(t) = 0
* ``sqrt``    -- lambda(t) = c*sqrt(t) + b*t  (b defaults to 0; b != 0 gives an o(sqrt t) perturbation)
* ``power``   -- lambda(t) = A*t**alpha with 1/2 < alpha <= 4
* ``sampled`` -- a piecewise-constant table of (t, lambda) pairs.  With
  ``anchor="left"`` (default) sample k holds on [t_k, t_{k+1}); with
  ``anchor="right"`` it holds on (t_{k-1}, t_k], which is how the zipper
  pairs each capacity increment with its driving value.

All kinds satisfy lambda(0) = 0.  Evolutions sample the driver at the left
endpoint of every mesh interval, see :func:`eval_on_mesh`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DomainError

KINDS = ("zero", "sqrt", "power", "sampled")

ALPHA_MIN = 0.5
ALPHA_MAX = 4.0


@dataclass(frozen=True)
class DrivingTerm:
    kind: str
    c: float = 0.0
    b: float = 0.0
    A: float = 0.0
    alpha: float = 1.0
    times: np.ndarray = field(default=None, repr=False, compare=False)
    values: np.ndarray = field(default=None, repr=False, compare=False)
    anchor: str = "left"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown driving kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "power" and not (ALPHA_MIN < self.alpha <= ALPHA_MAX):
            raise ValueError(f"power-law exponent must lie in (1/2, 4], got {self.alpha}")
        if self.kind == "sampled":
            if self.times is None or self.values is None:
                raise ValueError("sampled driving term needs times and values")
            t = np.ascontiguousarray(self.times, dtype=float)
            v = np.ascontiguousarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 1:
                raise ValueError("sampled times/values must be 1-d arrays of equal nonzero length")
            if t[0] != 0.0 or v[0] != 0.0:
                raise ValueError("sampled table must start with (0, 0)")
            if self.anchor not in ("left", "right"):
                raise ValueError("anchor must be 'left' or 'right'")
            if t.size > 1 and np.any(np.diff(t) <= 0):
                raise ValueError("sampled times must be strictly increasing")
            if not np.all(np.isfinite(v)):
                raise ValueError("sampled values must be finite")
            t.setflags(write=False)
            v.setflags(write=False)
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "DrivingTerm":
        return cls("zero")

    @classmethod
    def sqrt(cls, c: float, b: float = 0.0) -> "DrivingTerm":
        return cls("sqrt", c=float(c), b=float(b))

    @classmethod
    def power(cls, A: float, alpha: float) -> "DrivingTerm":
        return cls("power", A=float(A), alpha=float(alpha))

    @classmethod
    def sampled(cls, times: Sequence[float], values: Sequence[float],
                anchor: str = "left") -> "DrivingTerm":
        return cls("sampled", times=np.asarray(times, float), values=np.asarray(values, float),
                   anchor=anchor)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DrivingTerm":
        kind = str(d.get("kind", "")).lower()
        if kind == "zero":
            return cls.zero()
        if kind == "sqrt":
            return cls.sqrt(float(d["c"]), float(d.get("b", 0.0)))
        if kind == "power":
            return cls.power(float(d["A"]), float(d["alpha"]))
        if kind == "sampled":
            pts = np.asarray(d["points"], dtype=float).reshape(-1, 2)
            return cls.sampled(pts[:, 0], pts[:, 1], d.get("anchor", "left"))
        raise ValueError(f"unknown driving kind {d.get('kind')!r}")

    @classmethod
    def from_json(cls, text: str) -> "DrivingTerm":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "sqrt":
            d = {"kind": "sqrt", "c": self.c}
            if self.b:
                d["b"] = self.b
            return d
        if self.kind == "power":
            return {"kind": "power", "A": self.A, "alpha": self.alpha}
        d = {"kind": "sampled", "points": np.column_stack([self.times, self.values]).tolist()}
        if self.anchor != "left":
            d["anchor"] = self.anchor
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # -- evaluation ---------------------------------------------------------

    @property
    def t_max(self) -> float:
        """Right end of the time domain (inf for closed-form kinds)."""
        if self.kind == "sampled":
            return float(self.times[-1])
        return math.inf

    def __call__(self, t):
        return evaluate(self, t)

    def scaled(self, n: float) -> "DrivingTerm":
        """Driver of the rescaled slit sqrt(n)*gamma(t/n), i.e. sqrt(n)*lambda(t/n)."""
        if n <= 0:
            raise ValueError("scale factor must be positive")
        if self.kind in ("zero",):
            return self
        if self.kind == "sqrt":
            return DrivingTerm.sqrt(self.c, self.b / math.sqrt(n))
        if self.kind == "power":
            return DrivingTerm.power(self.A * n ** (0.5 - self.alpha), self.alpha)
        return DrivingTerm.sampled(self.times * n, self.values * math.sqrt(n), self.anchor)

    def reflected(self) -> "DrivingTerm":
        """Driver of the mirror image of the slit in the imaginary axis."""
        if self.kind == "zero":
            return self
        if self.kind == "sqrt":
            return DrivingTerm.sqrt(-self.c, -self.b)
        if self.kind == "power":
            return DrivingTerm.power(-self.A, self.alpha)
        return DrivingTerm.sampled(self.times, -self.values, self.anchor)


def evaluate(term: DrivingTerm, t):
    """Return lambda(t); scalar in, float out, array in, array out."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(~np.isfinite(t_arr)):
        raise DomainError(f"driving term evaluated at invalid time {t!r}")
    if term.kind == "sampled" and np.any(t_arr > term.times[-1]):
        raise DomainError(
            f"time {t!r} beyond sampled domain [0, {term.times[-1]!r}]"
        )
    if term.kind == "zero":
        out = np.zeros_like(t_arr)
    elif term.kind == "sqrt":
        out = term.c * np.sqrt(t_arr)
        if term.b:
            out = out + term.b * t_arr
    elif term.kind == "power":
        out = term.A * t_arr ** term.alpha
    elif term.anchor == "left":
        idx = np.searchsorted(term.times, t_arr, side="right") - 1
        out = term.values[idx]
    else:
        idx = np.searchsorted(term.times, t_arr, side="left")
        out = term.values[idx]
    if np.ndim(t) == 0:
        return float(out)
    return out


def eval_on_mesh(term: DrivingTerm, mesh) -> np.ndarray:
    """One lambda per mesh interval, sampled at the interval's left endpoint.

    Right-anchored tables are read just after the left endpoint, so on their
    own sample grid interval k gets sample k.
    """
    nodes = np.asarray(getattr(mesh, "nodes", mesh), dtype=float)
    if nodes.size < 2:
        raise ValueError("mesh has no intervals")
    if term.kind == "sampled" and term.anchor == "right":
        left = nodes[:-1]
        if np.any(left < 0) or np.any(nodes[-1] > term.times[-1] * (1 + 1e-12)):
            raise DomainError("mesh extends beyond the sampled domain")
        idx = np.searchsorted(term.times, left, side="right")
        return term.values[np.minimum(idx, term.values.size - 1)].astype(float)
    return np.asarray(evaluate(term, nodes[:-1]), dtype=float)
