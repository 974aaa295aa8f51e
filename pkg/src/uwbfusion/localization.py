"""Single-epoch position fixes from anchor ranges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import Anchor
from .errors import DegenerateGeometryError, EmptyInputError, UnderdeterminedError

RangeList = Sequence[Tuple[Anchor, float]]


@dataclass(frozen=True)
class BoundingBox:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_lo + self.x_hi) / 2.0, (self.y_lo + self.y_hi) / 2.0)

    @property
    def is_empty(self) -> bool:
        return self.x_lo > self.x_hi or self.y_lo > self.y_hi


def _columns(ranges):
    ax = np.array([a.x for a, _ in ranges], dtype=float)
    ay = np.array([a.y for a, _ in ranges], dtype=float)
    d = np.array([dist for _, dist in ranges], dtype=float)
    return ax, ay, d


def min_max_box(ranges: RangeList) -> BoundingBox:
    """Intersection of the axis-aligned squares ``anchor +/- distance``.

    Bounds may come out crossed when the squares do not overlap.
    """
    if len(ranges) == 0:
        raise EmptyInputError("min_max needs at least one range")
    ax, ay, d = _columns(ranges)
    if np.any(d < 0):
        raise ValueError("negative distance")
    return BoundingBox(
        float(np.max(ax - d)), float(np.min(ax + d)),
        float(np.max(ay - d)), float(np.min(ay + d)),
    )


def min_max(ranges: RangeList) -> tuple[float, float]:
    """Min-Max position estimate: the center of :func:`min_max_box`."""
    return min_max_box(ranges).center


def multilateration_ls(ranges: RangeList) -> tuple[float, float]:
    """Linearized least-squares multilateration.

    Each circle equation minus the first anchor's gives a linear system
    ``A p = b``, solved in the least-squares sense.
    """
    if len(ranges) < 3:
        raise UnderdeterminedError(f"multilateration needs >= 3 ranges, got {len(ranges)}")
    ax, ay, d = _columns(ranges)
    A = 2.0 * np.column_stack([ax[1:] - ax[0], ay[1:] - ay[0]])
    b = (d[0] ** 2 - d[1:] ** 2) + (ax[1:] ** 2 - ax[0] ** 2) + (ay[1:] ** 2 - ay[0] ** 2)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-9 * sv[0]:
        raise DegenerateGeometryError("anchors are collinear or coincident")
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(p[0]), float(p[1])
