"""Exact rational region arithmetic in payoff space.

Two representations share the ``Region`` type:

* polygon mode (two players): a finite union of closed convex polygons,
  where segments and single points count as degenerate polygons;
* point mode (three or more players): a finite set of payoff vectors.

Nothing in here touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Point = tuple  # tuple of Fractions

# a*x + b*y <= c
HalfPlane = tuple


class GeometryError(ValueError):
    pass


def point(*coords) -> Point:
    return tuple(Fraction(c) for c in coords)


def cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _unique_sorted(items: Iterable, key=None) -> list:
    """Sorted without repeats. Avoids hashing: Fraction.__hash__ does a
    modular inverse per call and showed up in profiles."""
    out = []
    for x in sorted(items, key=key):
        if not out or out[-1] != x:
            out.append(x)
    return out


def convex_hull(points: Iterable[Point]) -> tuple:
    """Counterclockwise hull without collinear vertices, lexicographically
    smallest vertex first. Degenerate inputs give one or two vertices."""
    pts = _unique_sorted(points)
    if len(pts) <= 2:
        return tuple(pts)
    # orientation tests on an integer grid: same answers, no gcd per step
    scale = math.lcm(*(c.denominator for p in pts for c in p))
    grid = [
        (p[0].numerator * (scale // p[0].denominator), p[1].numerator * (scale // p[1].denominator))
        for p in pts
    ]

    def turn(o, a, b):
        o, a, b = grid[o], grid[a], grid[b]
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def chain(seq):
        out = []
        for k in seq:
            while len(out) >= 2 and turn(out[-2], out[-1], k) <= 0:
                out.pop()
            out.append(k)
        return out

    idx = range(len(pts))
    lower = chain(idx)
    upper = chain(reversed(idx))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return (pts[hull[0]],)
    return tuple(pts[k] for k in hull)


def _slack(h: HalfPlane, p: Point) -> tuple:
    """Slack of ``p`` against ``h`` as an unreduced integer fraction
    ``(num, den)`` with ``den > 0``. Skips the gcd work Fraction does on
    every operation, which dominates clipping time."""
    a, b, c = h
    x, y = p
    d1 = a.denominator * x.denominator
    d2 = b.denominator * y.denominator
    d3 = c.denominator
    num = (
        a.numerator * x.numerator * d2 * d3
        + b.numerator * y.numerator * d1 * d3
        - c.numerator * d1 * d2
    )
    return num, d1 * d2 * d3


def _side(h: HalfPlane, p: Point) -> Fraction:
    """Signed slack: <= 0 means p satisfies the half-plane."""
    num, den = _slack(h, p)
    return Fraction(num, den)


def _clip_vertices(vertices: Sequence[Point], h: HalfPlane) -> list:
    if len(vertices) == 1:
        return list(vertices) if _slack(h, vertices[0])[0] <= 0 else []
    out = []
    n = len(vertices)
    sides = [_slack(h, v) for v in vertices]
    for k in range(n):
        p, q = vertices[k], vertices[(k + 1) % n]
        (np_, dp), (nq, dq) = sides[k], sides[(k + 1) % n]
        if np_ <= 0:
            out.append(p)
        if (np_ < 0 < nq) or (nq < 0 < np_):
            t = Fraction(np_ * dq, np_ * dq - nq * dp)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


@dataclass(frozen=True)
class Polygon:
    """Closed convex polygon given by its canonical hull vertices."""

    vertices: tuple

    @classmethod
    def of(cls, points: Iterable) -> "Polygon":
        hull = convex_hull(tuple(Fraction(c) for c in p) for p in points)
        if not hull:
            raise GeometryError("polygon needs at least one vertex")
        return cls(hull)

    @property
    def dimension(self) -> int:
        return min(len(self.vertices) - 1, 2)

    def edges(self) -> list:
        v = self.vertices
        if len(v) == 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def halfplanes(self) -> list:
        return list(self._halfplanes)

    @cached_property
    def _halfplanes(self) -> list:
        # frozen instances still carry a __dict__, so caching is safe
        v = self.vertices
        if len(v) == 1:
            x, y = v[0]
            one, zero = Fraction(1), Fraction(0)
            return [(one, zero, x), (-one, zero, -x), (zero, one, y), (zero, -one, -y)]
        if len(v) == 2:
            p, q = v
            d0, d1 = q[0] - p[0], q[1] - p[1]
            line = (d1, -d0, d1 * p[0] - d0 * p[1])
            return [
                line,
                (-line[0], -line[1], -line[2]),
                (-d0, -d1, -(d0 * p[0] + d1 * p[1])),
                (d0, d1, d0 * q[0] + d1 * q[1]),
            ]
        out = []
        for p, q in self.edges():
            d0, d1 = q[0] - p[0], q[1] - p[1]
            out.append((d1, -d0, d1 * p[0] - d0 * p[1]))
        return out

    def contains(self, p: Point) -> bool:
        return all(_slack(h, p)[0] <= 0 for h in self._halfplanes)

    def clip(self, h: HalfPlane) -> Optional["Polygon"]:
        kept = _clip_vertices(self.vertices, h)
        return Polygon(convex_hull(kept)) if kept else None

    def clip_all(self, halfplanes: Iterable[HalfPlane]) -> Optional["Polygon"]:
        poly: Optional[Polygon] = self
        for h in halfplanes:
            poly = poly.clip(h)
            if poly is None:
                return None
        return poly

    def intersect(self, other: "Polygon") -> Optional["Polygon"]:
        return self.clip_all(other.halfplanes())

    def issubset(self, other: "Polygon") -> bool:
        return all(other.contains(v) for v in self.vertices)

    def efficient_chain(self) -> list:
        """Closed pieces (segments or points) of the polygon's own Pareto
        frontier, walking counterclockwise from the rightmost vertex."""
        v = self.vertices
        n = len(v)
        start = max(range(n), key=lambda k: (v[k][0], v[k][1]))
        stop = max(range(n), key=lambda k: (v[k][1], v[k][0]))
        if start == stop:
            return [Polygon((v[start],))]
        pieces = []
        k = start
        while k != stop:
            nxt = (k + 1) % n
            pieces.append(Polygon.of([v[k], v[nxt]]))
            k = nxt
        return pieces


def _centroid(poly: Polygon) -> Point:
    n = len(poly.vertices)
    return (
        sum(v[0] for v in poly.vertices) / n,
        sum(v[1] for v in poly.vertices) / n,
    )


def _difference_nonempty(poly: Polygon, holes: Sequence[Polygon]) -> bool:
    """Whether poly minus the union of holes has any point.

    Pieces are kept as (closure polygon, strict half-planes). A convex set
    cut by open half-planes is nonempty iff the centroid of its closure
    satisfies every strict inequality.
    """
    pieces = [(poly, [])]
    for hole in holes:
        nxt = []
        hps = hole.halfplanes()
        for closure, strict in pieces:
            prefix: Optional[Polygon] = closure
            for h in hps:
                if prefix is None:
                    break
                comp = (-h[0], -h[1], -h[2])
                part = prefix.clip(comp)
                if part is not None:
                    s = strict + [comp]
                    c = _centroid(part)
                    if all(_slack(g, c)[0] < 0 for g in s):
                        nxt.append((part, s))
                prefix = prefix.clip(h)
        pieces = nxt
        if not pieces:
            return False
    return bool(pieces)


@dataclass(frozen=True)
class Region:
    """Closed set of payoff vectors. Construct through ``Region.of`` or
    ``Region.of_points`` so the canonical form holds."""

    parts: tuple = ()
    points: Optional[tuple] = None

    @classmethod
    def of(cls, parts: Iterable[Polygon]) -> "Region":
        uniq = _unique_sorted(parts, key=lambda p: p.vertices)
        kept = [
            p for p in uniq if not any(q is not p and p.issubset(q) for q in uniq)
        ]
        return cls(tuple(kept))

    @classmethod
    def of_points(cls, points: Iterable[Point]) -> "Region":
        return cls((), tuple(sorted(set(tuple(Fraction(c) for c in p) for p in points))))

    @classmethod
    def empty(cls, point_mode: bool = False) -> "Region":
        return cls((), () if point_mode else None)

    @property
    def point_mode(self) -> bool:
        return self.points is not None

    def is_empty(self) -> bool:
        return not (self.points if self.point_mode else self.parts)

    def vertices(self) -> list:
        if self.point_mode:
            return list(self.points)
        return _unique_sorted(v for part in self.parts for v in part.vertices)

    def __bool__(self) -> bool:
        return not self.is_empty()


def _check_modes(a: Region, b: Region) -> None:
    if a.point_mode != b.point_mode:
        raise GeometryError("cannot combine polygon-mode and point-mode regions")


def intersect(a: Region, b: Region) -> Region:
    _check_modes(a, b)
    if a.point_mode:
        return Region.of_points(set(a.points) & set(b.points))
    out = []
    for p in a.parts:
        for q in b.parts:
            r = p.intersect(q)
            if r is not None:
                out.append(r)
    return Region.of(out)


def intersect_all(regions: Sequence[Region]) -> Region:
    acc = regions[0]
    for r in regions[1:]:
        acc = intersect(acc, r)
    return acc


def union(a: Region, b: Region) -> Region:
    _check_modes(a, b)
    if a.point_mode:
        return Region.of_points(set(a.points) | set(b.points))
    return Region.of(a.parts + b.parts)


def clip(r: Region, halfplanes: Sequence[HalfPlane]) -> Region:
    if r.point_mode:
        raise GeometryError("half-plane clipping needs polygon mode")
    out = [p.clip_all(halfplanes) for p in r.parts]
    return Region.of(q for q in out if q is not None)


def contains(r: Region, p: Sequence) -> bool:
    p = tuple(Fraction(c) for c in p)
    if r.point_mode:
        return p in set(r.points)
    if len(p) != 2:
        raise GeometryError("polygon-mode regions are two-dimensional")
    return any(part.contains(p) for part in r.parts)


def issubset(a: Region, b: Region) -> bool:
    _check_modes(a, b)
    if a.point_mode:
        return set(a.points) <= set(b.points)
    return not any(_difference_nonempty(p, b.parts) for p in a.parts)


def same_set(a: Region, b: Region) -> bool:
    """Set equality, independent of how the union is split into parts."""
    return issubset(a, b) and issubset(b, a)


def weakly_dominated_strictly(x: Point, y: Point) -> bool:
    """True when y >= x everywhere and y != x."""
    return x != y and all(b >= a for a, b in zip(x, y))


def _dominated_by_part(part: Polygon, x: Point) -> bool:
    above = part.clip_all(
        [(Fraction(-1), Fraction(0), -x[0]), (Fraction(0), Fraction(-1), -x[1])]
    )
    return above is not None and above.vertices != (x,)


def is_efficient(r: Region, x: Point) -> bool:
    """``x`` lies in ``r`` and no other point of ``r`` weakly dominates it.
    Cheaper than building the whole frontier."""
    if not contains(r, x):
        return False
    if r.point_mode:
        return not any(weakly_dominated_strictly(x, q) for q in r.points)
    return not any(_dominated_by_part(q, x) for q in r.parts)


def _param(seg: Polygon, p: Point) -> Fraction:
    a, b = seg.vertices
    return (p[0] - a[0]) / (b[0] - a[0])


def _at(seg: Polygon, t: Fraction) -> Point:
    a, b = seg.vertices
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def _breakpoints(seg: Polygon, other: Polygon) -> set:
    """Parameters on a frontier segment where domination by ``other`` can
    switch: axis lines through its vertices and crossings with its edges."""
    a, b = seg.vertices
    ts = set()
    for w in other.vertices:
        ts.add((w[0] - a[0]) / (b[0] - a[0]))
        ts.add((w[1] - a[1]) / (b[1] - a[1]))
    for p, q in other.edges():
        # crossing of seg's line with the edge's line
        h = (q[1] - p[1], -(q[0] - p[0]), (q[1] - p[1]) * p[0] - (q[0] - p[0]) * p[1])
        sa, sb = _side(h, a), _side(h, b)
        if sa != sb:
            ts.add(sa / (sa - sb))
    return {t for t in ts if 0 <= t <= 1}


def frontier(r: Region) -> Region:
    """Closure of the Pareto-efficient subset of ``r``.

    For a union of convex sets the efficient subset need not be closed;
    its closure is returned. No point of the result strictly dominates
    another in every coordinate.
    """
    if r.is_empty():
        raise GeometryError("frontier of an empty region")
    if r.point_mode:
        pts = r.points
        return Region.of_points(
            p for p in pts if not any(weakly_dominated_strictly(p, q) for q in pts)
        )
    out = []
    parts = r.parts
    for idx, part in enumerate(parts):
        others = [q for k, q in enumerate(parts) if k != idx]

        def free(x):
            return not any(_dominated_by_part(q, x) for q in others)

        for piece in part.efficient_chain():
            if len(piece.vertices) == 1:
                if free(piece.vertices[0]):
                    out.append(piece)
                continue
            ts = {Fraction(0), Fraction(1)}
            for q in others:
                ts |= _breakpoints(piece, q)
            ts = sorted(ts)
            for t0, t1 in zip(ts, ts[1:]):
                if free(_at(piece, (t0 + t1) / 2)):
                    out.append(Polygon.of([_at(piece, t0), _at(piece, t1)]))
            for t in ts:
                x = _at(piece, t)
                if free(x):
                    out.append(Polygon((x,)))
    return Region.of(out)


# --- serialization -------------------------------------------------------


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_point(p: Sequence) -> str:
    return "(" + ", ".join(fmt(c) for c in p) + ")"


def region_to_json(r: Region):
    if r.point_mode:
        return {"points": [[fmt(c) for c in p] for p in r.points]}
    return [[[fmt(c) for c in v] for v in part.vertices] for part in r.parts]


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise ValueError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {s!r}") from exc
    raise ValueError(f"not a rational: {s!r}")


def region_from_json(data) -> Region:
    if isinstance(data, dict):
        return Region.of_points(
            tuple(parse_rational(c) for c in p) for p in data["points"]
        )
    return Region.of(
        Polygon.of([tuple(parse_rational(c) for c in v) for v in part]) for part in data
    )
