"""Piecewise-affine contractions, certified Banach iteration, 1-D Lipschitz extension."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .numerics import RInterval, format_rational, parse_rational, rat


class NotAContraction(ValueError):
    """Raised when an operation needs Lipschitz constant < 1 and did not get it."""


class IncompatibleData(ValueError):
    """Raised by :func:`lipschitz_extend_1d` with the offending pair attached."""

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class PiecewiseAffineMap:
    """Continuous piecewise-affine map of the line.

    Affine interpolation between consecutive breakpoints ``(t, v)`` and
    constant (equal to the boundary value) outside ``[t_first, t_last]``.
    """

    __slots__ = ("ts", "vs", "_slopes")

    def __init__(self, breakpoints: Iterable[tuple]):
        pts = [(rat(t), rat(v)) for t, v in breakpoints]
        if not pts:
            raise ValueError("a piecewise-affine map needs at least one breakpoint")
        for (t0, _), (t1, _) in zip(pts, pts[1:]):
            if not t0 < t1:
                raise ValueError(f"breakpoint abscissae must increase strictly ({t0}, {t1})")
        self.ts = tuple(t for t, _ in pts)
        self.vs = tuple(v for _, v in pts)
        self._slopes = tuple(
            (self.vs[i + 1] - self.vs[i]) / (self.ts[i + 1] - self.ts[i])
            for i in range(len(self.ts) - 1)
        )

    @classmethod
    def affine(cls, slope, intercept, lo=-1, hi=2) -> "PiecewiseAffineMap":
        """x -> slope*x + intercept on [lo, hi], constant beyond."""
        slope, intercept, lo, hi = rat(slope), rat(intercept), rat(lo), rat(hi)
        return cls([(lo, slope * lo + intercept), (hi, slope * hi + intercept)])

    @classmethod
    def constant(cls, value) -> "PiecewiseAffineMap":
        return cls([(0, value)])

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.ts, self.vs))

    @property
    def slopes(self) -> tuple[Fraction, ...]:
        return self._slopes

    def __call__(self, x) -> Fraction:
        return eval_map(self, x)

    def __eq__(self, other):
        if isinstance(other, PiecewiseAffineMap):
            return self.ts == other.ts and self.vs == other.vs
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"({t}, {v})" for t, v in self.breakpoints)
        return f"PiecewiseAffineMap([{inner}])"

    def pieces(self):
        """Yield ``(lo, hi, slope, intercept)`` for every affine piece, tails included.

        ``lo``/``hi`` are ``None`` for the unbounded tails.
        """
        ts, vs = self.ts, self.vs
        yield None, ts[0], Fraction(0), vs[0]
        for i, s in enumerate(self._slopes):
            yield ts[i], ts[i + 1], s, vs[i] - s * ts[i]
        yield ts[-1], None, Fraction(0), vs[-1]

    def to_json(self) -> dict:
        return {"breakpoints": [[format_rational(t), format_rational(v)] for t, v in self.breakpoints]}

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseAffineMap":
        try:
            raw = data["breakpoints"]
            return cls((parse_rational(t), parse_rational(v)) for t, v in raw)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed map JSON: {exc}") from exc


def eval_map(f: PiecewiseAffineMap, x) -> Fraction:
    x = rat(x)
    ts, vs = f.ts, f.vs
    if x <= ts[0]:
        return vs[0]
    if x >= ts[-1]:
        return vs[-1]
    i = bisect.bisect_right(ts, x) - 1
    return vs[i] + f.slopes[i] * (x - ts[i])


def lipschitz(f: PiecewiseAffineMap) -> Fraction:
    return max((abs(s) for s in f.slopes), default=Fraction(0))


def image_interval(f: PiecewiseAffineMap, interval: RInterval) -> RInterval:
    """Exact image of a closed interval: extremes sit at endpoints or interior breakpoints."""
    lo, hi = interval.lo, interval.hi
    values = [eval_map(f, lo), eval_map(f, hi)]
    i = bisect.bisect_right(f.ts, lo)
    j = bisect.bisect_left(f.ts, hi)
    values.extend(f.vs[i:j])
    return RInterval(min(values), max(values))


def exact_fixed_point(f: PiecewiseAffineMap) -> Fraction:
    """The unique solution of f(x) = x for a contraction.

    g(x) = f(x) - x is continuous and strictly decreasing, so the root is
    found by locating the first breakpoint where g changes sign.
    """
    if lipschitz(f) >= 1:
        raise NotAContraction(f"Lipschitz constant {lipschitz(f)} is not below 1")
    ts, vs = f.ts, f.vs
    if vs[0] <= ts[0]:
        return vs[0]
    if vs[-1] >= ts[-1]:
        return vs[-1]
    # g(ts[0]) > 0 > g(ts[-1]); find the piece where g crosses zero
    for i, s in enumerate(f.slopes):
        if vs[i + 1] - ts[i + 1] <= 0:
            # vs[i] + s (x - ts[i]) = x
            return (vs[i] - s * ts[i]) / (1 - s)
    raise AssertionError("unreachable: sign change must occur")


@dataclass(frozen=True)
class FixedPointCertificate:
    q: Fraction
    n: int
    x_n: Fraction
    bound: Fraction

    def to_json(self) -> dict:
        return {
            "q": format_rational(self.q),
            "n": self.n,
            "x_n": format_rational(self.x_n),
            "bound": format_rational(self.bound),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FixedPointCertificate":
        return cls(parse_rational(data["q"]), int(data["n"]),
                   parse_rational(data["x_n"]), parse_rational(data["bound"]))


def banach_iterate(f: PiecewiseAffineMap, x0, tol) -> FixedPointCertificate:
    """Iterate until the a-posteriori bound q/(1-q)·|x_n - x_{n-1}| is at most tol."""
    q = lipschitz(f)
    if q >= 1:
        raise NotAContraction(f"Lipschitz constant {q} is not below 1")
    tol = rat(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    factor = q / (1 - q)
    prev, x, n = None, rat(x0), 0
    while True:
        prev, x, n = x, eval_map(f, x), n + 1
        bound = factor * abs(x - prev)
        if bound <= tol:
            return FixedPointCertificate(q, n, x, bound)


@dataclass(frozen=True)
class MapOracle:
    """An exactly evaluable map with a declared (not proved) Lipschitz bound."""

    fn: Callable[[Fraction], Fraction]
    bound: Fraction
    domain: Optional[RInterval] = None  # None means the whole line
    name: str = field(default="oracle", compare=False)

    def __call__(self, x) -> Fraction:
        x = rat(x)
        if self.domain is not None and not self.domain.contains(x):
            raise ValueError(f"{x} outside the domain {self.domain} of {self.name}")
        return self.fn(x)

    @classmethod
    def from_map(cls, f: PiecewiseAffineMap) -> "MapOracle":
        return cls(lambda x: eval_map(f, x), lipschitz(f), None, name="piecewise-affine")


def empirical_lipschitz(f: MapOracle, pairs: Sequence[tuple]) -> Fraction:
    """Largest observed difference quotient: a lower bound on the true constant."""
    if not pairs:
        raise ValueError("empirical_lipschitz needs at least one pair")
    best = None
    for x, y in pairs:
        x, y = rat(x), rat(y)
        if x == y:
            raise ValueError(f"pair ({x}, {y}) has equal components")
        ratio = abs(f(x) - f(y)) / abs(x - y)
        if best is None or ratio > best:
            best = ratio
    return best


def lipschitz_extend_1d(data: Iterable[tuple], L) -> MapOracle:
    """McShane lower envelope g(x) = min_i (y_i + L|x - x_i|).

    Compatibility is checked on consecutive nodes after sorting, which
    suffices on the line by the triangle inequality.
    """
    L = rat(L)
    if L < 0:
        raise ValueError("Lipschitz bound must be nonnegative")
    nodes = sorted((rat(x), rat(y)) for x, y in data)
    if not nodes:
        raise ValueError("no data to extend")
    for (x0, y0), (x1, y1) in zip(nodes, nodes[1:]):
        if abs(y1 - y0) > L * (x1 - x0):
            raise IncompatibleData(
                f"|{y1} - {y0}| > {L}·|{x1} - {x0}|", ((x0, y0), (x1, y1))
            )
    frozen = tuple(nodes)

    def envelope(x: Fraction) -> Fraction:
        return min(y + L * abs(x - xi) for xi, y in frozen)

    return MapOracle(envelope, L, None, name="mcshane")
