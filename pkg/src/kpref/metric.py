"""Metric spaces used by the simulator: uniform, real line, explicit matrix.

Locations are plain values: integer point indices for uniform/explicit
metrics, and numbers (exact Fraction or float) for the line.  Metric objects
are immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from fractions import Fraction
from dataclasses import dataclass


class MetricError(ValueError):
    """Invalid location or malformed metric definition."""


@dataclass(frozen=True)
class MetricViolation:
    axiom: str            # "shape" | "diagonal" | "symmetry" | "negative" | "triangle"
    witness: tuple
    detail: str

    def __str__(self):
        return f"{self.axiom} violated at {self.witness}: {self.detail}"


class MetricSpace:
    kind = "abstract"

    def distance(self, a, b):
        raise NotImplementedError

    def check_location(self, loc):
        raise NotImplementedError

    def validate(self):
        """Return None if the metric axioms hold, else the first violation found."""
        return None

    def to_json(self):
        raise NotImplementedError


class UniformMetric(MetricSpace):
    """n locations, distance 1 between distinct points.  Never materializes a matrix."""

    kind = "uniform"

    def __init__(self, n):
        if not isinstance(n, int) or n < 1:
            raise MetricError(f"uniform metric needs a positive location count, got {n!r}")
        self.n = n

    def check_location(self, loc):
        if not isinstance(loc, int) or not 0 <= loc < self.n:
            raise MetricError(f"location {loc!r} out of range for uniform({self.n})")
        return loc

    def distance(self, a, b):
        self.check_location(a)
        self.check_location(b)
        return 0 if a == b else 1

    def to_json(self):
        return {"kind": "uniform", "n": self.n}

    def __repr__(self):
        return f"UniformMetric({self.n})"


class LineMetric(MetricSpace):
    """The real line; distance is absolute difference.

    Coordinates may be exact Fractions (preferred, keeps experiments
    bit-reproducible) or floats.  Comparisons on floats use no tolerance here;
    callers that mix representations should normalize first.
    """

    kind = "line"

    def check_location(self, loc):
        if isinstance(loc, bool) or not isinstance(loc, (int, float, Fraction)):
            raise MetricError(f"line location must be a number, got {loc!r}")
        if isinstance(loc, float) and (loc != loc or loc in (float("inf"), float("-inf"))):
            raise MetricError(f"line location must be finite, got {loc!r}")
        return loc

    def distance(self, a, b):
        self.check_location(a)
        self.check_location(b)
        return abs(a - b)

    def to_json(self):
        return {"kind": "line"}

    def __repr__(self):
        return "LineMetric()"


class ExplicitMetric(MetricSpace):
    """Finite metric given by an n x n distance matrix."""

    kind = "explicit"

    def __init__(self, matrix):
        self.matrix = tuple(tuple(row) for row in matrix)
        self.n = len(self.matrix)

    def check_location(self, loc):
        if not isinstance(loc, int) or not 0 <= loc < self.n:
            raise MetricError(f"location {loc!r} out of range for explicit({self.n})")
        return loc

    def distance(self, a, b):
        self.check_location(a)
        self.check_location(b)
        return self.matrix[a][b]

    def validate(self):
        m, n = self.matrix, self.n
        for row in m:
            if len(row) != n:
                return MetricViolation("shape", (n,), "matrix is not square")
        for i in range(n):
            if m[i][i] != 0:
                return MetricViolation("diagonal", (i,), f"d({i},{i}) = {m[i][i]}")
        for i in range(n):
            for j in range(n):
                if m[i][j] < 0:
                    return MetricViolation("negative", (i, j), f"d({i},{j}) = {m[i][j]}")
                if m[i][j] != m[j][i]:
                    return MetricViolation(
                        "symmetry", (i, j), f"d({i},{j})={m[i][j]} but d({j},{i})={m[j][i]}")
        for a in range(n):
            for c in range(n):
                for b in range(n):
                    if m[a][c] + m[c][b] < m[a][b]:
                        return MetricViolation(
                            "triangle", (a, c, b),
                            f"d({a},{b})={m[a][b]} > d({a},{c})+d({c},{b})={m[a][c] + m[c][b]}")
        return None

    def to_json(self):
        def num(x):
            if isinstance(x, Fraction):
                return str(x) if x.denominator != 1 else x.numerator
            return x
        return {"kind": "explicit", "d": [[num(x) for x in row] for row in self.matrix]}

    def __repr__(self):
        return f"ExplicitMetric(n={self.n})"


def metric_from_json(obj):
    """Parse the instance-file "metric" field."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise MetricError(f"bad metric spec: {obj!r}")
    kind = obj["kind"]
    if kind == "uniform":
        return UniformMetric(int(obj["n"]))
    if kind == "line":
        return LineMetric()
    if kind == "explicit":
        return ExplicitMetric([[parse_number(x) for x in row] for row in obj["d"]])
    raise MetricError(f"unknown metric kind {kind!r}")


def parse_number(raw):
    """JSON number or "p/q" string to an exact value; floats stay floats."""
    if isinstance(raw, bool):
        raise MetricError(f"bad numeric value {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        return Fraction(raw)
    raise MetricError(f"bad numeric value {raw!r}")


def parse_location(metric, raw):
    """Parse one location literal for the given metric."""
    if metric.kind in ("uniform", "explicit"):
        if not isinstance(raw, int):
            raise MetricError(f"{metric.kind} metric wants integer locations, got {raw!r}")
        return metric.check_location(raw)
    return metric.check_location(parse_number(raw))


def location_to_json(loc):
    if isinstance(loc, Fraction):
        return loc.numerator if loc.denominator == 1 else str(loc)
    return loc
