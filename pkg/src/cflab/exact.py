"""Exact rational arithmetic over continued-fraction digit streams.

Irrationals are represented only through their digit streams. Every
comparison against a rational threshold goes through a certified rational
enclosure that is narrowed until strict inequality becomes visible, so no
floating point ever enters a certified result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

BigRational = Fraction

HALF = Fraction(1, 2)

# how many times a comparison may halve its precision before giving up;
# equality is impossible (irrational vs rational), so hitting the cap
# means the descriptor itself is broken
REFINEMENT_CAP = 256


class MalformedDescriptorError(ValueError):
    """A digit source emitted a partial quotient below 1 (or broke its bound)."""


class InvalidPrecisionError(ValueError):
    """Requested enclosure width is not a positive rational."""


class UndecidedError(RuntimeError):
    """A certified comparison did not resolve within the refinement cap."""


@dataclass(frozen=True)
class ConvergentPair:
    """Convergent p/q at index n together with its predecessor."""

    n: int
    p: int
    q: int
    p_prev: int
    q_prev: int

    def ratio(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class RationalEnclosure:
    """Closed rational interval [lo, hi] guaranteed to contain a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"enclosure bounds out of order: {self.lo} > {self.hi}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi


class RealDescriptor:
    """An irrational given by its continued-fraction digits a_0; a_1 a_2 ...

    The digit source is either a finite prefix followed by an eventually
    periodic tail, or a pure rule n -> a_n with an optional digit bound.
    Digits are memoized so that replays (and concurrent readers) always see
    the identical stream.
    """

    def __init__(self, a0: int, prefix: Sequence[int] = (), period: Sequence[int] | None = None,
                 rule: Callable[[int], int] | None = None, digit_bound: int | None = None,
                 label: str | None = None):
        if period is not None and rule is not None:
            raise MalformedDescriptorError("descriptor takes a periodic tail or a rule, not both")
        if period is None and rule is None:
            raise MalformedDescriptorError(
                "descriptor needs an infinite digit source (periodic tail or rule)")
        if period is not None and len(period) == 0:
            raise MalformedDescriptorError("empty period")
        self.a0 = int(a0)
        self.prefix = tuple(int(d) for d in prefix)
        self.period = tuple(int(d) for d in period) if period is not None else None
        self.rule = rule
        self.digit_bound = digit_bound
        self.label = label
        for d in self.prefix + (self.period or ()):
            self._check_digit(d)
        self._digits: list[int] = list(self.prefix)  # memo for rule digits too
        # convergent memo: index i holds (p_i, q_i); virtual start p_-1/q_-1 = 1/0
        self._conv: list[tuple[int, int]] = [(self.a0, 1)]

    def _check_digit(self, d: int) -> int:
        if d < 1:
            raise MalformedDescriptorError(f"partial quotient {d} < 1")
        if self.digit_bound is not None and d > self.digit_bound:
            raise MalformedDescriptorError(
                f"digit {d} exceeds declared bound {self.digit_bound}")
        return d

    def digit(self, n: int) -> int:
        """a_n for n >= 1."""
        if n < 1:
            raise ValueError("digit index starts at 1")
        if self.period is not None:
            if n <= len(self.prefix):
                return self.prefix[n - 1]
            return self.period[(n - len(self.prefix) - 1) % len(self.period)]
        while len(self._digits) < n:
            self._digits.append(self._check_digit(int(self.rule(len(self._digits) + 1))))
        return self._digits[n - 1]

    def convergent(self, n: int) -> ConvergentPair:
        """Convergent pair at index n >= 0 (p_-1/q_-1 = 1/0 convention)."""
        if n < 0:
            raise ValueError("convergent index starts at 0")
        while len(self._conv) <= n:
            i = len(self._conv)
            a = self.digit(i)
            p1, q1 = self._conv[i - 1]
            p0, q0 = self._conv[i - 2] if i >= 2 else (1, 0)
            self._conv.append((a * p1 + p0, a * q1 + q0))
        p, q = self._conv[n]
        pp, qp = self._conv[n - 1] if n >= 1 else (1, 0)
        return ConvergentPair(n, p, q, pp, qp)

    def __repr__(self):
        if self.label:
            return f"RealDescriptor({self.label!r})"
        if self.period is not None:
            return f"RealDescriptor(a0={self.a0}, prefix={self.prefix}, period={self.period})"
        return f"RealDescriptor(a0={self.a0}, rule=..., bound={self.digit_bound})"


def cf_digits(x: RealDescriptor, n: int) -> list[int]:
    """Digits a_0 .. a_n as emitted by the descriptor."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return [x.a0] + [x.digit(i) for i in range(1, n + 1)]


def convergents(x: RealDescriptor, n: int) -> ConvergentPair:
    return x.convergent(n)


def _dist_to_int(num: int, den: int) -> Fraction:
    """|| num/den || computed exactly."""
    r = num % den
    return Fraction(min(r, den - r), den)


def dist_enclosure(q: int, x: RealDescriptor, eps: Fraction) -> RationalEnclosure:
    """Certified enclosure of ||q*x|| with width <= eps.

    Uses a convergent p_m/q_m deep enough that |x - p_m/q_m| <= 1/q_m^2
    forces the padded error q/q_m^2 below eps/2, then evaluates
    ||q * p_m/q_m|| exactly.
    """
    if eps <= 0:
        raise InvalidPrecisionError(f"eps must be positive, got {eps}")
    if q < 1:
        raise ValueError("q must be >= 1")
    m = 1
    conv = x.convergent(m)
    # need 2*q/q_m^2 <= eps
    while 2 * q * eps.denominator > eps.numerator * conv.q * conv.q:
        m += 1
        conv = x.convergent(m)
    t = _dist_to_int(q * conv.p, conv.q)
    pad = Fraction(q, conv.q * conv.q)
    lo = max(Fraction(0), t - pad)
    hi = min(HALF, t + pad)
    return RationalEnclosure(lo, hi)


def decide_gt(q: int, x: RealDescriptor, c: Fraction) -> bool:
    """Exact truth value of ||q*x|| > c for rational c.

    ||q*x|| is irrational while c is rational, so equality cannot occur and
    the refinement loop always terminates (the cap only trips on broken
    descriptors).
    """
    c = Fraction(c)
    if c < 0:
        return True
    if c >= HALF:
        return False
    eps = Fraction(1, 4)
    for _ in range(REFINEMENT_CAP + 1):
        enc = dist_enclosure(q, x, eps)
        if enc.lo > c:
            return True
        if enc.hi < c:
            return False
        eps /= 2
    raise UndecidedError(f"||{q}*x|| vs {c} undecided after {REFINEMENT_CAP} refinements")


def decide_frac_gt(q: int, x: RealDescriptor, c: Fraction) -> bool:
    """Exact truth value of frac(q*x) > c (used for sign-of-half case splits)."""
    c = Fraction(c)
    if c < 0:
        return True
    if c >= 1:
        return False
    eps = Fraction(1, 4)
    for _ in range(REFINEMENT_CAP + 1):
        conv = x.convergent(1)
        m = 1
        while 2 * q * eps.denominator > eps.numerator * conv.q * conv.q:
            m += 1
            conv = x.convergent(m)
        t = Fraction((q * conv.p) % conv.q, conv.q)
        pad = Fraction(q, conv.q * conv.q)
        if t - pad > c:
            return True
        if t + pad < c:
            return False
        eps /= 2
    raise UndecidedError(f"frac({q}*x) vs {c} undecided")


def cf_of_rational(r) -> list[int]:
    """Canonical continued fraction of a rational (last digit >= 2).

    The Euclidean expansion is normalized so [..., a, 1] collapses to
    [..., a+1]; evaluating the digits reconstructs r exactly.
    """
    r = Fraction(r)
    a0 = r.numerator // r.denominator
    digits = [a0]
    frac = r - a0
    while frac:
        r = 1 / frac
        a = r.numerator // r.denominator
        digits.append(a)
        frac = r - a
    if len(digits) > 1 and digits[-1] == 1:
        digits.pop()
        digits[-1] += 1
    return digits


def cf_evaluate(digits: Sequence[int]) -> Fraction:
    """Value of a finite continued fraction [a_0; a_1, ..., a_n]."""
    if not digits:
        raise ValueError("empty digit list")
    p, q = digits[0], 1
    pp, qp = 1, 0
    for a in digits[1:]:
        p, pp = a * p + pp, p
        q, qp = a * q + qp, q
    return Fraction(p, q)


def lacunarity_lower_bound(x: RealDescriptor, depth: int, start: int = 1) -> Fraction:
    """Exact min of q_n/q_{n-1} over start <= n <= depth.

    Note q_1/q_0 = a_1 can equal 1 (all-ones streams), so callers wanting a
    bound > 1 either start the window at n >= 2 or use the digit-bound route
    below.
    """
    if depth < start:
        raise ValueError("depth must be >= start")
    best = None
    for n in range(start, depth + 1):
        conv = x.convergent(n)
        ratio = Fraction(conv.q, conv.q_prev)
        if best is None or ratio < best:
            best = ratio
    return best


def lacunarity_from_digit_bound(bound: int) -> Fraction:
    """Analytic ratio floor 1 + 1/(B+1) valid from n >= 2 for digit bound B."""
    if bound < 1:
        raise ValueError("digit bound must be >= 1")
    return 1 + Fraction(1, bound + 1)


# --- certified natural logarithm ------------------------------------------
#
# ln enclosures back every comparison that mixes a linear and a logarithmic
# quantity.  Argument reduction to [1,2) by powers of two, then the atanh
# series 2*sum z^(2j+1)/(2j+1) with z = (m-1)/(m+1) <= 1/3 and an explicit
# geometric tail bound.  All arithmetic is exact.

_LN2_CACHE: dict[int, RationalEnclosure] = {}


def _atanh_series(z: Fraction, width: Fraction) -> RationalEnclosure:
    # 2*atanh(z) for 0 <= z < 1; enclosure width <= width
    if z == 0:
        return RationalEnclosure(Fraction(0), Fraction(0))
    z2 = z * z
    term = 2 * z
    total = Fraction(0)
    j = 0
    while True:
        total += term / (2 * j + 1)
        # remaining tail < term*z2/(2j+3) * 1/(1-z2)
        tail = term * z2 / ((2 * j + 3) * (1 - z2))
        if tail <= width:
            return RationalEnclosure(total, total + tail)
        term *= z2
        j += 1


def _ln2(width: Fraction) -> RationalEnclosure:
    key = width.denominator // max(width.numerator, 1)
    cached = _LN2_CACHE.get(key)
    if cached is None:
        cached = _atanh_series(Fraction(1, 3), width)
        _LN2_CACHE[key] = cached
    return cached


def _floor_log2(x: Fraction) -> int:
    n, d = x.numerator, x.denominator

    def at_least(e: int) -> bool:  # x >= 2^e, exactly
        return n >= d << e if e >= 0 else n << -e >= d

    e = n.bit_length() - d.bit_length()  # within one of the truth
    if not at_least(e):
        e -= 1
    if at_least(e + 1):
        e += 1
    return e


def ln_enclosure(x: Fraction, width: Fraction) -> RationalEnclosure:
    """Certified enclosure of ln(x) for rational x > 0, hi - lo <= width."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ln requires a positive argument")
    if width <= 0:
        raise InvalidPrecisionError("width must be positive")
    e = _floor_log2(x)
    m = x / (Fraction(2) ** e)
    # ln x = e*ln2 + ln m, with m in [1,2)
    budget = width / 2
    if e == 0:
        ln2_part = RationalEnclosure(Fraction(0), Fraction(0))
        budget = width
    else:
        ln2 = _ln2(budget / abs(e))
        if e >= 0:
            ln2_part = RationalEnclosure(e * ln2.lo, e * ln2.hi)
        else:
            ln2_part = RationalEnclosure(e * ln2.hi, e * ln2.lo)
    if m == 1:
        return RationalEnclosure(ln2_part.lo, ln2_part.hi)
    z = (m - 1) / (m + 1)
    series = _atanh_series(z, budget)
    return RationalEnclosure(ln2_part.lo + series.lo, ln2_part.hi + series.hi)


# --- descriptor text format -------------------------------------------------
#
# "cf: a0; a1 a2 ... (period: b1 b2 ... )" -- the "period:" label and all
# whitespace are optional, so the compact form "cf:1;(2)" also parses.

_DESCRIPTOR_RE = re.compile(
    r"^\s*cf\s*:\s*(-?\d+)\s*;\s*([\d\s,]*?)\s*(?:\(\s*(?:period\s*:)?\s*([\d\s,]+?)\s*\))?\s*$",
    re.IGNORECASE,
)


def parse_descriptor(text: str) -> RealDescriptor:
    match = _DESCRIPTOR_RE.match(text)
    if not match:
        raise MalformedDescriptorError(f"cannot parse descriptor {text!r}")
    a0 = int(match.group(1))
    split = lambda s: tuple(int(t) for t in re.split(r"[\s,]+", s.strip()) if t)
    prefix = split(match.group(2) or "")
    period = split(match.group(3)) if match.group(3) else None
    if period is None:
        raise MalformedDescriptorError(
            f"descriptor {text!r} has no periodic tail; finite digit lists denote rationals")
    bound = max(prefix + period)
    return RealDescriptor(a0, prefix, period, digit_bound=bound, label=text.strip())


def descriptor_text(x: RealDescriptor) -> str:
    if x.label:
        return x.label
    if x.period is None:
        raise ValueError("rule-based descriptors have no canonical text form")
    prefix = " ".join(str(d) for d in x.prefix)
    period = " ".join(str(d) for d in x.period)
    middle = f" {prefix}" if prefix else ""
    return f"cf: {x.a0};{middle} (period: {period})"


def sqrt2() -> RealDescriptor:
    return RealDescriptor(1, (), (2,), digit_bound=2, label="cf: 1; (period: 2)")


def golden_ratio() -> RealDescriptor:
    return RealDescriptor(1, (), (1,), digit_bound=1, label="cf: 1; (period: 1)")
