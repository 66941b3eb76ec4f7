"""Fundamental intervals of the unit-interval continued-fraction map.

An order-n digit tuple (a_1, ..., a_n) pins down the closed interval whose
irrationals have exactly those leading digits; its endpoints are p_n/q_n and
the mediant (p_{n-1}+p_n)/(q_{n-1}+q_n).  a_0 is fixed to 0 here; callers
handle general integer parts by translation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import ConvergentPair, MalformedDescriptorError, RealDescriptor, decide_gt


@dataclass(frozen=True)
class FundamentalInterval:
    digits: tuple[int, ...]
    conv: ConvergentPair  # convergents of [0; a_1 ... a_n] at order n
    lo: Fraction
    hi: Fraction

    @property
    def order(self) -> int:
        return len(self.digits)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def associated_denominators(self) -> list[int]:
        """q_1 .. q_n shared by every number in the interval."""
        q, q_prev = 1, 0
        out = []
        for a in self.digits:
            q, q_prev = a * q + q_prev, q
            out.append(q)
        return out

    def __repr__(self):
        return f"I{list(self.digits)}=[{self.lo},{self.hi}]"


@dataclass(frozen=True)
class NicenessVerdict:
    k: int
    q_k: int
    ok: bool


@dataclass(frozen=True)
class NicenessCertificate:
    """Self-contained record that every associated denominator clears c.

    nice holds iff all verdicts do; the verdicts list one entry per order
    k <= n so the certificate can be re-checked without the interval.
    """

    digits: tuple[int, ...]
    c: Fraction
    x_label: str
    verdicts: tuple[NicenessVerdict, ...]

    @property
    def nice(self) -> bool:
        return all(v.ok for v in self.verdicts)


def interval_of(digits: Sequence[int]) -> FundamentalInterval:
    """Fundamental interval for digits (a_1, ..., a_n), all >= 1."""
    digits = tuple(int(d) for d in digits)
    if not digits:
        raise ValueError("need at least one digit")
    for d in digits:
        if d < 1:
            raise MalformedDescriptorError(f"digit {d} < 1")
    p, q = 0, 1  # a_0 = 0
    pp, qp = 1, 0
    for a in digits:
        p, pp = a * p + pp, p
        q, qp = a * q + qp, q
    conv = ConvergentPair(len(digits), p, q, pp, qp)
    e1 = Fraction(p, q)
    e2 = Fraction(p + pp, q + qp)
    lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
    return FundamentalInterval(digits, conv, lo, hi)


def child(interval: FundamentalInterval, s: int) -> FundamentalInterval:
    """The order-(n+1) interval appending digit s, via the convergent recurrence."""
    if s < 1:
        raise MalformedDescriptorError(f"digit {s} < 1")
    c = interval.conv
    p = s * c.p + c.p_prev
    q = s * c.q + c.q_prev
    conv = ConvergentPair(c.n + 1, p, q, c.p, c.q)
    e1 = Fraction(p, q)
    e2 = Fraction(p + c.p, q + c.q)
    lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
    return FundamentalInterval(interval.digits + (s,), conv, lo, hi)


def children(interval: FundamentalInterval, s_max: int) -> list[FundamentalInterval]:
    """Children for s = 1..s_max, ordered by s for determinism."""
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    return [child(interval, s) for s in range(1, s_max + 1)]


def is_nice(interval: FundamentalInterval, x: RealDescriptor, c: Fraction,
            oracle=None) -> NicenessCertificate:
    """Certify whether every associated denominator q_k keeps ||q_k x|| above c.

    c must lie in (0, 1/4).  An optional oracle(q) -> bool replaces the
    default certified comparison (used by callers that memoize verdicts); the
    certificate records each verdict either way.
    """
    c = Fraction(c)
    if not Fraction(0) < c < Fraction(1, 4):
        raise ValueError(f"threshold must be in (0, 1/4), got {c}")
    check = oracle if oracle is not None else (lambda q: decide_gt(q, x, c))
    verdicts = tuple(
        NicenessVerdict(k, q_k, bool(check(q_k)))
        for k, q_k in enumerate(interval.associated_denominators(), start=1)
    )
    label = x.label or repr(x)
    return NicenessCertificate(interval.digits, c, label, verdicts)


def contains(interval: FundamentalInterval, r: Fraction) -> bool:
    """Closed-endpoint membership of a rational."""
    return interval.lo <= r <= interval.hi


def gap(i1: FundamentalInterval | tuple, i2: FundamentalInterval | tuple) -> Fraction:
    """Distance between two closed intervals (0 if they touch or overlap)."""
    lo1, hi1 = (i1.lo, i1.hi) if isinstance(i1, FundamentalInterval) else i1
    lo2, hi2 = (i2.lo, i2.hi) if isinstance(i2, FundamentalInterval) else i2
    if lo1 > lo2:
        (lo1, hi1), (lo2, hi2) = (lo2, hi2), (lo1, hi1)
    return max(Fraction(0), lo2 - hi1)


def certificate_payload(cert: NicenessCertificate, interval: FundamentalInterval) -> dict:
    """JSON-ready certificate: all rationals as exact num/den strings."""
    from .serialize import frac_str

    return {
        "digits": list(interval.digits),
        "p": interval.conv.p,
        "q": interval.conv.q,
        "p_prev": interval.conv.p_prev,
        "q_prev": interval.conv.q_prev,
        "lo": frac_str(interval.lo),
        "hi": frac_str(interval.hi),
        "verdicts": [
            {"k": v.k, "q_k": v.q_k, "c": frac_str(cert.c), "ok": v.ok}
            for v in cert.verdicts
        ],
    }
