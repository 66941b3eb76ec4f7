"""D-adic block structure: block products t_n, valuation, and pseudo-norm.

A D-sequence is a stream d_1, d_2, ... of integers >= 2.  The block
products t_n = d_1 * ... * d_n generalize prime powers; the valuation of q
is the deepest n with t_n | q and the pseudo-norm is 1/t_n at that depth.
When D is the constant prime p this is the usual p-adic norm.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import RationalEnclosure, RealDescriptor, decide_gt, dist_enclosure


class DSequenceError(ValueError):
    pass


class DSequence:
    """Accessor k -> d_k (k >= 1) with constant, periodic, or explicit kinds."""

    def __init__(self, kind: str, values: tuple[int, ...], tail: int | None = None,
                 label: str | None = None):
        if kind not in ("constant", "periodic", "explicit"):
            raise DSequenceError(f"unknown kind {kind!r}")
        if not values:
            raise DSequenceError("empty value list")
        check = values + ((tail,) if tail is not None else ())
        for d in check:
            if d < 2:
                raise DSequenceError(f"factor {d} < 2")
        if kind == "explicit" and tail is None:
            raise DSequenceError("explicit sequences need a default tail")
        self.kind = kind
        self.values = tuple(int(v) for v in values)
        self.tail = int(tail) if tail is not None else None
        self.label = label
        self._products: list[int] = [1]  # t_0 = 1

    @classmethod
    def constant(cls, d: int) -> "DSequence":
        return cls("constant", (d,), label=f"const:{d}")

    @classmethod
    def periodic(cls, *values: int) -> "DSequence":
        return cls("periodic", tuple(values), label="period:" + ",".join(map(str, values)))

    @classmethod
    def explicit(cls, values, tail: int) -> "DSequence":
        label = "list:" + ",".join(map(str, values)) + f";tail={tail}"
        return cls("explicit", tuple(values), tail, label=label)

    def factor(self, k: int) -> int:
        """d_k for k >= 1."""
        if k < 1:
            raise DSequenceError("factor index starts at 1")
        if self.kind == "constant":
            return self.values[0]
        if self.kind == "periodic":
            return self.values[(k - 1) % len(self.values)]
        return self.values[k - 1] if k <= len(self.values) else self.tail

    def block_product(self, n: int) -> int:
        """t_n = d_1 * ... * d_n with t_0 = 1, cached append-only."""
        if n < 0:
            raise DSequenceError("n must be >= 0")
        while len(self._products) <= n:
            k = len(self._products)
            self._products.append(self._products[-1] * self.factor(k))
        return self._products[n]

    def __repr__(self):
        return f"DSequence({self.label or self.kind})"


_D_FORMATS = re.compile(r"^\s*(const|period|list)\s*:\s*([\d,\s]+?)\s*(?:;\s*tail\s*=\s*(\d+))?\s*$")


def parse_dsequence(text: str) -> DSequence:
    """Parse 'const:2', 'period:2,3', or 'list:2,3,5;tail=2'."""
    match = _D_FORMATS.match(text)
    if not match:
        raise DSequenceError(f"cannot parse D-sequence {text!r}")
    kind, body, tail = match.groups()
    values = tuple(int(t) for t in re.split(r"[\s,]+", body.strip()) if t)
    if kind == "const":
        if len(values) != 1:
            raise DSequenceError("const takes exactly one factor")
        return DSequence.constant(values[0])
    if kind == "period":
        return DSequence.periodic(*values)
    if tail is None:
        raise DSequenceError("list form needs ;tail=")
    return DSequence.explicit(values, int(tail))


def t_n(dseq: DSequence, n: int) -> int:
    return dseq.block_product(n)


def omega(dseq: DSequence, q: int) -> int:
    """Largest n with t_n | q, via a divide-out loop (no huge intermediates)."""
    if q < 1:
        raise DSequenceError(f"q must be >= 1, got {q}")
    n = 0
    rest = q
    while True:
        d = dseq.factor(n + 1)
        if rest % d:
            return n
        rest //= d
        n += 1


def d_norm(dseq: DSequence, q: int) -> Fraction:
    """Pseudo-norm |q|_D = 1/t_omega(q)."""
    return Fraction(1, dseq.block_product(omega(dseq, q)))


def mixed_product_enclosure(q: int, x: RealDescriptor, dseq: DSequence,
                            eps: Fraction) -> RationalEnclosure:
    """Certified enclosure of q * |q|_D * ||q x|| with width <= eps."""
    if q < 1:
        raise DSequenceError(f"q must be >= 1, got {q}")
    scale = q * d_norm(dseq, q)
    inner = dist_enclosure(q, x, Fraction(eps) / scale)
    return RationalEnclosure(scale * inner.lo, scale * inner.hi)


# --- finite-depth membership evidence ---------------------------------------
#
# The target set factors as (block distances stay large) AND (convergent
# norms stay large) AND (badly approximable); each factor gets its own
# finite-depth check so tests can audit the evidence separately.


@dataclass(frozen=True)
class FactorEvidence:
    name: str
    ok: bool
    witness: dict = field(default_factory=dict)


def bounded_digit_check(x: RealDescriptor, depth: int) -> FactorEvidence:
    """Digits a_1..a_depth all within the declared (or observed) bound."""
    digits = [x.digit(n) for n in range(1, depth + 1)]
    bound = x.digit_bound if x.digit_bound is not None else max(digits)
    ok = all(d <= bound for d in digits)
    return FactorEvidence("bounded-digits", ok, {"bound": bound, "max_seen": max(digits)})


def block_distance_check(x: RealDescriptor, dseq: DSequence, n_max: int,
                         c: Fraction) -> FactorEvidence:
    """||t_n x|| > c for all 1 <= n <= n_max, certified per n."""
    failures = [n for n in range(1, n_max + 1)
                if not decide_gt(dseq.block_product(n), x, Fraction(c))]
    return FactorEvidence("block-distances", not failures,
                          {"c": str(c), "failures": failures})


def convergent_norm_check(x: RealDescriptor, dseq: DSequence, n_max: int,
                          floor: Fraction) -> FactorEvidence:
    """|q_n(x)|_D >= floor for all 1 <= n <= n_max."""
    floor = Fraction(floor)
    failures = []
    worst = Fraction(1)
    for n in range(1, n_max + 1):
        norm = d_norm(dseq, x.convergent(n).q)
        worst = min(worst, norm)
        if norm < floor:
            failures.append(n)
    return FactorEvidence("convergent-norms", not failures,
                          {"floor": str(floor), "min_norm": str(worst), "failures": failures})
