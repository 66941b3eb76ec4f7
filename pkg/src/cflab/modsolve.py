"""Exact first-hit search for residues of an arithmetic progression.

first_hit answers "smallest j >= 0 with (a*j + b) mod m <= w" without
scanning.  Values below the first wrap are b, b+a, ...; afterwards the
minimal value inside wrap block k is (b - k*m) mod a, so the search
recurses on the modulus pair (m, a) exactly like the Euclidean algorithm
and costs O(log m) arithmetic operations on integers of any size.

A window [c, d] is handled by shifting: (a*j + b) mod m in [c, d] iff
(a*j + b - c) mod m <= d - c.
"""

from __future__ import annotations

from typing import Iterator


def first_hit(a: int, b: int, m: int, w: int) -> int | None:
    """Smallest j >= 0 with (a*j + b) % m <= w, or None if no j works."""
    if m <= 0:
        raise ValueError("modulus must be positive")
    if w < 0:
        return None
    a %= m
    b %= m
    if b <= w:
        return 0
    if a == 0:
        return None
    # j = 0 misses and pre-wrap values only grow; find the first wrap block k
    # whose minimal value (b - k*m) mod a fits, then the first j inside it.
    if w >= a - 1:
        k = 1
    else:
        a2 = (-m) % a
        sub = first_hit(a2, (a2 + b) % a, a, w)
        if sub is None:
            return None
        k = sub + 1
    return (k * m - b + a - 1) // a


def first_hit_in(a: int, b: int, m: int, c: int, d: int) -> int | None:
    """Smallest j >= 0 with (a*j + b) % m in the wrapped window [c, d]."""
    c %= m
    d %= m
    if c <= d:
        return first_hit(a, (b - c) % m, m, d - c)
    # wrapped window [c, m-1] union [0, d]
    return first_hit(a, (b - c) % m, m, (d - c) % m)


def hits_between(a: int, b: int, m: int, w: int, j_lo: int, j_hi: int) -> Iterator[int]:
    """All j in [j_lo, j_hi] with (a*j + b) % m <= w, ascending."""
    cur = j_lo
    while cur <= j_hi:
        step = first_hit(a, (b + a * cur) % m, m, w)
        if step is None:
            return
        cur += step
        if cur > j_hi:
            return
        yield cur
        cur += 1
