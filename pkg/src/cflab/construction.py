"""Nested fundamental-interval construction with machine-checkable certificates.

Starting from every other single-digit interval, each level refines its
parents through four stages: candidate children in a denominator window
(A), a three-term niceness pick per consecutive triple (B), alternate
thinning for gap floors (C), and removal of anything touching a forbidden
strip around p/q for window denominators of the target number x (E).
Every kept interval carries a self-contained niceness certificate and every
drop is logged with its reason, so levels re-verify from their serialized
form alone.

Window bookkeeping: the strips avoided while refining level k into level
k+1 use denominators q_n(x) in [sqrt(c)*M^(2k), sqrt(c)*M^(2k+2)) -- the
parent level's window.  A level therefore certifies avoidance for every
denominator below sqrt(c)*M^(2k), which is what verify_level checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exact import (
    RationalEnclosure,
    RealDescriptor,
    UndecidedError,
    decide_frac_gt,
    decide_gt,
    dist_enclosure,
    ln_enclosure,
)
from .intervals import (
    FundamentalInterval,
    NicenessCertificate,
    NicenessVerdict,
    child,
    interval_of,
)

HALF = Fraction(1, 2)


class InvalidInputError(ValueError):
    pass


class ConstructionSoundnessError(RuntimeError):
    """A guaranteed stage property failed; the parameters are unsound."""


class RefinementError(RuntimeError):
    """A parent retained too few children to continue."""


# --- certified distance oracle ----------------------------------------------


class DistOracle:
    """Memoized certified verdicts ||q x|| > c, with a bulk integer kernel.

    The bulk path evaluates ||q * p_m/q_m|| for one deep convergent with
    64-bit integer arithmetic and accepts a verdict only when the exact
    inequality v*q_m - q > c*q_m^2 (resp. v*q_m + q < c*q_m^2) certifies it;
    everything else falls back to the certified refinement loop.
    """

    _INT64_LIMIT = 1 << 62

    def __init__(self, x: RealDescriptor, c: Fraction):
        self.x = x
        self.c = Fraction(c)
        self._verdicts: dict[int, bool] = {}

    def clear(self, q: int) -> bool:
        got = self._verdicts.get(q)
        if got is None:
            got = decide_gt(q, self.x, self.c)
            self._verdicts[q] = got
        return got

    def _deep_convergent(self, q_max: int):
        m = 1
        conv = self.x.convergent(m)
        while conv.q < (1 << 28) or conv.q * conv.q < 16 * q_max:
            m += 1
            conv = self.x.convergent(m)
        return conv

    def bulk_clear(self, qs: Sequence[int]) -> list[bool]:
        qs = list(qs)
        if not qs:
            return []
        q_max = max(qs)
        conv = self._deep_convergent(q_max)
        if q_max * conv.p >= self._INT64_LIMIT or conv.q * conv.q >= self._INT64_LIMIT:
            return [self.clear(q) for q in qs]
        qm = conv.q
        arr = np.asarray(qs, dtype=np.int64)
        r = (arr * conv.p) % qm
        v = np.minimum(r, qm - r)
        scaled = self.c * qm * qm
        floor_scaled = scaled.numerator // scaled.denominator
        lhs = v * qm
        sure_true = lhs - arr > floor_scaled
        sure_false = lhs + arr < floor_scaled  # conservative; rare
        out: list[bool] = []
        for i, q in enumerate(qs):
            if bool(sure_true[i]):
                verdict = True
            elif bool(sure_false[i]):
                verdict = False
            else:
                verdict = self.clear(q)
            self._verdicts[q] = verdict
            out.append(verdict)
        return out

    def enclosure(self, q: int, eps: Fraction) -> RationalEnclosure:
        return dist_enclosure(q, self.x, eps)

    def enclosure_above(self, q: int) -> RationalEnclosure:
        """Enclosure of ||q x|| whose lower bound strictly clears c (must be clear)."""
        eps = Fraction(1, 8)
        for _ in range(200):
            enc = dist_enclosure(q, self.x, eps)
            if enc.lo > self.c:
                return enc
            eps /= 4
        raise UndecidedError(f"||{q} x|| never cleared {self.c}; verdict cache inconsistent")


# --- parameter selection -----------------------------------------------------


def _linear_beats_log(lhs: Fraction, m_value: int, lam: Fraction) -> bool:
    """Certified truth of lhs > 2*ln(m_value)/ln(lam) for lam > 1."""
    width = Fraction(1, 64)
    for _ in range(120):
        ln_m = ln_enclosure(Fraction(m_value), width)
        ln_l = ln_enclosure(lam, width)
        if lhs * ln_l.lo > 2 * ln_m.hi:
            return True
        if lhs * ln_l.hi < 2 * ln_m.lo:
            return False
        width /= 8
    raise UndecidedError("log comparison stalled; threshold appears to be an exact tie")


def choose_M(lam: Fraction) -> int:
    """Smallest power of two M with M > 128 and M/32 > 2*log_lam(M) + 1."""
    lam = Fraction(lam)
    if lam <= 1:
        raise InvalidInputError(f"lacunarity floor must exceed 1, got {lam}")
    M = 256
    while True:
        if _linear_beats_log(Fraction(M, 32) - 1, M, lam):
            return M
        M *= 2


def _window_count_ok(count: int, M: int, lam: Fraction) -> bool:
    """count <= 2*log_lam(M) + 1, decided by certified logs with an exact
    power fallback for the (non-strict) tie case."""
    if count <= 1:
        return True
    lhs = Fraction(count - 1)
    width = Fraction(1, 64)
    for _ in range(40):
        ln_m = ln_enclosure(Fraction(M), width)
        ln_l = ln_enclosure(lam, width)
        if lhs * ln_l.hi < 2 * ln_m.lo:
            return True
        if lhs * ln_l.lo > 2 * ln_m.hi:
            return False
        width /= 8
    return lam ** (count - 1) <= Fraction(M) ** 2


def _power_of_four_exponent(c: Fraction) -> int:
    if c.numerator != 1:
        raise InvalidInputError(f"threshold must be a power of 1/4, got {c}")
    m = (c.denominator.bit_length() - 1) // 2
    if Fraction(1, 4) ** m != c:
        raise InvalidInputError(f"threshold must be a power of 1/4, got {c}")
    return m


def choose_c(x: RealDescriptor, M: int, oracle_cls=DistOracle) -> Fraction:
    """Largest c = 4^-m with 3*sqrt(c)*M^4 < 1, ||a x|| > c for a <= M^2, c < 1/4.

    The distance scan uses the best-approximation shortcut (only convergent
    denominators can achieve the minimum) to pick the candidate power, then
    verifies the full range a = 1..M^2 with certified comparisons.
    """
    if M < 2:
        raise InvalidInputError("M must be at least 2")
    m1 = (3 * M ** 4).bit_length()  # smallest m with 2^m > 3*M^4
    # convergent denominators up to M^2 bound the true minimum of ||a x||
    q_limit = M * M
    denoms = []
    n = 1
    while True:
        q = x.convergent(n).q
        if q > q_limit:
            break
        denoms.append(q)
        n += 1
    eps = Fraction(1, 4 ** (m1 + 4))
    min_lo = min(dist_enclosure(q, x, eps).lo for q in denoms) if denoms else HALF
    m2 = 0
    while Fraction(1, 4) ** m2 >= min_lo:
        m2 += 1
    m = max(m1, m2, 2)
    while True:
        c = Fraction(1, 4) ** m
        oracle = oracle_cls(x, c)
        verdicts = oracle.bulk_clear(range(1, q_limit + 1))
        if all(verdicts):
            return c
        m += 1  # defensive; the convergent shortcut should have caught this


@dataclass(frozen=True)
class ConstructionParams:
    """Everything a construction run depends on; immutable and hashable-ish."""

    x: RealDescriptor
    lam: Fraction
    M: int
    c: Fraction
    mode: str = "strict"              # "strict" | "feasible"
    depth: int = 2
    enumeration: str = "full"         # "full" | "sampled"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("strict", "feasible"):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.enumeration not in ("full", "sampled"):
            raise InvalidInputError(f"unknown enumeration {self.enumeration!r}")
        if self.depth < 1:
            raise InvalidInputError("depth must be >= 1")
        if self.lam <= 1:
            raise InvalidInputError("lacunarity floor must exceed 1")
        _power_of_four_exponent(self.c)  # sqrt must be exactly representable
        if not (0 < self.c < Fraction(1, 4)):
            raise InvalidInputError("threshold must lie in (0, 1/4)")
        if 3 * self.sqrt_c * self.M ** 4 >= 1:
            raise InvalidInputError("3*sqrt(c)*M^4 < 1 is required in every mode")
        if self.mode == "strict":
            if self.M <= 128:
                raise InvalidInputError("strict mode needs M > 128")
            if not _linear_beats_log(Fraction(self.M, 32) - 1, self.M, self.lam):
                raise InvalidInputError("strict mode needs M/32 > 2*log_lam(M) + 1")

    @property
    def sqrt_c(self) -> Fraction:
        return Fraction(1, 2 ** _power_of_four_exponent(self.c))

    def gap_floor(self, k: int) -> Fraction:
        return Fraction(1, self.M ** (2 * k + 3))

    def window(self, k: int) -> tuple[Fraction, Fraction]:
        """Denominator window attached to level k."""
        return (self.sqrt_c * self.M ** (2 * k), self.sqrt_c * self.M ** (2 * (k + 1)))

    def window_denominators(self, k: int) -> list[int]:
        """q_n(x) inside the level-k window, ascending."""
        lo, hi = self.window(k)
        out = []
        n = 0
        while True:
            q = self.x.convergent(n).q
            if q >= hi:
                return out
            if q >= lo:
                out.append(q)
            n += 1

    def covered_denominators(self, k: int) -> list[int]:
        """All q_n(x) whose strip-avoidance a level-k set has certified."""
        bound = self.sqrt_c * self.M ** (2 * k)
        out = []
        n = 0
        while True:
            q = self.x.convergent(n).q
            if q >= bound:
                return out
            out.append(q)
            n += 1


# --- level sets --------------------------------------------------------------


@dataclass(frozen=True)
class LevelEntry:
    interval: FundamentalInterval
    cert: NicenessCertificate
    parent: tuple[int, ...]


@dataclass
class DropRecord:
    parent: tuple[int, ...]
    digit: int
    stage: str    # "base" | "B" | "C" | "E"
    reason: str   # "not-nice" | "triple-skip" | "gap-thinning" | "strip-hit"
    strip: tuple[int, int] | None = None  # (p, q) for strip hits

    def payload(self) -> dict:
        out = {"parent": list(self.parent), "digit": self.digit,
               "stage": self.stage, "reason": self.reason}
        if self.strip is not None:
            out["strip"] = {"p": self.strip[0], "q": self.strip[1]}
        return out


@dataclass
class LevelSet:
    k: int
    entries: list[LevelEntry]
    eps_k: Fraction
    window: tuple[Fraction, Fraction]
    stage_stats: dict[tuple[int, ...], dict[str, int]]
    drop_log: list[DropRecord] = field(default_factory=list)
    window_size: int = 0  # |S| used while refining INTO this level

    def by_parent(self) -> dict[tuple[int, ...], list[LevelEntry]]:
        groups: dict[tuple[int, ...], list[LevelEntry]] = {}
        for entry in self.entries:
            groups.setdefault(entry.parent, []).append(entry)
        return groups


def _certify(interval: FundamentalInterval, params: ConstructionParams,
             oracle: DistOracle, parent_cert: NicenessCertificate | None) -> NicenessCertificate:
    label = params.x.label or repr(params.x)
    if parent_cert is None:
        verdicts = tuple(NicenessVerdict(k, q, oracle.clear(q))
                         for k, q in enumerate(interval.associated_denominators(), start=1))
    else:
        q_new = interval.conv.q
        verdicts = parent_cert.verdicts + (
            NicenessVerdict(interval.order, q_new, oracle.clear(q_new)),)
    return NicenessCertificate(interval.digits, params.c, label, verdicts)


def build_base_level(params: ConstructionParams, oracle: DistOracle | None = None) -> LevelSet:
    """Level 1: every other single-digit interval I(a1), a1 odd below M.

    Niceness is re-verified for each interval even in strict mode, where the
    threshold scan already guarantees it.
    """
    oracle = oracle or DistOracle(params.x, params.c)
    M = params.M
    entries: list[LevelEntry] = []
    drops: list[DropRecord] = []
    candidates = list(range(1, M, 2))
    for a1 in candidates:
        iv = interval_of([a1])
        cert = _certify(iv, params, oracle, None)
        if not cert.nice:
            if params.mode == "strict":
                raise ConstructionSoundnessError(
                    f"threshold scan admitted a1={a1} but ||{a1} x|| <= c")
            drops.append(DropRecord((), a1, "base", "not-nice"))
            continue
        entries.append(LevelEntry(iv, cert, ()))
    if params.mode == "strict" and 4 * len(entries) < M:
        raise ConstructionSoundnessError("base level lost intervals below M/4")
    if len(entries) < 2:
        raise RefinementError("base level has fewer than two intervals")
    stats = {(): {"A": M - 1, "B": len(candidates), "C": len(entries), "E": len(entries)}}
    return LevelSet(1, entries, params.gap_floor(1), params.window(1), stats, drops)


def _strip_hits(q: int, c: Fraction, lo: Fraction, hi: Fraction) -> list[int]:
    """Integers p whose strip [(p-c)/q, (p+c)/q] meets [lo, hi] (closed)."""
    first_num = q * lo - c  # p >= q*lo - c
    last_num = q * hi + c   # p <= q*hi + c
    p_first = -((-first_num.numerator) // first_num.denominator)  # ceil
    p_last = last_num.numerator // last_num.denominator            # floor
    return list(range(p_first, p_last + 1))


@dataclass
class ParentRefinement:
    parent: tuple[int, ...]
    a_count: int
    b_entries: list
    c_entries: list
    e_entries: list
    drops: list[DropRecord]


def _refine_parent(entry: LevelEntry, params: ConstructionParams, oracle: DistOracle,
                   window_qs: list[int]) -> ParentRefinement:
    iv = entry.interval
    k = iv.order
    M = params.M
    q_k, q_prev = iv.conv.q, iv.conv.q_prev
    lo_bound, hi_bound = M ** k, M ** (k + 1)
    s_lo = max(1, -((-(lo_bound - q_prev)) // q_k))
    s_hi = min(2 * M, -((-(hi_bound - q_prev)) // q_k) - 1)
    drops: list[DropRecord] = []
    if s_hi < s_lo:
        return ParentRefinement(iv.digits, 0, [], [], [], drops)
    s_values = list(range(s_lo, s_hi + 1))
    a_count = len(s_values)
    if params.mode == "strict" and 2 * a_count < M:
        raise ConstructionSoundnessError(
            f"candidate stage below M/2 for parent {iv.digits}: {a_count}")

    verdicts = dict(zip(s_values, oracle.bulk_clear([s * q_k + q_prev for s in s_values])))

    # B: keep the first nice child of each consecutive triple; a full triple
    # with no nice member contradicts the three-term guarantee
    b_children: list[FundamentalInterval] = []
    for start in range(0, a_count, 3):
        triple = s_values[start:start + 3]
        pick = None
        for s in triple:
            if pick is None and verdicts[s]:
                pick = s
            elif pick is None:
                drops.append(DropRecord(iv.digits, s, "B", "not-nice"))
            else:
                drops.append(DropRecord(iv.digits, s, "B", "triple-skip"))
        if pick is not None:
            b_children.append(child(iv, pick))
        elif len(triple) == 3:
            raise ConstructionSoundnessError(
                f"triple {triple} under parent {iv.digits} has no nice member")
    if params.mode == "strict" and 8 * len(b_children) < M:
        raise ConstructionSoundnessError(
            f"nice stage below M/8 for parent {iv.digits}: {len(b_children)}")

    # C: alternate thinning in ascending endpoint order restores the gap floor
    b_sorted = sorted(b_children, key=lambda ch: ch.lo)
    c_children = b_sorted[0::2]
    for dropped in b_sorted[1::2]:
        drops.append(DropRecord(iv.digits, dropped.digits[-1], "C", "gap-thinning"))
    if params.mode == "strict" and 16 * len(c_children) < M:
        raise ConstructionSoundnessError(
            f"thinned stage below M/16 for parent {iv.digits}: {len(c_children)}")

    # E: drop children touching any forbidden strip around p/q for window
    # denominators q; at most one strip may meet the parent, and a strip may
    # meet at most one thinned child
    strip_of_q: dict[int, int] = {}
    for q in window_qs:
        hits = _strip_hits(q, params.c, iv.lo, iv.hi)
        if len(hits) > 1:
            raise ConstructionSoundnessError(
                f"{len(hits)} strips of q={q} meet parent {iv.digits}")
        if hits:
            strip_of_q[q] = hits[0]
    e_children = []
    strip_victims: dict[tuple[int, int], int] = {}
    for ch_iv in c_children:
        hit = None
        for q, p in strip_of_q.items():
            if (p + params.c) / q >= ch_iv.lo and (p - params.c) / q <= ch_iv.hi:
                hit = (p, q)
                break
        if hit is None:
            e_children.append(ch_iv)
        else:
            strip_victims[hit] = strip_victims.get(hit, 0) + 1
            if strip_victims[hit] > 1:
                raise ConstructionSoundnessError(
                    f"strip {hit} met two thinned children under {iv.digits}")
            drops.append(DropRecord(iv.digits, ch_iv.digits[-1], "E", "strip-hit", hit))

    if params.mode == "strict" and 32 * len(e_children) < M:
        raise ConstructionSoundnessError(
            f"final stage below M/32 for parent {iv.digits}: {len(e_children)}")
    if len(e_children) < 2:
        raise RefinementError(
            f"parent {iv.digits} kept {len(e_children)} children; need at least 2")

    e_entries = [
        LevelEntry(ch_iv, _certify(ch_iv, params, oracle, entry.cert), iv.digits)
        for ch_iv in e_children
    ]
    return ParentRefinement(iv.digits, a_count, b_sorted, c_children, e_entries, drops)


def refine_level(level: LevelSet, params: ConstructionParams,
                 oracle: DistOracle | None = None,
                 parents: Sequence[LevelEntry] | None = None) -> LevelSet:
    """Refine level k into level k+1 across the given parents (default all)."""
    oracle = oracle or DistOracle(params.x, params.c)
    k = level.k
    window_qs = params.window_denominators(k)
    if not _window_count_ok(len(window_qs), params.M, params.lam):
        raise ConstructionSoundnessError(
            f"window of level {k} holds {len(window_qs)} denominators, "
            f"above 2*log_lam(M)+1")
    entries: list[LevelEntry] = []
    stats: dict[tuple[int, ...], dict[str, int]] = {}
    drops: list[DropRecord] = []
    for entry in sorted(parents or level.entries, key=lambda e: e.interval.lo):
        ref = _refine_parent(entry, params, oracle, window_qs)
        stats[ref.parent] = {"A": ref.a_count, "B": len(ref.b_entries),
                             "C": len(ref.c_entries), "E": len(ref.e_entries)}
        entries.extend(ref.e_entries)
        drops.extend(ref.drops)
    return LevelSet(k + 1, entries, params.gap_floor(k + 1), params.window(k + 1),
                    stats, drops, window_size=len(window_qs))


# --- verification -------------------------------------------------------------


@dataclass
class ConditionResult:
    ok: bool
    witnesses: list = field(default_factory=list)

    def note(self, witness):
        self.ok = False
        if len(self.witnesses) < 10:
            self.witnesses.append(witness)


@dataclass
class ConditionReport:
    k: int
    results: dict[str, ConditionResult]

    @property
    def all_pass(self) -> bool:
        return all(r.ok for r in self.results.values())

    def payload(self) -> dict:
        return {
            "k": self.k,
            "all_pass": self.all_pass,
            "conditions": {
                name: {"ok": r.ok, "witnesses": [str(w) for w in r.witnesses]}
                for name, r in self.results.items()
            },
        }


def verify_level(level: LevelSet, params: ConstructionParams,
                 oracle: DistOracle | None = None) -> ConditionReport:
    """Check the six per-level conditions, each failure carrying a witness.

    1 digit and denominator ranges; 2 unique parent containment; 3 niceness
    certificates re-verified; 4 sibling gaps above the level's floor;
    5 strip avoidance for every covered denominator; 6 per-parent counts.
    """
    oracle = oracle or DistOracle(params.x, params.c)
    M, k = params.M, level.k
    res = {name: ConditionResult(True) for name in
           ("digit_range", "unique_parent", "niceness", "gaps", "strips", "counts")}

    lo_q, hi_q = M ** (k - 1), M ** k
    parent_keys = sorted({e.parent for e in level.entries})
    parent_spans = []
    for p in parent_keys:
        if p:
            piv = interval_of(p)
            parent_spans.append((piv.lo, piv.hi))
        else:
            parent_spans.append((Fraction(0), Fraction(1)))
    order = sorted(range(len(parent_keys)), key=lambda i: parent_spans[i][0])
    sorted_los = [parent_spans[i][0] for i in order]

    def containment_count(lo: Fraction, hi: Fraction) -> int:
        # parents of one order have disjoint interiors, so only the bisect
        # neighbours can possibly contain [lo, hi]
        import bisect
        idx = bisect.bisect_right(sorted_los, lo)
        count = 0
        for j in range(max(0, idx - 2), min(len(order), idx + 1)):
            plo, phi = parent_spans[order[j]]
            if plo <= lo and hi <= phi:
                count += 1
        return count

    all_qs = [e.interval.conv.q for e in level.entries]
    bulk = dict(zip(all_qs, oracle.bulk_clear(all_qs)))

    for e in level.entries:
        iv = e.interval
        if len(iv.digits) != k or any(d > 2 * M or d < 1 for d in iv.digits):
            res["digit_range"].note(("digits", iv.digits))
        if not lo_q <= iv.conv.q < hi_q:
            res["digit_range"].note(("q_k", iv.digits, iv.conv.q))

        if e.parent != iv.digits[:-1]:
            res["unique_parent"].note(("parent-mismatch", iv.digits, e.parent))
        if containment_count(iv.lo, iv.hi) != 1:
            res["unique_parent"].note(("containment-count", iv.digits))

        denoms = iv.associated_denominators()
        if len(e.cert.verdicts) != k:
            res["niceness"].note(("verdict-length", iv.digits))
        for verdict in e.cert.verdicts:
            expected = bulk.get(verdict.q_k)
            if expected is None:
                expected = oracle.clear(verdict.q_k)
            if verdict.q_k != denoms[verdict.k - 1] or verdict.ok is not expected or not verdict.ok:
                res["niceness"].note(("verdict", iv.digits, verdict.k))

    for parent, group in level.by_parent().items():
        ordered = sorted(group, key=lambda e: e.interval.lo)
        for a, b in zip(ordered, ordered[1:]):
            if b.interval.lo - a.interval.hi < level.eps_k:
                res["gaps"].note(("gap", a.interval.digits, b.interval.digits))
        count = len(group)
        if params.mode == "strict":
            if count * 32 <= M:
                res["counts"].note(("count", parent, count))
        elif count < 2:
            res["counts"].note(("count", parent, count))

    for q in params.covered_denominators(k):
        for e in level.entries:
            hits = _strip_hits(q, params.c, e.interval.lo, e.interval.hi)
            if hits:
                res["strips"].note(("strip", e.interval.digits, q, hits[0]))

    return ConditionReport(k, res)


# --- three-term machinery ------------------------------------------------------


def three_term_select(A: int, B: int, x: RealDescriptor, c: Fraction) -> int:
    """Smallest index i in {1,2,3} with ||(i*A + B) x|| > c.

    Requires ||A x|| > c and c < 1/4; under those, some index always works.
    """
    c = Fraction(c)
    if not 0 < c < Fraction(1, 4):
        raise InvalidInputError(f"threshold must be in (0, 1/4), got {c}")
    if A < 1 or B < 1:
        raise InvalidInputError("A and B must be positive")
    if not decide_gt(A, x, c):
        raise InvalidInputError(f"||{A} x|| > {c} fails; selection rule does not apply")
    for idx in (1, 2, 3):
        if decide_gt(idx * A + B, x, c):
            return idx
    raise ConstructionSoundnessError(
        f"no member of the (A+B, 2A+B, 3A+B) triple cleared c for A={A}, B={B}")


@dataclass
class TripleCheckReport:
    x_label: str
    c: Fraction
    a_max: int
    b_max: int
    pairs_checked: int
    counterexamples: list[tuple[int, int]]
    case_counts: dict[int, int]

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _certified_masks(x: RealDescriptor, c: Fraction, k_max: int):
    """clear[k] = (||k x|| > c) and high[k] = (frac(k x) > 1/2), certified.

    One deep convergent plus 64-bit arithmetic decides almost every k; the
    few indices without an exact margin fall back to the refinement loop.
    """
    m = 1
    conv = x.convergent(m)
    while conv.q < (1 << 30) or conv.q * conv.q < 16 * k_max:
        m += 1
        conv = x.convergent(m)
    if k_max * conv.p >= (1 << 62) or conv.q * conv.q >= (1 << 62):
        clear = np.array([decide_gt(k, x, c) for k in range(k_max + 1)])
        high = np.array([decide_frac_gt(k, x, HALF) for k in range(k_max + 1)])
        return clear, high
    qm = conv.q
    ks = np.arange(k_max + 1, dtype=np.int64)
    r = (ks * conv.p) % qm
    v = np.minimum(r, qm - r)
    scaled = c * qm * qm
    floor_scaled = scaled.numerator // scaled.denominator
    lhs = v * qm
    clear = lhs - ks > floor_scaled
    unsure = ~clear & (lhs + ks >= floor_scaled)
    clear[0] = False  # ||0 x|| = 0, never above a positive threshold
    unsure[0] = False
    for k in np.nonzero(unsure)[0]:
        clear[k] = decide_gt(int(k), x, c)
    high = 2 * r > qm
    near_half = np.abs(2 * r - qm) <= 2 * ks
    for k in np.nonzero(near_half)[0]:
        if k:
            high[k] = decide_frac_gt(int(k), x, HALF)
    return clear, high


def three_term_brute_check(x: RealDescriptor, c: Fraction, a_max: int,
                           b_max: int) -> TripleCheckReport:
    """Exhaustively confirm the three-term disjunction for all admissible pairs.

    For every (A, B) with ||A x|| > c, at least one of (A+B, 2A+B, 3A+B) must
    clear c; the report buckets each pair by the sign pattern of
    (frac(Ax) - 1/2, frac((A+B)x) - 1/2) and lists any counterexamples.
    """
    c = Fraction(c)
    if not 0 < c < Fraction(1, 4):
        raise InvalidInputError(f"threshold must be in (0, 1/4), got {c}")
    k_max = 3 * a_max + b_max
    clear, high = _certified_masks(x, c, k_max)
    counterexamples: list[tuple[int, int]] = []
    case_counts = {1: 0, 2: 0, 3: 0, 4: 0}
    pairs = 0
    b_idx = np.arange(1, b_max + 1)
    for A in range(1, a_max + 1):
        if not clear[A]:
            continue
        pairs += b_max
        ok = clear[A + b_idx] | clear[2 * A + b_idx] | clear[3 * A + b_idx]
        for b_off in np.nonzero(~ok)[0]:
            counterexamples.append((A, int(b_off) + 1))
        a_high = bool(high[A])
        b_high = high[A + b_idx]
        highs = int(np.count_nonzero(b_high))
        lows = b_max - highs
        if a_high:
            case_counts[2] += highs
            case_counts[3] += lows
        else:
            case_counts[4] += highs
            case_counts[1] += lows
    return TripleCheckReport(x.label or repr(x), c, a_max, b_max, pairs,
                             counterexamples, case_counts)


# --- construction pipeline and point certificates -----------------------------


def build_levels(params: ConstructionParams,
                 oracle: DistOracle | None = None) -> tuple[list[LevelSet], list[ConditionReport]]:
    """Full enumeration to params.depth; strict full runs are capped at depth 2."""
    if params.mode == "strict" and params.enumeration == "full" and params.depth > 2:
        raise InvalidInputError(
            "strict full enumeration is supported to depth 2; use sampled paths beyond")
    oracle = oracle or DistOracle(params.x, params.c)
    levels = [build_base_level(params, oracle)]
    reports = [verify_level(levels[0], params, oracle)]
    while levels[-1].k < params.depth:
        levels.append(refine_level(levels[-1], params, oracle))
        reports.append(verify_level(levels[-1], params, oracle))
    return levels, reports


def _contains_integer(a: Fraction, b: Fraction) -> bool:
    ceil_a = -((-a.numerator) // a.denominator)
    floor_b = b.numerator // b.denominator
    return ceil_a <= floor_b


def _contains_odd_integer(a: Fraction, b: Fraction) -> bool:
    ceil_a = -((-a.numerator) // a.denominator)
    floor_b = b.numerator // b.denominator
    if ceil_a > floor_b:
        return False
    return ceil_a % 2 == 1 or ceil_a < floor_b


def _dist_frac(v: Fraction) -> Fraction:
    r = v - (v.numerator // v.denominator)
    return min(r, 1 - r)


def dist_range_over_interval(q: int, lo: Fraction, hi: Fraction) -> RationalEnclosure:
    """Exact range of ||q y|| over y in [lo, hi].

    The distance function is a unit-period zigzag: the minimum drops to 0
    exactly when q*[lo, hi] spans an integer and the maximum reaches 1/2
    exactly when 2q*[lo, hi] spans an odd integer.
    """
    a, b = q * lo, q * hi
    low = Fraction(0) if _contains_integer(a, b) else min(_dist_frac(a), _dist_frac(b))
    high = HALF if _contains_odd_integer(2 * a, 2 * b) else max(_dist_frac(a), _dist_frac(b))
    return RationalEnclosure(low, high)


@dataclass
class ProductBound:
    n: int
    q: int
    dist_x: RationalEnclosure
    dist_y: RationalEnclosure
    product_lo: Fraction

    def payload(self) -> dict:
        from .serialize import frac_str
        return {"n": self.n, "q": self.q,
                "dist_x": [frac_str(self.dist_x.lo), frac_str(self.dist_x.hi)],
                "dist_y": [frac_str(self.dist_y.lo), frac_str(self.dist_y.hi)],
                "product_lo": frac_str(self.product_lo)}


@dataclass
class PointCertificate:
    params_label: str
    seed: int
    depth: int
    y_interval: FundamentalInterval
    level_reports: list[ConditionReport]
    stage_stats: list[dict[str, int]]
    y_side: list[ProductBound]
    x_side: list[ProductBound]
    floor_x: Fraction | None
    floor_y: Fraction
    c_xy: Fraction

    @property
    def all_products_positive(self) -> bool:
        return all(p.product_lo > 0 for p in self.y_side + self.x_side)

    @property
    def all_products_above_floor(self) -> bool:
        return all(p.product_lo > self.c_xy for p in self.y_side + self.x_side)


def sample_point(params: ConstructionParams, depth: int, seed: int,
                 oracle: DistOracle | None = None) -> PointCertificate:
    """Follow one seeded child per level and certify the restricted products.

    The deepest denominator's distance range uses the continuation bound (the
    next digit of any surviving point is at most 2M), since over the bare
    closed interval the infimum of ||q_depth y|| is 0 at an endpoint.
    """
    if depth < 1:
        raise InvalidInputError("depth must be >= 1")
    oracle = oracle or DistOracle(params.x, params.c)
    rng = random.Random(seed)
    level = build_base_level(params, oracle)
    reports = [verify_level(level, params, oracle)]
    entry = level.entries[rng.randrange(len(level.entries))]
    stage_stats = [level.stage_stats[()]]
    while level.k < depth:
        refined = refine_level(level, params, oracle, parents=[entry])
        reports.append(verify_level(refined, params, oracle))
        stage_stats.append(refined.stage_stats[entry.interval.digits])
        level = refined
        entry = refined.entries[rng.randrange(len(refined.entries))]

    iv = entry.interval
    M = params.M
    eps = params.c / 4

    y_side: list[ProductBound] = []
    denoms = iv.associated_denominators()
    floor_y = None
    for n, q in enumerate(denoms, start=1):
        dist_x = oracle.enclosure_above(q)  # q is an associated denominator: nice
        if n < depth:
            dist_y = dist_range_over_interval(q, iv.lo, iv.hi)
        else:
            # any surviving point continues with a digit <= 2M; the union of
            # those children is the hull below, which excludes the endpoint
            # where ||q_depth y|| vanishes
            near, far = child(iv, 2 * M), child(iv, 1)
            hull_lo = min(near.lo, far.lo)
            hull_hi = max(near.hi, far.hi)
            dist_y = dist_range_over_interval(q, hull_lo, hull_hi)
        bound = q * dist_x.lo * dist_y.lo
        y_side.append(ProductBound(n, q, dist_x, dist_y, bound))
        q_dist = q * dist_y.lo
        floor_y = q_dist if floor_y is None else min(floor_y, q_dist)

    x_side: list[ProductBound] = []
    floor_x = None
    covered = params.covered_denominators(depth)
    for n, q in enumerate(covered):
        dist_x = dist_enclosure(q, params.x, eps)
        dist_y = dist_range_over_interval(q, iv.lo, iv.hi)
        bound = q * dist_x.lo * dist_y.lo
        x_side.append(ProductBound(n, q, dist_x, dist_y, bound))
        q_dist = q * dist_x.lo
        floor_x = q_dist if floor_x is None else min(floor_x, q_dist)

    floors = [f for f in (floor_x, floor_y) if f is not None]
    c_xy = params.c * min(floors)
    return PointCertificate(params.x.label or repr(params.x), seed, depth, iv,
                            reports, stage_stats, y_side, x_side, floor_x, floor_y, c_xy)


# --- dimension formulas --------------------------------------------------------


@dataclass
class FalconerReport:
    at_k: RationalEnclosure
    running_min: RationalEnclosure
    argmin: int


def _as_accessor(seq) -> Callable[[int], Fraction]:
    if callable(seq):
        return seq
    return lambda k: seq[k - 1]


def falconer_bound(m_seq, eps_seq, K: int, precision: Fraction | None = None) -> FalconerReport:
    """Enclosure of log(m_1...m_{k-1}) / -log(m_k eps_k) at k = K, plus the
    running minimum over 2 <= k <= K.

    m_seq and eps_seq may be sequences or callables k -> value (1-based).
    Logarithms of repeated factors and of consecutive eps ratios are cached,
    so geometric gap sequences cost a handful of series evaluations total.
    """
    if K < 2:
        raise InvalidInputError("K must be at least 2")
    m_at = _as_accessor(m_seq)
    eps_at = _as_accessor(eps_seq)
    width = precision if precision is not None else Fraction(1, 10 ** 7 * (K + 1))

    ln_cache: dict[Fraction, RationalEnclosure] = {}

    def ln_of(value: Fraction) -> RationalEnclosure:
        value = Fraction(value)
        got = ln_cache.get(value)
        if got is None:
            got = ln_enclosure(value, width)
            ln_cache[value] = got
        return got

    prefix_lo = prefix_hi = Fraction(0)  # sum of ln m_i, i < k
    eps_prev = None
    ln_eps_lo = ln_eps_hi = Fraction(0)
    best_lo = best_hi = None
    best_k = 0
    at_k = None
    for k in range(1, K + 1):
        m_k = int(m_at(k))
        if m_k < 2:
            raise InvalidInputError(f"m_{k} = {m_k} < 2")
        eps_k = Fraction(eps_at(k))
        if eps_k <= 0:
            raise InvalidInputError(f"eps_{k} must be positive")
        if eps_prev is not None:
            if not eps_k < eps_prev:
                raise InvalidInputError(f"eps must strictly decrease at k={k}")
            ratio = ln_of(eps_k / eps_prev)
            ln_eps_lo += ratio.lo
            ln_eps_hi += ratio.hi
        else:
            first = ln_of(eps_k)
            ln_eps_lo, ln_eps_hi = first.lo, first.hi
        eps_prev = eps_k

        if k >= 2:
            ln_m = ln_of(Fraction(m_k))
            den_lo = -(ln_m.hi + ln_eps_hi)
            den_hi = -(ln_m.lo + ln_eps_lo)
            if den_lo <= 0:
                raise InvalidInputError(
                    f"m_k * eps_k must stay below 1 for a positive bound (k={k})")
            value = RationalEnclosure(prefix_lo / den_hi, prefix_hi / den_lo)
            if best_lo is None or value.lo < best_lo:
                best_lo = value.lo
                best_k = k
            best_hi = value.hi if best_hi is None else min(best_hi, value.hi)
            at_k = value
        ln_m_for_prefix = ln_of(Fraction(m_k))
        prefix_lo += ln_m_for_prefix.lo
        prefix_hi += ln_m_for_prefix.hi
    return FalconerReport(at_k, RationalEnclosure(best_lo, best_hi), best_k)


@dataclass
class DimensionReport:
    M: int
    step_bound: RationalEnclosure
    total_with_cited_bad: RationalEnclosure
    cited_bad_dimension: int = 1

    def payload(self) -> dict:
        from .serialize import frac_str
        return {"M": self.M,
                "step_bound": [frac_str(self.step_bound.lo), frac_str(self.step_bound.hi)],
                "total": [frac_str(self.total_with_cited_bad.lo),
                          frac_str(self.total_with_cited_bad.hi)],
                "cited_bad_dimension": self.cited_bad_dimension}


def dimension_bound(M: int) -> DimensionReport:
    """(1/2) * log(M/32)/log(M), exact for powers of two, else a tight enclosure.

    The companion total adds the cited full dimension of the badly
    approximable set; it is never computed here.
    """
    if M <= 32:
        raise InvalidInputError("M must exceed 32")
    if M & (M - 1) == 0:
        t = M.bit_length() - 1
        exact = Fraction(t - 5, 2 * t)
        step = RationalEnclosure(exact, exact)
    else:
        width = Fraction(1, 10 ** 12)
        num = ln_enclosure(Fraction(M, 32), width)
        den = ln_enclosure(Fraction(M), width)
        step = RationalEnclosure(num.lo / (2 * den.hi), num.hi / (2 * den.lo))
    total = RationalEnclosure(step.lo + 1, step.hi + 1)
    return DimensionReport(M, step, total)


@dataclass
class BoxCountReport:
    slope: float
    points: list[tuple[int, int]]  # (j, N(2^-j))
    degenerate: bool


def box_count_diagnostic(levels: Sequence[LevelSet]) -> BoxCountReport:
    """Least-squares box-counting exponent of the deepest level (report only)."""
    if len(levels) < 2:
        raise InvalidInputError("need at least two levels")
    intervals = [(e.interval.lo, e.interval.hi) for e in levels[-1].entries]
    degenerate = len(intervals) < 2
    min_len = min(hi - lo for lo, hi in intervals)
    # fit inside the scaling regime; a lone interval has none, so give it
    # enough octaves to expose its trivial slope of 1
    extra = 12 if degenerate else 1
    j_max = min(_floor_log2_inverse(min_len) + extra, 48)
    points = []
    for j in range(1, j_max + 1):
        scale = 1 << j
        boxes = set()
        for lo, hi in intervals:
            first = (lo.numerator * scale) // lo.denominator
            last = (hi.numerator * scale) // hi.denominator
            boxes.update(range(first, last + 1))
        points.append((j, len(boxes)))
    js = np.array([p[0] for p in points], dtype=float)
    ys = np.log2(np.array([p[1] for p in points], dtype=float))
    slope = float(np.polyfit(js, ys, 1)[0])
    return BoxCountReport(slope, points, degenerate)


def _floor_log2_inverse(length: Fraction) -> int:
    # largest j with 2^-j >= length
    j = 0
    while Fraction(1, 1 << (j + 1)) >= length:
        j += 1
    return j
