"""Exact serialization helpers shared by certificates and the CLI.

Certificates never contain floating point: every rational is written as a
"num/den" string and JSON payloads are canonicalized (sorted keys, fixed
separators) so equal runs produce byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction


def frac_str(f) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def write_canonical(path, payload) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(canonical_json(payload))


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)
