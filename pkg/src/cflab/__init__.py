"""cflab: exact-arithmetic laboratory for continued-fraction constructions.

Subpackages cover certified rational arithmetic over digit streams,
fundamental intervals, a nested interval construction with machine-checkable
certificates, D-adic pseudo-norms, and an exact interval game engine.
"""

__version__ = "0.1.0"

from .exact import (  # noqa: F401
    BigRational,
    ConvergentPair,
    RationalEnclosure,
    RealDescriptor,
    cf_digits,
    cf_evaluate,
    cf_of_rational,
    convergents,
    decide_gt,
    dist_enclosure,
    golden_ratio,
    lacunarity_from_digit_bound,
    lacunarity_lower_bound,
    parse_descriptor,
    sqrt2,
)
