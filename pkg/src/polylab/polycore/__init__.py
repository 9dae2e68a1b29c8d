"""Extended-precision scalars, polynomials, roots and hulls."""
from .bignum import BigComplex, BigReal, default_bits, to_complex, to_decimal, to_real, workprec
from .hull import ConvexHull, convex_hull
from .polynomial import (
    Basis,
    Polynomial,
    differentiate,
    from_chebyshev,
    pochhammer,
    shifted_pochhammer,
    to_chebyshev,
)
from .roots import (
    Classification,
    RootSet,
    Verdict,
    classify_locations,
    classify_zero_locus,
    find_roots,
    monic_from_roots,
)

__all__ = [
    "BigComplex", "BigReal", "default_bits", "to_complex", "to_decimal", "to_real", "workprec",
    "ConvexHull", "convex_hull", "Basis", "Polynomial", "differentiate", "from_chebyshev",
    "pochhammer", "shifted_pochhammer", "to_chebyshev", "Classification", "RootSet", "Verdict",
    "classify_locations", "classify_zero_locus", "find_roots", "monic_from_roots",
]
