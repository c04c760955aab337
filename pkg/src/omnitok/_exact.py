from fractions import Fraction
import math


def exact(x) -> Fraction:
    """Decimal-literal value of ``x`` (so 0.7 is 7/10, not its binary neighbour)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def ceil_exact(x) -> int:
    return math.ceil(exact(x))


def floor_exact(x) -> int:
    return math.floor(exact(x))


def retained_count(q, n: int) -> int:
    """ceil((1 - q) * n) evaluated on the decimal value of ``q``."""
    return math.ceil((1 - exact(q)) * n)
