"""Exact rational Levy index and the fractional quantum numbers.

The order parameter alpha = n/m (reduced, 1/2 < n/m <= 1) fixes the
derivative order 2*alpha and the exponent q = 2*alpha + 1 of the auxiliary
integral solutions.  The "fractional quantum numbers" are the complex
solutions of eps**q = 1; because q = P/Q in lowest terms, the solution set
is exactly the set of P-th roots of unity, where P is the reduced numerator
of (2n + m)/m.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple


@dataclass(frozen=True)
class LevyIndex:
    """Reduced rational index alpha = n/m with 1/2 < n/m <= 1."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n <= 0 or self.m <= 0:
            raise ValueError(f"numerator and denominator must be positive, got {self.n}/{self.m}")
        if math.gcd(self.n, self.m) != 1:
            raise ValueError(f"{self.n}/{self.m} is not a reduced fraction")
        if not (2 * self.n > self.m and self.n <= self.m):
            raise ValueError(
                f"alpha = {self.n}/{self.m} outside (1/2, 1]; the path dimension 2*alpha must lie in (1, 2]"
            )

    @classmethod
    def parse(cls, text: str) -> "LevyIndex":
        """Parse the literal form ``n/m`` (two positive decimal integers).

        Decimal or irrational inputs are rejected: the root enumeration is
        only finite for rational alpha.  The error message suggests a nearby
        reduced fraction for decimal input.
        """
        s = text.strip()
        if "/" in s:
            parts = s.split("/")
            if len(parts) == 2 and parts[0].strip().isdigit() and parts[1].strip().isdigit():
                frac = Fraction(int(parts[0]), int(parts[1]))
                return cls(frac.numerator, frac.denominator)
            raise ValueError(f"cannot parse alpha {text!r}: expected two positive integers 'n/m'")
        try:
            approx = Fraction(s).limit_denominator(40)
        except ValueError:
            raise ValueError(f"cannot parse alpha {text!r}: expected the form 'n/m'") from None
        raise ValueError(
            f"alpha must be an exact rational 'n/m' (finitely many roots exist only then); "
            f"for {text!r} try e.g. '{approx.numerator}/{approx.denominator}'"
        )

    @classmethod
    def from_fraction(cls, frac: Fraction) -> "LevyIndex":
        return cls(frac.numerator, frac.denominator)

    @classmethod
    def snap(cls, value: float, max_den: int = 40) -> "LevyIndex":
        """Snap a decimal alpha to the nearest reduced n/m with m <= max_den."""
        frac = Fraction(value).limit_denominator(max_den)
        return cls(frac.numerator, frac.denominator)

    @property
    def value(self) -> float:
        return self.n / self.m

    @property
    def as_fraction(self) -> Fraction:
        return Fraction(self.n, self.m)

    @property
    def derivative_order(self) -> float:
        """The fractional derivative order 2*alpha in (1, 2]."""
        return 2.0 * self.n / self.m

    @property
    def exponent(self) -> Fraction:
        """q = 2*alpha + 1 as a reduced fraction (2n + m)/m."""
        return Fraction(2 * self.n + self.m, self.m)

    def __str__(self) -> str:
        return f"{self.n}/{self.m}"


@dataclass(frozen=True)
class FractionalQuantumNumber:
    """One complex solution eps of eps**(2*alpha+1) = 1, |eps| = 1."""

    index: int
    value: complex

    def __post_init__(self) -> None:
        if abs(abs(self.value) - 1.0) > 1e-12:
            raise ValueError(f"root must lie on the unit circle, |value| = {abs(self.value)!r}")

    @property
    def argument(self) -> float:
        """Principal argument in (-pi, pi]."""
        return cmath.phase(self.value)


def root_count(a: LevyIndex) -> int:
    """Number P of distinct solutions of eps**(2*alpha+1) = 1.

    P is the reduced numerator of (2n + m)/m.  The set of solutions of
    z**(P/Q) = 1 (taken over all branches) is the set of P-th roots of
    unity, so there are exactly P of them.
    """
    return (2 * a.n + a.m) // math.gcd(2 * a.n + a.m, a.m)


def enumerate_roots(a: LevyIndex) -> list[FractionalQuantumNumber]:
    """All P fractional quantum numbers, ordered by argument in [0, 2*pi).

    Multiplying the exponents by the reduced denominator of 2*alpha + 1
    permutes residues mod P (they are coprime), so enumerating exp(2*pi*i*j/P)
    yields the same set as the de Moivre enumeration exp(2*pi*i*j/q).
    """
    P = root_count(a)
    return [
        FractionalQuantumNumber(index=j, value=cmath.rect(1.0, 2.0 * math.pi * j / P))
        for j in range(P)
    ]


class MinNumeratorResult(NamedTuple):
    minimum: int
    witness: LevyIndex


def min_numerator_bruteforce(m_max: int, odd_m_only: bool = False) -> MinNumeratorResult:
    """Brute-force minimum of the reduced numerator of (2n + m)/m.

    Scans every reduced fraction n/m with m <= m_max and 1/2 < n/m < 1
    (the strictly fractional regime; alpha = 1 is excluded).  Returns the
    minimum together with the first witness attaining it.
    """
    if m_max < 4:
        raise ValueError("m_max must be at least 4")
    best: int | None = None
    witness: LevyIndex | None = None
    for m in range(2, m_max + 1):
        if odd_m_only and m % 2 == 0:
            continue
        for n in range(m // 2 + 1, m):
            if math.gcd(n, m) != 1:
                continue
            num = (2 * n + m) // math.gcd(2 * n + m, m)
            if best is None or num < best:
                best = num
                witness = LevyIndex(n, m)
    assert best is not None and witness is not None
    return MinNumeratorResult(best, witness)
