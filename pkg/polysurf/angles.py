"""Angles as exact rational multiples of pi or inexact radians."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Number = Union[int, Fraction, float]

TWO_PI = 2.0 * math.pi

# Residues (in units of pi, mod 2) where sin, cos and tan take rational values.
# Niven: for pi-rational angles these are the only ones.
_EXACT_SIN = {
    Fraction(0): Fraction(0),
    Fraction(1, 6): Fraction(1, 2),
    Fraction(1, 2): Fraction(1),
    Fraction(5, 6): Fraction(1, 2),
    Fraction(1): Fraction(0),
    Fraction(7, 6): Fraction(-1, 2),
    Fraction(3, 2): Fraction(-1),
    Fraction(11, 6): Fraction(-1, 2),
}
_EXACT_COS = {
    Fraction(0): Fraction(1),
    Fraction(1, 3): Fraction(1, 2),
    Fraction(1, 2): Fraction(0),
    Fraction(2, 3): Fraction(-1, 2),
    Fraction(1): Fraction(-1),
    Fraction(4, 3): Fraction(-1, 2),
    Fraction(3, 2): Fraction(0),
    Fraction(5, 3): Fraction(1, 2),
}
_RATIONAL_TAN = {
    Fraction(0): Fraction(0),
    Fraction(1, 4): Fraction(1),
    Fraction(3, 4): Fraction(-1),
}


def is_exact_number(value: Number) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def parse_number(text: str) -> Number:
    """Parse "p/q" or an integer exactly, anything else as a float."""
    text = text.strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    if "." in text or "e" in text.lower():
        return float(text)
    return value.numerator if value.denominator == 1 else value


def format_number(value: Number) -> str:
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Angle:
    """An angle, either exactly ``pi_units * pi`` or inexactly ``rad`` radians.

    Exact angles are stored as reduced fractions and are never silently
    converted to floats. Arithmetic between an exact and an inexact angle
    yields an inexact angle.
    """

    pi_units: Optional[Fraction] = None
    rad: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.pi_units is None) == (self.rad is None):
            raise ValueError("an Angle is either exact or inexact")
        if self.pi_units is not None and not isinstance(self.pi_units, Fraction):
            object.__setattr__(self, "pi_units", Fraction(self.pi_units))

    # Construction

    @classmethod
    def exact(cls, numerator: Union[int, Fraction], denominator: int = 1) -> Angle:
        return cls(pi_units=Fraction(numerator) / denominator)

    @classmethod
    def radians(cls, value: float) -> Angle:
        return cls(rad=float(value))

    @classmethod
    def zero(cls) -> Angle:
        return cls(pi_units=Fraction(0))

    @classmethod
    def parse(cls, text: str) -> Angle:
        """Parse "p/q" (units of pi, exact) or "rad:FLOAT" (inexact)."""
        text = text.strip()
        if text.startswith("rad:"):
            try:
                return cls.radians(float(text[4:]))
            except ValueError as exc:
                raise ValueError(f"bad radian value: {text!r}") from exc
        try:
            return cls(pi_units=Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad angle {text!r}: expected p/q or rad:FLOAT") from exc

    @classmethod
    def from_vector(cls, dx: Number, dy: Number) -> Angle:
        """Direction angle of a nonzero vector, exact for axis and diagonal vectors."""
        if dx == 0 and dy == 0:
            raise ValueError("zero vector has no direction")
        if is_exact_number(dx) and is_exact_number(dy):
            if dy == 0:
                return cls.exact(0 if dx > 0 else 1)
            if dx == 0:
                return cls.exact(1, 2) if dy > 0 else cls.exact(3, 2)
            if dx == dy:
                return cls.exact(1, 4) if dx > 0 else cls.exact(5, 4)
            if dx == -dy:
                return cls.exact(3, 4) if dy > 0 else cls.exact(7, 4)
        value = math.atan2(float(dy), float(dx))
        return cls.radians(value % TWO_PI)

    # Queries

    @property
    def is_exact(self) -> bool:
        return self.pi_units is not None

    def to_radians(self) -> float:
        if self.pi_units is not None:
            return float(self.pi_units) * math.pi
        assert self.rad is not None
        return self.rad

    def normalized(self) -> Angle:
        """Representative in [0, 2pi)."""
        if self.pi_units is not None:
            return Angle(pi_units=self.pi_units % 2)
        return Angle(rad=self.to_radians() % TWO_PI)

    def axis(self) -> Angle:
        """Representative mod pi, for unoriented lines."""
        if self.pi_units is not None:
            return Angle(pi_units=self.pi_units % 1)
        return Angle(rad=self.to_radians() % math.pi)

    def residue(self) -> Optional[Fraction]:
        return None if self.pi_units is None else self.pi_units % 2

    def cos(self) -> float:
        exact = self.exact_cos()
        return float(exact) if exact is not None else math.cos(self.to_radians())

    def sin(self) -> float:
        exact = self.exact_sin()
        return float(exact) if exact is not None else math.sin(self.to_radians())

    def unit_vector(self) -> tuple[float, float]:
        return (self.cos(), self.sin())

    def exact_sin(self) -> Optional[Fraction]:
        residue = self.residue()
        return None if residue is None else _EXACT_SIN.get(residue)

    def exact_cos(self) -> Optional[Fraction]:
        residue = self.residue()
        return None if residue is None else _EXACT_COS.get(residue)

    def exact_cos_sin(self) -> Optional[tuple[Fraction, Fraction]]:
        c, s = self.exact_cos(), self.exact_sin()
        if c is None or s is None:
            return None
        return c, s

    def tan_class(self) -> tuple[bool, Optional[Fraction]]:
        """Return (rational, slope). A vertical direction is rational with slope None.

        Only meaningful for exact angles; an inexact angle reports irrational.
        """
        if self.pi_units is None:
            return False, None
        residue = self.pi_units % 1
        if residue == Fraction(1, 2):
            return True, None
        if residue in _RATIONAL_TAN:
            return True, _RATIONAL_TAN[residue]
        return False, None

    def isclose(self, other: Angle, tol: float = 1e-9, modulus: int = 2) -> bool:
        """Equality mod modulus*pi; exact when both sides are exact."""
        if self.pi_units is not None and other.pi_units is not None:
            return (self.pi_units - other.pi_units) % modulus == 0
        period = modulus * math.pi
        delta = (self.to_radians() - other.to_radians()) % period
        return min(delta, period - delta) <= tol

    def sort_key(self) -> float:
        return self.normalized().to_radians()

    # Arithmetic

    def __add__(self, other: Angle) -> Angle:
        if self.pi_units is not None and other.pi_units is not None:
            return Angle(pi_units=self.pi_units + other.pi_units)
        return Angle(rad=self.to_radians() + other.to_radians())

    def __sub__(self, other: Angle) -> Angle:
        return self + (-other)

    def __neg__(self) -> Angle:
        if self.pi_units is not None:
            return Angle(pi_units=-self.pi_units)
        assert self.rad is not None
        return Angle(rad=-self.rad)

    def __mul__(self, factor: Union[int, Fraction]) -> Angle:
        if self.pi_units is not None and is_exact_number(factor):
            return Angle(pi_units=self.pi_units * factor)
        return Angle(rad=self.to_radians() * float(factor))

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.pi_units is not None:
            return format_number(self.pi_units)
        return f"rad:{self.rad!r}"

    def describe(self) -> str:
        """Human form such as "pi/3" or "0.7 rad"."""
        if self.pi_units is None:
            return f"{self.rad:g} rad"
        p, q = self.pi_units.numerator, self.pi_units.denominator
        if p == 0:
            return "0"
        head = "pi" if p == 1 else ("-pi" if p == -1 else f"{p}pi")
        return head if q == 1 else f"{head}/{q}"

