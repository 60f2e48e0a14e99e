"""Planar isometries x -> R(phi) F^s x + t, with F the reflection in the x-axis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .angles import Angle, Number, is_exact_number

Vec = tuple[Number, Number]

_FLOAT_TOL = 1e-12


def _exact_pair(pair: Optional[tuple[Number, Number]]) -> bool:
    return pair is not None and is_exact_number(pair[0]) and is_exact_number(pair[1])


@dataclass(frozen=True)
class Isometry:
    """An element of O(2) x| R^2.

    The linear part is R(rotation) when ``reflect`` is false and
    R(rotation) F when it is true; a reflection in a line of angle beta has
    rotation 2*beta. ``cos_sin`` caches cos and sin of the rotation and is
    exact (rational) whenever the caller could supply exact values, e.g. a
    reflection in a line with rational direction vector.
    """

    rotation: Angle = field(default_factory=Angle.zero)
    reflect: bool = False
    translation: Vec = (0, 0)
    cos_sin: Optional[tuple[Number, Number]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", self.rotation.normalized())
        if self.cos_sin is None:
            exact = self.rotation.exact_cos_sin()
            if exact is not None:
                cs: tuple[Number, Number] = exact
            else:
                radians = self.rotation.to_radians()
                cs = (math.cos(radians), math.sin(radians))
            object.__setattr__(self, "cos_sin", cs)
        tx, ty = self.translation
        object.__setattr__(self, "translation", (_tidy(tx), _tidy(ty)))

    # Constructors

    @classmethod
    def identity(cls) -> Isometry:
        return cls()

    @classmethod
    def translation_by(cls, dx: Number, dy: Number) -> Isometry:
        return cls(translation=(dx, dy))

    @classmethod
    def rotation_by(cls, angle: Angle, center: Vec = (0, 0)) -> Isometry:
        linear = cls(rotation=angle)
        cx, cy = center
        rx, ry = linear.linear_apply(center)
        return cls(rotation=angle, translation=(cx - rx, cy - ry), cos_sin=linear.cos_sin)

    @classmethod
    def reflection_in_line(
        cls,
        point: Vec,
        direction: Vec,
        heading: Optional[Angle] = None,
    ) -> Isometry:
        """Reflection in the line through ``point`` along ``direction``.

        Args:
            point: Any point of the line
            direction: Nonzero direction vector of the line
            heading: Exact angle of the line, when known

        Returns:
            The reflection, with exact linear part whenever the direction
            vector is rational or the heading is exact.
        """
        dx, dy = direction
        if dx == 0 and dy == 0:
            raise ValueError("degenerate line direction")
        c: Number
        s: Number
        if heading is not None:
            rotation = heading * 2
            c, s = rotation.exact_cos_sin() or (rotation.cos(), rotation.sin())
        elif is_exact_number(dx) and is_exact_number(dy):
            norm2 = Fraction(dx * dx + dy * dy)
            c, s = (dx * dx - dy * dy) / norm2, (2 * dx * dy) / norm2
            rotation = Angle.from_vector(c, s)
        else:
            norm2f = float(dx) ** 2 + float(dy) ** 2
            c = (float(dx) ** 2 - float(dy) ** 2) / norm2f
            s = 2 * float(dx) * float(dy) / norm2f
            rotation = Angle.from_vector(c, s)
        linear = cls(rotation=rotation, reflect=True, cos_sin=(c, s))
        px, py = point
        lx, ly = linear.linear_apply(point)
        return cls(rotation=rotation, reflect=True, translation=(px - lx, py - ly), cos_sin=(c, s))

    # Action

    @property
    def is_exact(self) -> bool:
        return (
            self.rotation.is_exact
            and _exact_pair(self.cos_sin)
            and _exact_pair(self.translation)
        )

    def linear_apply(self, vector: Vec) -> Vec:
        assert self.cos_sin is not None
        c, s = self.cos_sin
        x, y = vector
        if self.reflect:
            y = -y
        return (c * x - s * y, s * x + c * y)

    def apply(self, point: Vec) -> Vec:
        x, y = self.linear_apply(point)
        tx, ty = self.translation
        return (x + tx, y + ty)

    __call__ = apply

    def act_on_angle(self, theta: Angle) -> Angle:
        """Image of a direction angle under the linear part."""
        if self.reflect:
            return (self.rotation - theta).normalized()
        return (self.rotation + theta).normalized()

    def float_parts(self) -> tuple[float, float, float, float, float, float]:
        """Matrix entries (a, b, c, d) and translation (tx, ty) as floats."""
        assert self.cos_sin is not None
        c, s = float(self.cos_sin[0]), float(self.cos_sin[1])
        tx, ty = float(self.translation[0]), float(self.translation[1])
        if self.reflect:
            return (c, s, s, -c, tx, ty)
        return (c, -s, s, c, tx, ty)

    # Group structure

    def compose(self, other: Isometry) -> Isometry:
        """Return self o other."""
        assert self.cos_sin is not None and other.cos_sin is not None
        c1, s1 = self.cos_sin
        c2, s2 = other.cos_sin
        if self.reflect:
            rotation = self.rotation - other.rotation
            cs = (c1 * c2 + s1 * s2, s1 * c2 - c1 * s2)
        else:
            rotation = self.rotation + other.rotation
            cs = (c1 * c2 - s1 * s2, s1 * c2 + c1 * s2)
        return Isometry(
            rotation=rotation,
            reflect=self.reflect != other.reflect,
            translation=self.apply(other.translation),
            cos_sin=cs,
        )

    __matmul__ = compose

    def inverse(self) -> Isometry:
        assert self.cos_sin is not None
        c, s = self.cos_sin
        if self.reflect:
            linear = Isometry(rotation=self.rotation, reflect=True, cos_sin=(c, s))
        else:
            linear = Isometry(rotation=-self.rotation, cos_sin=(c, -s))
        tx, ty = linear.linear_apply(self.translation)
        return Isometry(
            rotation=linear.rotation,
            reflect=self.reflect,
            translation=(-tx, -ty),
            cos_sin=linear.cos_sin,
        )

    def linear(self) -> Isometry:
        return Isometry(rotation=self.rotation, reflect=self.reflect, cos_sin=self.cos_sin)

    def is_linear_identity(self, tol: float = _FLOAT_TOL) -> bool:
        if self.reflect:
            return False
        if self.rotation.is_exact:
            return self.rotation.pi_units == 0
        assert self.cos_sin is not None
        return abs(float(self.cos_sin[0]) - 1.0) <= tol and abs(float(self.cos_sin[1])) <= tol

    def is_translation(self, tol: float = _FLOAT_TOL) -> bool:
        return self.is_linear_identity(tol)

    def linear_key(self) -> tuple[object, bool]:
        """Hashable key of the linear part; exact for exact rotations."""
        if self.rotation.pi_units is not None:
            return (self.rotation.pi_units, self.reflect)
        return (round(self.rotation.to_radians(), 9) % round(2 * math.pi, 9), self.reflect)

    def describe(self) -> str:
        if self.reflect:
            text = f"reflection(axis {(self.rotation * Fraction(1, 2)).axis()})"
            if not self.rotation.is_exact:
                text = f"reflection(axis {self.rotation.to_radians() / 2 % math.pi:.6g} rad)"
        elif self.is_linear_identity():
            text = "identity"
        else:
            text = f"rotation({self.rotation})"
        if self.translation != (0, 0):
            tx, ty = self.translation
            text += f" + ({tx}, {ty})"
        return text


def compose(g: Isometry, h: Isometry) -> Isometry:
    """Return g o h; exact when both operands are exact."""
    return g.compose(h)


def _tidy(value: Union[Number, float]) -> Number:
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value
