"""Parsing of tuning-parameter rules such as ``1.5n^-1/4``."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from rankinfer.errors import InvalidArgument

_RULE = re.compile(r"^\s*(?P<scale>\d*\.?\d*(?:[eE][-+]?\d+)?)\s*\*?\s*n\^\(?(?P<exp>-?\d+(?:/\d+)?)\)?\s*$")


@dataclass(frozen=True)
class KappaRule:
    """``kappa_n = scale * n^exponent``, or a fixed ``value`` when given."""

    scale: float = 1.0
    exponent: Fraction = Fraction(-1, 4)
    value: float | None = None

    def __post_init__(self) -> None:
        if self.value is not None and not self.value > 0:
            raise InvalidArgument(f"kappa must be positive, got {self.value}")
        if not self.scale > 0:
            raise InvalidArgument(f"kappa scale must be positive, got {self.scale}")

    def __call__(self, n: int) -> float:
        if self.value is not None:
            return self.value
        return self.scale * float(n) ** float(self.exponent)

    @property
    def label(self) -> str:
        if self.value is not None:
            return repr(self.value)
        e = self.exponent
        power = f"n^{e.numerator}/{e.denominator}" if e.denominator != 1 else f"n^{e.numerator}"
        return power if self.scale == 1.0 else f"{self.scale:g}{power}"

    @classmethod
    def parse(cls, text: str) -> KappaRule:
        """Accept ``n^-1/4``, ``1.5n^-1/3``, ``2*n^(-1/5)`` or a plain positive number."""
        m = _RULE.match(text)
        if m:
            scale = float(m["scale"]) if m["scale"] else 1.0
            return cls(scale=scale, exponent=Fraction(m["exp"]))
        try:
            return cls(value=float(text))
        except ValueError:
            raise InvalidArgument(f"cannot parse kappa rule {text!r}") from None
