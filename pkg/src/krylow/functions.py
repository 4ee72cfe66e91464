"""Scalar functions applied to spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

KINDS = ("exp_scaled", "log", "polynomial", "power_series", "identity")


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one real variable, evaluated elementwise.

    Parameters
    ----------
    kind : str
        One of ``exp_scaled`` (``exp(t*x)``), ``log``, ``polynomial``,
        ``power_series`` (a truncated series, evaluated like a polynomial)
        or ``identity``.
    t : float
        Scale for ``exp_scaled``. ``exp(-beta*A)`` is ``t = -beta``.
    coefficients : tuple of float
        Monomial coefficients ``c0 + c1 x + ...`` for the polynomial kinds.
    """

    kind: str
    t: float = 1.0
    coefficients: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown function kind {self.kind!r}")
        if self.kind in ("polynomial", "power_series"):
            if len(self.coefficients) == 0:
                raise ValidationError(f"{self.kind} needs at least one coefficient")
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @classmethod
    def exp(cls, t=1.0):
        return cls("exp_scaled", t=float(t))

    @classmethod
    def log(cls):
        return cls("log")

    @classmethod
    def polynomial(cls, coefficients):
        return cls("polynomial", coefficients=tuple(coefficients))

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def constant(cls, c=1.0):
        return cls("polynomial", coefficients=(float(c),))

    @property
    def degree(self):
        """Polynomial degree, or ``None`` for transcendental kinds."""
        if self.kind == "identity":
            return 1
        if self.kind in ("polynomial", "power_series"):
            c = np.trim_zeros(np.asarray(self.coefficients), "b")
            return max(len(c) - 1, 0)
        return None

    @property
    def is_exp(self):
        return self.kind == "exp_scaled"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exp_scaled":
            return np.exp(self.t * x)
        if self.kind == "log":
            bad = x[~(x > 0)]
            if bad.size:
                raise DomainError(f"log undefined at eigenvalue {bad.flat[0]:.17g}", bad.flat[0])
            return np.log(x)
        if self.kind == "identity":
            return x.copy()
        # Horner
        out = np.zeros_like(x)
        for c in reversed(self.coefficients):
            out = out * x + c
        return out

    def check_domain(self, lo, hi):
        """Raise :class:`DomainError` unless defined on ``[lo, hi]``."""
        if self.kind == "log" and lo <= 0:
            raise DomainError(f"log undefined at eigenvalue {lo:.17g}", lo)

    def label(self):
        if self.kind == "exp_scaled":
            return f"exp({self.t:g}x)"
        if self.kind in ("polynomial", "power_series"):
            return f"{self.kind}[{','.join(f'{c:g}' for c in self.coefficients)}]"
        return self.kind

    def to_dict(self):
        if self.kind == "exp_scaled":
            return {"kind": self.kind, "t": self.t}
        if self.kind in ("polynomial", "power_series"):
            return {"kind": self.kind, "coefficients": list(self.coefficients)}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        if kind == "exp":
            kind = "exp_scaled"
        if "coefficients" in d:
            d["coefficients"] = tuple(d["coefficients"])
        return cls(kind, **d)
