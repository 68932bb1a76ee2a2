"""Problem parameters and parameter-space coordinates.

All quantities are dimensionless (hbar = k_c = omega_c = 2m = 1).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional

# Closed-form self-energies assume |z| << k_c; beyond this the polynomial
# machinery still works but the physics is not trusted.
BAND_VALIDITY_LIMIT = 0.5


class Medium(str, enum.Enum):
    ONE_D = "1d"
    THREE_D = "3d"


class NStates(str, enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"


@dataclass(frozen=True)
class ModelParams:
    """One or two discrete levels coupled to a common continuum.

    For ``n_states == SINGLE`` only ``eps_a`` and ``alpha_a`` are used.
    ``alpha_b`` defaults to ``alpha_a``.
    """

    eps_a: float
    eps_b: float = 0.0
    alpha_a: float = 0.1
    alpha_b: Optional[float] = None
    medium: Medium = Medium.ONE_D
    n_states: NStates = NStates.DOUBLE

    def __post_init__(self):
        if self.alpha_b is None:
            object.__setattr__(self, "alpha_b", self.alpha_a)
        object.__setattr__(self, "medium", Medium(self.medium))
        object.__setattr__(self, "n_states", NStates(self.n_states))

    @classmethod
    def single(cls, eps_a: float, alpha: float = 0.1, medium=Medium.ONE_D) -> "ModelParams":
        return cls(eps_a=eps_a, eps_b=0.0, alpha_a=alpha, alpha_b=alpha,
                   medium=medium, n_states=NStates.SINGLE)

    @classmethod
    def double(cls, eps_a: float, eps_b: float, alpha: float = 0.1,
               medium=Medium.ONE_D, alpha_b: Optional[float] = None) -> "ModelParams":
        return cls(eps_a=eps_a, eps_b=eps_b, alpha_a=alpha,
                   alpha_b=alpha if alpha_b is None else alpha_b,
                   medium=medium, n_states=NStates.DOUBLE)

    @property
    def is_single(self) -> bool:
        return self.n_states is NStates.SINGLE

    @property
    def alpha(self) -> float:
        """Coupling of the single-state model (alias of ``alpha_a``)."""
        return self.alpha_a

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class SymmetricCoords:
    """Average/half-difference energies and the rotated couplings."""

    eps_A: float
    eps_D: float
    alpha_A: float
    alpha_D: float

    def to_params(self, medium=Medium.ONE_D) -> ModelParams:
        eps_a, eps_b, alpha_a, alpha_b = from_symmetric(self)
        return ModelParams.double(eps_a, eps_b, alpha_a, medium=medium, alpha_b=alpha_b)


@dataclass(frozen=True)
class PolarCoords:
    """Polar parametrisation eps_D = eps cos(theta), eps_A = eps sin(theta)."""

    eps: float
    theta: float = field(default=math.pi / 4)

    @property
    def eps_A(self) -> float:
        return self.eps * math.sin(self.theta)

    @property
    def eps_D(self) -> float:
        return self.eps * math.cos(self.theta)

    def to_symmetric(self, alpha: float) -> SymmetricCoords:
        """Symmetric coordinates for equal couplings ``alpha_a = alpha_b = alpha``."""
        return SymmetricCoords(self.eps_A, self.eps_D, math.sqrt(2.0) * alpha, 0.0)

    @classmethod
    def from_symmetric(cls, s: SymmetricCoords) -> "PolarCoords":
        theta = math.atan2(s.eps_A, s.eps_D) % (2 * math.pi)
        return cls(math.hypot(s.eps_A, s.eps_D), theta)


def to_symmetric(p: ModelParams) -> SymmetricCoords:
    if p.is_single:
        raise ValueError("symmetric coordinates need a two-state model")
    return SymmetricCoords(
        eps_A=0.5 * (p.eps_a + p.eps_b),
        eps_D=0.5 * (p.eps_a - p.eps_b),
        alpha_A=(p.alpha_a + p.alpha_b) / math.sqrt(2.0),
        alpha_D=(p.alpha_a - p.alpha_b) / math.sqrt(2.0),
    )


def from_symmetric(s: SymmetricCoords):
    """Inverse of :func:`to_symmetric`: returns (eps_a, eps_b, alpha_a, alpha_b)."""
    r = 1.0 / math.sqrt(2.0)
    return (s.eps_A + s.eps_D, s.eps_A - s.eps_D,
            (s.alpha_A + s.alpha_D) * r, (s.alpha_A - s.alpha_D) * r)


def validate(p: ModelParams) -> List[str]:
    """Return human-readable problems with ``p``; empty when all is well.

    Messages starting with ``"error:"`` are hard violations (non-positive
    couplings); ``"warning:"`` marks energies outside the band-edge regime.
    """
    out = []
    couplings = [("alpha_a", p.alpha_a)]
    energies = [("eps_a", p.eps_a)]
    if not p.is_single:
        couplings.append(("alpha_b", p.alpha_b))
        energies.append(("eps_b", p.eps_b))
    for name, val in couplings:
        if not (val > 0 and math.isfinite(val)):
            out.append(f"error: coupling {name}={val!r} must be positive")
    for name, val in energies:
        if not math.isfinite(val):
            out.append(f"error: energy {name}={val!r} is not finite")
        elif abs(val) > BAND_VALIDITY_LIMIT:
            out.append(f"warning: |{name}|={abs(val):g} > {BAND_VALIDITY_LIMIT} "
                       "(closed-form self-energy assumes |z| << k_c)")
    return out


def require_valid(p: ModelParams) -> List[str]:
    """Raise ``ValueError`` on hard errors, return the soft warnings."""
    msgs = validate(p)
    errors = [m for m in msgs if m.startswith("error")]
    if errors:
        raise ValueError("; ".join(errors))
    return msgs
