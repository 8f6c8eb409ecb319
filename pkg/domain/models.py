# domain/models.py - Domain entities (dataclasses)
#
# Typed values shared by the numeric modules, the services and the CLI.
# Conversion from/to JSON-shaped dicts happens here only.

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_count(value: Any, minimum: int) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= minimum


@dataclass(frozen=True)
class TaylorPoly:
    """
    Finite Taylor polynomial f(z) = a_1 z + ... + a_n z^n with a_0 = 0.
    coeffs[0] is a_1; the constant term is never stored.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self) -> None:
        values = tuple(complex(c) for c in self.coeffs)
        if not values:
            raise ValueError("TaylorPoly needs at least one coefficient (degree >= 1)")
        for k, c in enumerate(values, start=1):
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"Coefficient a_{k} is not finite: {c!r}")
        object.__setattr__(self, "coeffs", values)

    @classmethod
    def from_values(cls, values: Iterable[complex]) -> "TaylorPoly":
        return cls(tuple(values))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def coeff(self, k: int) -> complex:
        """a_k for k >= 1; zero beyond the stored degree."""
        if k < 1:
            raise ValueError(f"Coefficient index must be >= 1, got {k}")
        return self.coeffs[k - 1] if k <= len(self.coeffs) else 0j

    def as_array(self, length: Optional[int] = None) -> np.ndarray:
        """Coefficients a_1..a_n as complex128, zero-padded to `length`."""
        size = len(self.coeffs) if length is None else max(length, len(self.coeffs))
        out = np.zeros(size, dtype=np.complex128)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def to_dict(self) -> dict[str, Any]:
        """Coefficient-file shape: {"coeffs": [[re, im], ...]} listing a_1 first."""
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: Any) -> "TaylorPoly":
        """Build from the coefficient-file shape. ValueError on malformed input."""
        if not isinstance(data, dict) or "coeffs" not in data:
            raise ValueError('Coefficient data must be an object with a "coeffs" list')
        raw = data["coeffs"]
        if not isinstance(raw, list) or not raw:
            raise ValueError('"coeffs" must be a non-empty list of [re, im] pairs')
        values = []
        for k, pair in enumerate(raw, start=1):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(_is_number(x) for x in pair)
            ):
                raise ValueError(
                    f"Coefficient a_{k} must be a [re, im] pair of numbers, "
                    f"got {pair!r}"
                )
            values.append(complex(float(pair[0]), float(pair[1])))
        return cls(tuple(values))

    def __str__(self) -> str:
        return f"TaylorPoly(degree={self.degree})"


@dataclass(frozen=True)
class BoundInterval:
    """Certified enclosure lo <= true value <= hi of a nonnegative quantity."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"Interval endpoints must be finite, got [{lo}, {hi}]")
        if lo < 0 or hi < 0:
            raise ValueError(f"Interval endpoints must be >= 0, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"Interval lo must not exceed hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def to_dict(self) -> dict[str, float]:
        return {"lo": self.lo, "hi": self.hi, "width": self.width}


@dataclass(frozen=True)
class MetricConfig:
    """
    Parameters of the metric d(f, g) = sum_j lambda_j min{1, max_{|z|<=r_j} |f - g|}.
    lambda_j = lam**j and r_j = 1 - (j + 1)**(-alpha); metric_terms (J) terms are
    evaluated, circle_samples (M) points per circle.
    """

    lam: float = 0.5
    alpha: float = 1.0
    metric_terms: int = 60
    circle_samples: int = 4096

    def __post_init__(self) -> None:
        if not _is_number(self.lam) or not (0.0 < float(self.lam) < 1.0):
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam!r}")
        alpha_ok = _is_number(self.alpha) and math.isfinite(self.alpha)
        if not (alpha_ok and float(self.alpha) > 0.0):
            raise ValueError(f"alpha must be a finite number > 0, got {self.alpha!r}")
        if not _is_count(self.metric_terms, 1):
            raise ValueError(
                f"metric_terms must be an integer >= 1, got {self.metric_terms!r}"
            )
        if not _is_count(self.circle_samples, 8):
            raise ValueError(
                f"circle_samples must be an integer >= 8, got {self.circle_samples!r}"
            )
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alpha", float(self.alpha))

    def to_dict(self) -> dict[str, Any]:
        """Config-file shape (JSON keys as accepted by config.load_config_file)."""
        return {
            "lambda": self.lam,
            "alpha": self.alpha,
            "metric_terms": self.metric_terms,
            "circle_samples": self.circle_samples,
        }


class ClassId(Enum):
    CLASS_A = "A"
    CLASS_B_DEBRANGES = "B"
    CLASS_B_LITTLEWOOD = "B-littlewood"
    CONVEX_SUFFICIENT = "convex"

    @classmethod
    def from_cli(cls, name: str) -> "ClassId":
        """Map the CLI spelling ("A", "B", "B-littlewood", "convex") to a tag."""
        for member in cls:
            if member.value == name:
                return member
        choices = ", ".join(m.value for m in cls)
        raise ValueError(f"Unknown class {name!r}; expected one of: {choices}")


@dataclass(frozen=True)
class PackingCertificate:
    """
    K^(n-1) explicit members, pairwise at metric distance >= separation_lo,
    so N(delta) >= count with delta = separation_lo / 3.
    """

    n: int
    K: int
    count: int
    separation_lo: float
    delta: float
    family: str = "A"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class NetCertificate:
    """
    Grid of (2K+1)^(2n) polynomials of degree <= n covering class B within
    radius_hi. internal is False: centers may leave B by a factor sqrt(2).
    """

    n: int
    K: int
    log_count: float
    radius_hi: float
    tail_bound: float
    grid_constant: float
    internal: bool = False

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["grid"] = (
            f"q_k = k*(s_k + i*t_k)/{self.K}, "
            f"s_k, t_k in -{self.K}..{self.K}, k = 1..{self.n}"
        )
        return data


@dataclass(frozen=True)
class Rho:
    """
    Largest rho = 1/denominator satisfying the packing-scale constraint for
    2 <= n <= n_verified.
    """

    rho: float
    denominator: int
    n_verified: int
    tail_certified: bool
    binding_n: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CurvePoint:
    """One (delta, log N bound) point of a curve; log_inv_delta avoids underflow."""

    n: int
    delta: float
    log_count: float
    log_inv_delta: float


@dataclass(frozen=True)
class SandwichRow:
    n: int
    sharp_lower: float
    proxy_lo: float
    proxy_hi: float
    proxy_error: float
    tail_exact: float
    tail_simple: float

    def holds(self, slack: float = 1e-9) -> bool:
        """sharp_lower <= true distance <= tail_exact, via the proxy interval."""
        return (
            self.sharp_lower <= self.proxy_hi + self.proxy_error + slack
            and self.proxy_lo <= self.tail_exact + slack
            and self.sharp_lower <= self.tail_exact + slack
        )


@dataclass(frozen=True)
class SampleSpec:
    class_id: ClassId
    degree: int
    count: int
    seed: int

    def __post_init__(self) -> None:
        if self.degree < 2:
            raise ValueError(f"Sample degree must be >= 2, got {self.degree}")
        if self.count < 1:
            raise ValueError(f"Sample count must be >= 1, got {self.count}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "class": self.class_id.value,
            "degree": self.degree,
            "count": self.count,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ExponentFit:
    """Slope of log log N against log log(1/delta); window is [2, 2 + alpha]."""

    power: float
    power_pack: float
    window_lower: float
    window_upper: float
    points_used: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class EstimateReport:
    """Empirical pack/cover counts over a delta ladder, for the sample only."""

    deltas: list[float]
    pack_counts: list[int]
    pack_counts_double: list[int]
    cover_counts: list[int]
    exponent_fit: Optional[ExponentFit] = None
    dimension: Optional[float] = None
    bracket_ok: bool = True
    sample_size: int = 0
    # ladder points the dimension slope was fitted on (unsaturated rungs)
    dimension_deltas: list[float] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)

    def rows(self) -> Sequence[tuple[float, int, int]]:
        return list(zip(self.deltas, self.pack_counts, self.cover_counts))

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": "empirical",
            "deltas": list(self.deltas),
            "pack_counts": list(self.pack_counts),
            "pack_counts_double": list(self.pack_counts_double),
            "cover_counts": list(self.cover_counts),
            "exponent_fit": self.exponent_fit.to_dict() if self.exponent_fit else None,
            "dimension": self.dimension,
            "dimension_deltas": list(self.dimension_deltas),
            "sample_size": self.sample_size,
            "bracket_ok": self.bracket_ok,
            "provenance": dict(self.provenance),
        }
