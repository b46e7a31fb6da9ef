"""Truncated power series on disks: the numerical Banach-space elements.

A TruncatedSeries is the polynomial jet of an analytic branch on a disk.
Composition and inclusion between domains work by sampling on boundary
circles and refitting through the discrete Fourier transform, which keeps
truncation error visible through the tail-health bound.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import (
    CompositionDomainError,
    EvalDomainError,
    MalformedInputError,
    SingularRescaleError,
    TruncationOverflowError,
)

#: Disk-membership slack accepted by evaluation, as a fraction of the radius.
DEFAULT_SLACK = 0.05

#: Relative tail size above which a fit is declared untrustworthy.
DEFAULT_SPILL_THRESHOLD = 1e-9


@dataclass(frozen=True)
class Disk:
    """A disk in the complex plane."""

    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0) or not np.isfinite(self.radius):
            raise MalformedInputError(f"disk radius must be positive, got {self.radius}")

    def boundary(self, m: int) -> np.ndarray:
        """m equispaced boundary points starting at angle 0."""
        angles = 2.0 * np.pi * np.arange(m) / m
        return self.center + self.radius * np.exp(1j * angles)

    def contains(self, z, slack: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.asarray(z) - self.center)
                           <= self.radius * (1.0 + slack)))


@dataclass(frozen=True)
class TruncatedSeries:
    """Polynomial jet sum c_k (z - center)^k trusted on its disk."""

    disk: Disk
    coeffs: np.ndarray
    parity: str = "all"  # "all" or "even" (odd-index coefficients vanish)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.ndim != 1 or len(coeffs) < 2:
            raise MalformedInputError("series needs coefficients c_0 .. c_N, N >= 1")
        if not np.all(np.isfinite(coeffs)):
            raise MalformedInputError("series coefficients must be finite")
        if self.parity not in ("all", "even"):
            raise MalformedInputError(f"unknown parity {self.parity!r}")
        if self.parity == "even" and np.any(coeffs[1::2] != 0.0):
            raise MalformedInputError("even-parity series has nonzero odd coefficients")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, z, slack: float = DEFAULT_SLACK):
        """Horner evaluation, guarding against leaving the disk beyond slack."""
        z = np.asarray(z, dtype=complex)
        w = z - self.disk.center
        excursion = float(np.max(np.abs(w))) / self.disk.radius if w.size else 0.0
        if excursion > 1.0 + slack:
            raise EvalDomainError(
                f"evaluation at |z - center|/radius = {excursion:.4f} exceeds "
                f"slack {slack:.2f}",
                excursion=excursion,
            )
        acc = np.full_like(w, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * w + c
        if np.isscalar(z) or z.ndim == 0:
            return complex(acc)
        return acc

    def __call__(self, z, slack: float = DEFAULT_SLACK):
        return self.eval(z, slack=slack)

    def tail_ratio(self) -> float:
        """|c_N| radius^N relative to the largest coefficient (spill measure)."""
        top = float(np.max(np.abs(self.coeffs)))
        if top == 0.0:
            return 0.0
        return float(abs(self.coeffs[-1])) * self.disk.radius**self.order / top

    def is_real(self, tol: float = 1e-9) -> bool:
        scale = max(float(np.max(np.abs(self.coeffs))), 1e-300)
        return float(np.max(np.abs(self.coeffs.imag))) <= tol * scale


def fit_from_samples(
    values: Sequence[complex],
    disk: Disk,
    order: int,
    parity: str = "all",
    spill_threshold: float = DEFAULT_SPILL_THRESHOLD,
) -> TruncatedSeries:
    """Series whose boundary restriction matches equispaced samples.

    ``values`` are samples of the target at disk.boundary(M) with
    M >= 2*order + 2.  Fourier coefficients beyond the requested order are
    folded into the tail check: a violation means the function is not well
    represented at this order on this disk.
    """
    vals = np.asarray(values, dtype=complex)
    m = len(vals)
    if m < 2 * order + 2:
        raise MalformedInputError(
            f"need at least {2 * order + 2} samples for order {order}, got {m}"
        )
    if not np.all(np.isfinite(vals)):
        raise TruncationOverflowError("boundary samples are not finite")
    hat = np.fft.fft(vals) / m
    scaled = hat[: order + 1]
    powers = disk.radius ** np.arange(order + 1)
    coeffs = scaled / powers
    if parity == "even":
        coeffs = coeffs.copy()
        coeffs[1::2] = 0.0
    series = TruncatedSeries(disk=disk, coeffs=coeffs, parity=parity)
    ratio = series.tail_ratio()
    if ratio > spill_threshold:
        raise TruncationOverflowError(
            f"tail ratio {ratio:.3e} exceeds spill threshold {spill_threshold:.1e}: "
            f"order {order} does not represent the function on this disk"
        )
    return series


def sample_count(order: int) -> int:
    """Default boundary sampling density for fits and sup norms."""
    return max(4 * order, 2 * order + 2, 64)


def symmetrize_real_boundary(values: np.ndarray) -> np.ndarray:
    """Project boundary samples of a real-analytic map onto conjugate symmetry.

    For samples at angles 2*pi*j/M on a real-centered circle, the partner of
    index j is M - j; averaging with the reflected conjugate removes the
    antisymmetric part of amplified sampling roundoff and makes the Fourier
    coefficients real to machine precision.
    """
    v = np.asarray(values, dtype=complex)
    reflected = np.conj(np.roll(v[::-1], 1))
    return 0.5 * (v + reflected)


def fit_function(
    fn,
    disk: Disk,
    order: int,
    parity: str = "all",
    spill_threshold: float = DEFAULT_SPILL_THRESHOLD,
) -> TruncatedSeries:
    """Fit a callable by sampling it on the disk boundary."""
    pts = disk.boundary(sample_count(order))
    return fit_from_samples(fn(pts), disk, order, parity=parity,
                            spill_threshold=spill_threshold)


def compose(
    outer: TruncatedSeries,
    inner: TruncatedSeries,
    order: int | None = None,
    slack: float = DEFAULT_SLACK,
    spill_threshold: float = DEFAULT_SPILL_THRESHOLD,
) -> TruncatedSeries:
    """outer ∘ inner on inner's disk, by boundary sampling and refit.

    The image of inner's boundary circle must stay within outer's disk up
    to the given slack, checked on the samples.
    """
    if order is None:
        order = max(outer.order, inner.order)
    pts = inner.disk.boundary(sample_count(order))
    mid = inner.eval(pts, slack=slack)
    excursion = float(np.max(np.abs(mid - outer.disk.center))) / outer.disk.radius
    if excursion > 1.0 + slack:
        raise CompositionDomainError(
            f"inner image reaches {excursion:.4f} of outer disk radius "
            f"(slack {slack:.2f})",
            excursion=excursion,
        )
    vals = outer.eval(mid, slack=slack)
    return fit_from_samples(vals, inner.disk, order,
                            spill_threshold=spill_threshold)


def rescale(s: TruncatedSeries, beta: complex,
            target_disk: Disk | None = None) -> TruncatedSeries:
    """The renormalization rescale z -> (1/beta) s(beta z).

    Coefficients transform as c_k -> c_k beta^(k-1).  The default target
    disk is the source disk scaled by 1/|beta| (so the rescale is exact);
    an explicit smaller target is accepted when it fits inside.
    """
    if abs(beta) < 1e-6:
        raise SingularRescaleError(f"rescale factor {beta!r} below 1e-6")
    k = np.arange(len(s.coeffs))
    coeffs = s.coeffs * beta ** (k - 1)
    if target_disk is None:
        target_disk = Disk(center=s.disk.center / beta, radius=s.disk.radius / abs(beta))
    else:
        reach = abs(beta * target_disk.center - s.disk.center) \
            + abs(beta) * target_disk.radius
        if reach > s.disk.radius * (1.0 + DEFAULT_SLACK):
            raise EvalDomainError(
                f"beta * target disk leaves the source disk "
                f"({reach:.4f} > {s.disk.radius:.4f})",
                excursion=reach / s.disk.radius,
            )
    return TruncatedSeries(disk=target_disk, coeffs=coeffs, parity=s.parity)


def derivative(s: TruncatedSeries) -> TruncatedSeries:
    """Term-by-term derivative, one order lower."""
    n = s.order
    if n == 1:
        coeffs = np.array([s.coeffs[1], 0.0], dtype=complex)
    else:
        coeffs = s.coeffs[1:] * np.arange(1, n + 1)
    return TruncatedSeries(disk=s.disk, coeffs=coeffs, parity="all")


def sup_norm(s: TruncatedSeries, samples: int | None = None) -> float:
    """Max modulus over boundary samples: the Banach norm via the maximum principle."""
    m = samples if samples is not None else sample_count(s.order)
    pts = s.disk.boundary(m)
    return float(np.max(np.abs(s.eval(pts, slack=1e-12))))


def zero_like(s: TruncatedSeries) -> TruncatedSeries:
    return replace(s, coeffs=np.zeros_like(s.coeffs))


def add(a: TruncatedSeries, b: TruncatedSeries, scale: complex = 1.0) -> TruncatedSeries:
    """a + scale * b for series sharing one disk."""
    if a.disk != b.disk:
        raise MalformedInputError("series addition needs a common disk")
    n = max(len(a.coeffs), len(b.coeffs))
    coeffs = np.zeros(n, dtype=complex)
    coeffs[: len(a.coeffs)] += a.coeffs
    coeffs[: len(b.coeffs)] += scale * np.asarray(b.coeffs)
    parity = a.parity if a.parity == b.parity else "all"
    return TruncatedSeries(disk=a.disk, coeffs=coeffs, parity=parity)
