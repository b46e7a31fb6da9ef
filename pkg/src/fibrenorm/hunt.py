"""Superattracting Fibonacci parameters in x^d + c and universality ratios.

Locates the parameters c_n whose critical orbit is periodic with period
S_n and carries the full Fibonacci closest-return signature, builds the
consecutive-gap ratio table converging to the universality constant, and
produces the rescaled return-map data used to seed the operator's Newton
search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import series as S
from .dynamics import PowerFamilyMap, ReturnSignature, closest_returns, fib
from .errors import (
    BootstrapDomainError,
    BracketError,
    CombinatoricsError,
    DegenerateSequenceError,
    NoValidBetaError,
    OrbitEscapeError,
    PreconditionError,
    PrecisionLimitError,
)
from .operator import SliceMap, from_vector, to_vector
from .series import Disk, TruncatedSeries


@dataclass(frozen=True)
class HuntRecord:
    """One located superattracting parameter with its verified signature."""

    n: int
    period: int
    c: float
    bracket: tuple[float, float]
    signature: ReturnSignature
    iterations: int

    def __post_init__(self):
        if not self.signature.is_fibonacci_prefix():
            raise CombinatoricsError(
                f"record n={self.n} signature {self.signature.times} is not a "
                "Fibonacci prefix"
            )


@dataclass(frozen=True)
class RatioReport:
    """Consecutive-gap ratios and their accelerated limits."""

    ratios: tuple[float, ...]
    gamma_estimate: float
    extrapolated_gamma: float
    c_infinity_estimate: float


def _critical_value_at_time(c: float, degree: int, time: int) -> float:
    x = 0.0
    for _ in range(time):
        x = x**degree + c
    return x


def _critical_values(cs: np.ndarray, degree: int, time: int) -> np.ndarray:
    x = np.zeros_like(cs)
    for _ in range(time):
        x = x**degree + cs
    return x


def _orbit_and_parameter_derivative(c: float, degree: int, time: int):
    """f_c^time(0) and its parameter derivative d/dc f_c^time(0).

    The derivative obeys D_{k+1} = d * f^k(0)^(d-1) * D_k + 1.
    """
    x = 0.0
    dx = 0.0
    for _ in range(time):
        dx = degree * x ** (degree - 1) * dx + 1.0
        x = x**degree + c
    return x, dx


def _parameter_newton(c: float, degree: int, time: int) -> tuple[float, int]:
    """Polish a root of c -> f_c^time(0) by Newton."""
    steps = 0
    for _ in range(60):
        x, dx = _orbit_and_parameter_derivative(c, degree, time)
        if dx == 0.0:
            break
        step = x / dx
        c_new = c - step
        steps += 1
        if c_new == c:
            break
        c = c_new
        if abs(step) < 1e-17 * max(1.0, abs(c)):
            break
    return c, steps


def superattractor_parameter(
    degree: int, n: int, bracket: tuple[float, float]
) -> HuntRecord:
    """The parameter in `bracket` whose critical point has period S_n.

    The bracket must isolate one sign change of c -> f_c^{S_n}(0); the root
    is bisected, Newton-polished, and its closest-return signature verified
    to be exactly S_0, ..., S_n.
    """
    period = fib(n)
    lo, hi = min(bracket), max(bracket)
    flo = _critical_value_at_time(lo, degree, period)
    fhi = _critical_value_at_time(hi, degree, period)
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change of f_c^{period}(0) on [{lo:.9g}, {hi:.9g}]"
        )
    iters = 0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        fm = _critical_value_at_time(mid, degree, period)
        iters += 1
        if fm == 0.0:
            lo = hi = mid
            break
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    c, steps = _parameter_newton(0.5 * (lo + hi), degree, period)
    iters += steps

    # The orbit residual bottoms out at |d/dc f^{S_n}(0)| * ulp(c), so the
    # accuracy contract is measured in parameter scale (one Newton step).
    residual, dresidual = _orbit_and_parameter_derivative(c, degree, period)
    param_error = abs(residual) / max(1.0, abs(dresidual))
    if abs(residual) >= 1e-13 and param_error >= 1e-13 * max(1.0, abs(c)):
        raise CombinatoricsError(
            f"polished root residual {residual:.3g} too large at n={n}"
        )
    fmap = PowerFamilyMap(degree, c)
    try:
        sig = closest_returns(fmap, period)
    except OrbitEscapeError as exc:
        raise CombinatoricsError(
            f"orbit escapes at the polished root c={c!r}"
        ) from exc
    expected = tuple(fib(i) for i in range(n + 1))
    if sig.times != expected:
        # Distinguish genuine wrong-window hits from the double-precision
        # wall: near the wall the previous closest-return modulus sinks to
        # the orbit-residual floor and signatures become unverifiable.
        prev_best = min(
            abs(_critical_value_at_time(c, degree, fib(i))) for i in range(n)
        )
        if prev_best < 1e3 * max(abs(residual), 1e-16):
            raise PrecisionLimitError(
                f"signature unverifiable at n={n}: closest-return modulus "
                f"{prev_best:.3g} is at the orbit-residual floor",
                max_attained=n - 1,
            )
        raise CombinatoricsError(
            f"root c={c!r} has signature {sig.times}, wanted {expected}"
        )
    return HuntRecord(
        n=n, period=period, c=c, bracket=(lo, hi), signature=sig, iterations=iters
    )


def _scan_bracket(
    degree: int, period: int, lo: float, hi: float, points: int = 4000
) -> Optional[tuple[float, float]]:
    """Finest sign-change bracket of f_c^period(0) on [lo, hi], nearest hi."""
    cs = np.linspace(lo, hi, points)
    vals = _critical_values(cs, degree, period)
    finite = np.isfinite(vals)
    sign = np.sign(vals)
    flips = np.nonzero((sign[:-1] * sign[1:] < 0) & finite[:-1] & finite[1:])[0]
    if len(flips) == 0:
        return None
    i = flips[-1]
    return (cs[i], cs[i + 1])


def fibonacci_bracket_chain(degree: int, n_max: int) -> list[HuntRecord]:
    """Records for n = 1 .. n_max with nested brackets shrinking to c_inf.

    The window for c_{n+1} extends from c_n toward the accumulation side by
    1.5x the previous gap; each candidate root inside it is signature
    checked and the one carrying the Fibonacci prefix is kept.
    """
    if n_max < 3:
        raise PreconditionError("bracket chain needs n_max >= 3")
    records: list[HuntRecord] = []

    # c_1 = -1 for every even degree: f^2(0) = c^d + c = c (c^{d-1} + 1).
    rec1 = superattractor_parameter(degree, 1, (-1.2, -0.8))
    records.append(rec1)

    # First window below c_1: scan down for the period-S_2 root.
    width = 0.35 * abs(rec1.c)
    rec2 = None
    for _ in range(12):
        br = _scan_bracket(degree, fib(2), rec1.c - width, rec1.c - 1e-9)
        if br is not None:
            candidate = superattractor_parameter(degree, 2, br)
            rec2 = candidate
            break
        width *= 1.6
    if rec2 is None:
        raise BracketError(f"no period-{fib(2)} window found below c_1 for d={degree}")
    records.append(rec2)

    for n in range(3, n_max + 1):
        gap = abs(records[-1].c - records[-2].c)
        if gap < 1e-15:
            raise PrecisionLimitError(
                f"bracket width exhausted double precision at n={n}",
                max_attained=records[-1].n,
            )
        side = np.sign(records[-1].c - records[-2].c)
        lo = records[-1].c
        hi = records[-1].c + side * 1.5 * gap
        lo, hi = min(lo, hi), max(lo, hi)
        # Keep the superattracting endpoint itself out of the window.
        shrink = 1e-3 * (hi - lo)
        if side < 0:
            hi -= shrink
        else:
            lo += shrink
        br = _scan_bracket(degree, fib(n), lo, hi)
        if br is None:
            raise BracketError(
                f"no period-{fib(n)} sign change in the derived window at n={n}"
            )
        records.append(superattractor_parameter(degree, n, br))
    return records


def ratio_table(records: Sequence[HuntRecord]) -> RatioReport:
    """Consecutive-gap ratios |c_n - c_{n+1}| / |c_{n+1} - c_{n+2}|.

    gamma_estimate is the last ratio; the extrapolated values apply one
    Aitken delta-squared step to the ratio tail and to c_n itself.
    """
    if len(records) < 5:
        raise PreconditionError("ratio table needs at least 5 records")
    cs = [r.c for r in records]
    gaps = np.diff(cs)
    if np.any(gaps == 0.0):
        raise DegenerateSequenceError("duplicate parameters in the chain")
    ratios = np.abs(gaps[:-1] / gaps[1:])

    gamma_estimate = float(ratios[-1])
    extrapolated_gamma = _aitken_limit(ratios)
    c_infinity = _aitken_limit(np.asarray(cs))
    return RatioReport(
        ratios=tuple(float(r) for r in ratios),
        gamma_estimate=gamma_estimate,
        extrapolated_gamma=extrapolated_gamma,
        c_infinity_estimate=c_infinity,
    )


def _aitken_limit(seq: np.ndarray) -> float:
    """Last well-defined Aitken delta-squared accelerant of the sequence."""
    s = np.asarray(seq, dtype=float)
    if len(s) < 3:
        return float(s[-1])
    best = float(s[-1])
    for k in range(len(s) - 3, -1, -1):
        d1 = s[k + 1] - s[k]
        d2 = s[k + 2] - 2.0 * s[k + 1] + s[k]
        if d2 != 0.0 and abs(d2) > 1e-14 * abs(s[k + 2]):
            best = float(s[k] - d1 * d1 / d2)
            break
    return best


def rescale_chain(degree: int, c: float, depth: int) -> np.ndarray:
    """Cumulative rescalings tau_1 .. tau_depth of the map x^d + c.

    tau_n is the orientation-reversing fixed point of f^{S_n} nearest the
    critical point: an exact consequence of the return identity, it equals
    the product beta_{n-1} ... beta_0 of the successive real
    renormalization rescalings.
    """
    fmap = PowerFamilyMap(degree, c)
    taus = np.empty(depth)
    prev_scale = None
    for n in range(1, depth + 1):
        period = fib(n)
        bound = 0.96 * prev_scale if prev_scale is not None else 0.9 * abs(fmap(0.0))
        tau = _reversing_fixed_point_of_iterate(fmap, period, bound)
        if tau is None:
            raise NoValidBetaError(
                f"no reversing fixed point of f^{period} within |x| < {bound:.3g}"
            )
        taus[n - 1] = tau
        prev_scale = abs(tau)
    return taus


def _reversing_fixed_point_of_iterate(
    fmap: PowerFamilyMap, period: int, bound: float, points: int = 6001
) -> Optional[float]:
    """Largest-|x| fixed point of f^period in (-bound, bound) with Df < 0."""
    grid = np.linspace(-bound, bound, points)
    x = grid.copy()
    dx = np.ones_like(grid)
    for _ in range(period):
        dx = fmap.degree * x ** (fmap.degree - 1) * dx
        x = fmap(x)
    vals = x - grid
    mults = dx
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    best = None
    for i in flips:
        if mults[i] >= 0 and mults[i + 1] >= 0:
            continue
        root = _bisect_iterate(fmap, period, grid[i], grid[i + 1])
        mult = _iterate_derivative(fmap, period, root)
        if mult < 0 and (best is None or abs(root) > abs(best)):
            best = root
    return best


def _bisect_iterate(fmap: PowerFamilyMap, period: int, lo: float, hi: float) -> float:
    def g(x):
        y = x
        for _ in range(period):
            y = fmap(y)
        return y - x

    flo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = g(mid)
        if fm == 0.0 or hi - lo < 1e-17 * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _iterate_derivative(fmap: PowerFamilyMap, period: int, x0: float) -> float:
    x = x0
    dx = 1.0
    for _ in range(period):
        dx = fmap.derivative(x) * dx
        x = fmap(x)
    return dx


# ---------------------------------------------------------------------------
# bootstrap of the operator's Newton seed

#: Disk geometry per degree, frozen from measured rescaled return-map data
#: (|beta|, the rescaled critical value, and fit tail margins of the deep
#: hunt chains).  Criticality 6 has |beta| ~ 0.62, which squeezes the
#: rescaled domains together and limits jet representability: its disks
#: are tighter and its spill threshold correspondingly looser.
_DOMAIN_TABLE: dict[int, tuple[Disk, Disk]] = {
    4: (Disk(0.0, 1.40), Disk(2.55 + 0.0j, 0.65)),
    6: (Disk(0.0, 1.18), Disk(1.96 + 0.0j, 0.14)),
}

_SPILL_TABLE: dict[int, float] = {4: 1e-9, 6: 1e-5}


def default_domains(degree: int) -> tuple[Disk, Disk]:
    """Central/outer disks for the operator at this criticality."""
    if degree in _DOMAIN_TABLE:
        return _DOMAIN_TABLE[degree]
    raise PreconditionError(
        f"no frozen domain geometry for degree {degree}; supply disks explicitly"
    )


def default_spill_threshold(degree: int) -> float:
    """Fit tail bound matched to the degree's representability margin."""
    return _SPILL_TABLE.get(degree, S.DEFAULT_SPILL_THRESHOLD)


def _sampled_iterate(fmap: PowerFamilyMap, z: np.ndarray, steps: int,
                     escape_radius: float) -> np.ndarray:
    w = z.astype(complex)
    for k in range(steps):
        w = fmap(w)
        bad = np.abs(w) > escape_radius
        if np.any(bad):
            raise BootstrapDomainError(
                f"sampled return orbit escaped at step {k + 1} of {steps}; "
                "deepen the bootstrap or shrink the disks"
            )
    return w


def bootstrap_slice_map(
    degree: int,
    record: HuntRecord,
    depth: Optional[int] = None,
    u0: Optional[Disk] = None,
    u1: Optional[Disk] = None,
    order: int = 60,
    even_mode: bool = True,
) -> SliceMap:
    """Rescaled return maps of the hunted polynomial as a normalized seed.

    Samples z -> f^{S_n}(tau_n z) / tau_n on the central disk boundary and
    z -> f^{S_(n-1)}(tau_n z) / tau_n on the outer one at depth n, fits
    both, and projects onto the normalization (the gauge move is tiny:
    tau_n is itself a fixed point of f^{S_n}, so the sampled map fixes 1 up
    to fit error).
    """
    if depth is None:
        depth = record.n - 2
    if depth < 1 or depth > record.n - 2:
        raise PreconditionError(
            f"bootstrap depth must lie in [1, {record.n - 2}] for this record"
        )
    if u0 is None or u1 is None:
        d0, d1 = default_domains(degree)
        u0 = u0 or d0
        u1 = u1 or d1
    spill = default_spill_threshold(degree)
    fmap = PowerFamilyMap(degree, record.c)
    taus = rescale_chain(degree, record.c, depth)
    tau = taus[depth - 1]
    radius = fmap.escape_radius

    pts0 = u0.boundary(S.sample_count(order))
    central_vals = _sampled_iterate(fmap, tau * pts0, fib(depth), radius) / tau
    central = S.fit_from_samples(S.symmetrize_real_boundary(central_vals), u0, order,
                                 parity="even" if even_mode else "all",
                                 spill_threshold=spill)

    pts1 = u1.boundary(S.sample_count(order))
    outer_steps = fib(depth - 1) if depth >= 2 else 1
    outer_vals = _sampled_iterate(fmap, tau * pts1, outer_steps, radius) / tau
    outer = S.fit_from_samples(S.symmetrize_real_boundary(outer_vals), u1, order,
                               spill_threshold=spill)

    raw = SliceMap(degree=degree, central=_zero_low_orders(central, degree),
                   outer=outer, even_mode=even_mode)
    seed = from_vector(raw, to_vector(raw))  # exact normalization gauge
    seed.validate()
    return seed


def _zero_low_orders(central: TruncatedSeries, degree: int) -> TruncatedSeries:
    coeffs = central.coeffs.copy()
    scale = float(np.max(np.abs(coeffs)))
    low = float(np.max(np.abs(coeffs[1:degree]), initial=0.0))
    if low > 1e-6 * scale:
        raise BootstrapDomainError(
            f"sampled central branch has low-order coefficients of size "
            f"{low:.2e}; the rescaled return map is not a degree fold here"
        )
    coeffs[1:degree] = 0.0
    from dataclasses import replace
    return replace(central, coeffs=coeffs)
