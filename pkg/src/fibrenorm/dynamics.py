"""Real and complex dynamics of x^d + c and two-branch interval maps.

This module owns the combinatorial layer: Fibonacci return times, closest
returns of the critical orbit, escape times, and the real renormalization
of a two-branch map (central branch folding at 0, outer branch univalent).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BracketError,
    MalformedInputError,
    NoValidBetaError,
    OrbitEscapeError,
    PreconditionError,
    RangeError,
    SingularRescaleError,
)

# Largest return time representable in the documented 64-bit contract.
_FIB_LIMIT = 2**63 - 1

# Two closest-return moduli within this tolerance count as "not closer".
TIE_TOLERANCE = 1e-12


def fib(n: int) -> int:
    """Return time S_n with S_0 = 1, S_1 = 2, S_n = S_{n-1} + S_{n-2}."""
    if n < 0:
        raise PreconditionError(f"fib index must be nonnegative, got {n}")
    a, b = 1, 2
    if n == 0:
        return a
    for _ in range(n - 1):
        a, b = b, a + b
        if b > _FIB_LIMIT:
            raise RangeError(f"S_{n} exceeds the 64-bit return-time contract")
    return b


@dataclass(frozen=True)
class PowerFamilyMap:
    """The unicritical family x -> x^degree + c with even degree."""

    degree: int
    c: float

    def __post_init__(self):
        if self.degree < 2 or self.degree % 2 != 0:
            raise MalformedInputError(
                f"degree must be even and >= 2, got {self.degree}"
            )

    def __call__(self, z):
        return z**self.degree + self.c

    def derivative(self, z):
        return self.degree * z ** (self.degree - 1)

    @property
    def escape_radius(self) -> float:
        """Certified escape bound: |x| beyond it grows monotonically."""
        return max(2.0, (abs(self.c) + 1.0) ** (1.0 / (self.degree - 1)) + 1.0)

    def orbit(self, z0, length: int) -> np.ndarray:
        """Orbit z0, f(z0), ..., f^length(z0) as an array of length+1 values."""
        out = np.empty(length + 1, dtype=complex if np.iscomplexobj(z0) else float)
        z = z0
        out[0] = z
        for k in range(1, length + 1):
            z = self(z)
            out[k] = z
        return out


@dataclass(frozen=True)
class ReturnSignature:
    """Strictly increasing closest-return times of the critical orbit."""

    times: tuple[int, ...]

    def __post_init__(self):
        ts = self.times
        if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise MalformedInputError(f"return times not strictly increasing: {ts}")

    def is_fibonacci_prefix(self) -> bool:
        return all(t == fib(i) for i, t in enumerate(self.times))


def closest_returns(fmap: PowerFamilyMap, t_max: int) -> ReturnSignature:
    """Times t <= t_max where |f^t(0)| strictly beats every earlier |f^s(0)|.

    Raises OrbitEscapeError (with the partial signature) if the critical
    orbit leaves the certified escape radius before t_max.
    """
    radius = fmap.escape_radius
    times: list[int] = []
    best = math.inf
    z = 0.0
    for t in range(1, t_max + 1):
        z = fmap(z)
        a = abs(z)
        if a > radius:
            raise OrbitEscapeError(
                f"critical orbit escaped at time {t} (|f^t(0)| = {a:.3g})",
                escape_time=t,
                partial_times=times,
            )
        if a < best - TIE_TOLERANCE:
            times.append(t)
            best = a
    sig = ReturnSignature(tuple(times))
    moduli = [abs(fmap.orbit(0.0, t)[-1]) for t in sig.times]
    assert all(b < a for a, b in zip(moduli, moduli[1:])), "return moduli not decreasing"
    return sig


def escape_time(f: Callable, z, max_iter: int, escape_radius: float) -> Optional[int]:
    """Smallest n <= max_iter with |f^n(z)| > escape_radius, else None."""
    w = z
    for n in range(1, max_iter + 1):
        w = f(w)
        if abs(w) > escape_radius:
            return n
    return None


def _numeric_derivative(f: Callable, x, h: float):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def beta_fixed_point(
    f: Callable,
    bracket: Optional[tuple[float, float]] = None,
    seed=None,
    tol: float = 1e-12,
    max_iter: int = 80,
    derivative: Optional[Callable] = None,
) -> complex:
    """Fixed point beta of f∘f with Df^2(beta) < 0.

    ``f`` is the one-step map (a two-branch map dispatches internally, so
    f(f(x)) composes central-then-outer near the critical point).  Supply
    either a real ``bracket`` for bisection or a (possibly complex) ``seed``
    for Newton.  The returned beta satisfies |f^2(beta) - beta| < tol at the
    working scale, and the multiplier condition is re-verified on exit.
    """

    def g(x):
        return f(f(x)) - x

    def dg(x):
        if derivative is not None:
            y = f(x)
            return derivative(y) * derivative(x) - 1.0
        scale = max(abs(x), 1.0)
        return _numeric_derivative(g, x, 1e-7 * scale)

    x = None
    if bracket is not None:
        lo, hi = bracket
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            x = lo
        elif ghi == 0.0:
            x = hi
        elif glo * ghi > 0:
            raise BracketError(
                f"no sign change of f^2(x)-x on [{lo:.6g}, {hi:.6g}]"
            )
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm == 0.0 or hi - lo < 1e-15 * max(1.0, abs(mid)):
                    break
                if glo * gm < 0:
                    hi, ghi = mid, gm
                else:
                    lo, glo = mid, gm
            x = 0.5 * (lo + hi)
    elif seed is not None:
        x = seed
    else:
        raise PreconditionError("beta_fixed_point needs a bracket or a seed")

    # Newton polish (works for complex seeds / analytic continuation too).
    for _ in range(max_iter):
        gx = g(x)
        scale = max(abs(x), 1.0)
        if abs(gx) < 0.1 * tol * scale:
            break
        d = dg(x)
        if abs(d) < 1e-14:
            raise NoValidBetaError("Newton derivative vanished near candidate beta")
        step = gx / d
        if abs(step) > 10.0 * scale:
            raise NoValidBetaError("Newton for beta diverged")
        x = x - step

    scale = max(abs(x), 1.0)
    if abs(g(x)) >= tol * scale:
        raise NoValidBetaError(
            f"beta candidate residual {abs(g(x)):.3g} exceeds tolerance {tol:.3g}"
        )
    mult = dg(x) + 1.0
    if not (mult.real if isinstance(mult, complex) else mult) < 0.0:
        raise NoValidBetaError(
            f"candidate fixed point has Df^2 = {mult:.6g}, not negative"
        )
    return x


@dataclass(frozen=True)
class RealRenormData:
    """Interval bookkeeping for one level of real Fibonacci renormalization.

    central_domain is the symmetric interval around the critical point,
    outer_domain the interval around the critical value, image the common
    target, beta the orientation-reversing fixed point of the second
    iterate, and central_return / outer_return the two components of the
    first-return domain (return times 2 and 1 respectively).
    """

    central_domain: tuple[float, float]
    outer_domain: tuple[float, float]
    image: tuple[float, float]
    beta: float
    central_return: tuple[float, float]
    outer_return: tuple[float, float]

    def validate(self, symmetry_tol: float = 1e-9) -> None:
        lo, hi = self.central_domain
        if not (lo < 0.0 < hi):
            raise MalformedInputError("0 must be interior to the central domain")
        if abs(lo + hi) > symmetry_tol * (hi - lo):
            raise MalformedInputError(
                f"central domain not symmetric about 0: [{lo:.6g}, {hi:.6g}]"
            )
        olo, ohi = self.outer_domain
        if olo <= 0.0 <= ohi:
            raise MalformedInputError("0 must not lie in the outer domain")
        a, b = sorted(self.central_return)
        c, d = sorted(self.outer_return)
        if max(a, c) <= min(b, d):
            raise MalformedInputError("return components must be disjoint")
        if not (lo <= self.beta <= hi):
            raise MalformedInputError("beta must lie in the central domain")


def _in(x: float, iv: tuple[float, float], slack: float = 0.0) -> bool:
    lo, hi = min(iv), max(iv)
    pad = slack * (hi - lo)
    return lo - pad <= x <= hi + pad


@dataclass(frozen=True)
class TwoBranchRealMap:
    """A real two-branch map: folding central branch plus univalent outer one."""

    central: Callable[[float], float]
    outer: Callable[[float], float]
    data: RealRenormData

    def __call__(self, x: float) -> float:
        if _in(x, self.data.central_domain, 1e-9):
            return self.central(x)
        if _in(x, self.data.outer_domain, 1e-9):
            return self.outer(x)
        raise MalformedInputError(
            f"{x:.6g} lies in neither branch domain of the two-branch map"
        )

    def second_iterate(self, x: float) -> float:
        """outer(central(x)): the return composition near the critical point."""
        return self.outer(self.central(x))


def _bisect(fn: Callable[[float], float], lo: float, hi: float, iters: int = 200) -> float:
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo:.9g}, {hi:.9g}]")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-16 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def _grid_values(fn, grid: np.ndarray) -> np.ndarray:
    """Evaluate fn on a grid, vectorized when the callable supports arrays."""
    try:
        vals = np.asarray(fn(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
    except Exception:
        pass
    return np.array([fn(x) for x in grid], dtype=float)


def _first_exit(fn, q: float, bound: float, direction: int, a: float,
                points: int = 600) -> Optional[float]:
    """First x walking from q toward q + direction*|bound - q| with |fn(x)| = a.

    Returns None if |fn| never reaches a before the bound.  Orientation of
    fn is irrelevant: the crossing of a**2 - fn(x)**2 is bisected.
    """
    end = q + direction * abs(bound - q)
    grid = np.linspace(q, end, points)
    g = a**2 - _grid_values(fn, grid) ** 2
    flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    if len(flips) == 0:
        return None
    i = flips[0]
    return _bisect(lambda x: a**2 - fn(x) ** 2, grid[i], grid[i + 1])


def _preimage_interval(fn, q: float, a: float, reach: float) -> tuple[float, float]:
    """Interval around q on which |fn| <= a, bounded by |fn| = a crossings."""
    lo = _first_exit(fn, q, q - reach, -1, a)
    hi = _first_exit(fn, q, q + reach, +1, a)
    if lo is None or hi is None:
        raise BracketError(
            f"branch around {q:.6g} does not exit the target interval both ways"
        )
    return (min(lo, hi), max(lo, hi))


def induced_two_branch(fmap: PowerFamilyMap, fatten: float = 1.05) -> TwoBranchRealMap:
    """Level-0 two-branch restriction of x^d + c near Fibonacci combinatorics.

    The central domain is the symmetric interval slightly fattening
    [-|f^2(0)|, |f^2(0)|]; the outer domain is the monotone preimage of the
    central domain around the critical value.  Both branches are the plain
    polynomial; the renormalization then produces return times (2, 1).
    """
    u0 = fmap(0.0)
    u1 = fmap(u0)
    if abs(u1) >= abs(u0):
        raise PreconditionError(
            "map is not a closest-return candidate: |f^2(0)| >= |f(0)|"
        )
    a = fatten * abs(u1)
    central = (-a, a)
    outer = _preimage_interval(fmap, u0, a, reach=2.0 * abs(u0))
    data = _complete_renorm_data(fmap, fmap, central, outer)
    return TwoBranchRealMap(central=fmap, outer=fmap, data=data)


def _complete_renorm_data(central_fn, outer_fn, central, outer) -> RealRenormData:
    """Locate beta and the two first-return components for given domains."""
    a = max(central)

    def f2(x):
        return outer_fn(central_fn(x))

    # The second-iterate fold opens toward the interval interior; its
    # orientation-reversing fixed point sits strictly inside (0, a) or
    # (-a, 0).  Scan both sides and keep the negative-multiplier root.
    beta = _locate_reversing_fixed_point(f2, a)

    # Central return component: symmetric interval where f2 stays inside
    # (exactly symmetric because the second iterate is even).
    edge = _first_exit(f2, 0.0, a, +1, a)
    if edge is None:
        edge = a
    central_return = (-edge, edge)

    # Outer return component: around f2(0), one central-branch application.
    u1 = f2(0.0)
    outer_return = _preimage_interval(central_fn, u1, a, reach=1.2 * a)

    return RealRenormData(
        central_domain=central,
        outer_domain=outer,
        image=central,
        beta=beta,
        central_return=central_return,
        outer_return=outer_return,
    )


def _locate_reversing_fixed_point(f2, a: float) -> float:
    """Outermost fixed point of f2 in (-a, a) with Df^2 < 0, via grid scan."""
    grid = np.linspace(-0.98 * a, 0.98 * a, 4001)
    vals = _grid_values(f2, grid) - grid
    sign_flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    candidates = []
    for i in sign_flips:
        root = _bisect(lambda x: f2(x) - x, grid[i], grid[i + 1])
        h = 1e-7 * max(abs(root), 1e-3 * a)
        mult = (f2(root + h) - f2(root - h)) / (2.0 * h)
        if mult < 0.0:
            candidates.append(root)
    if not candidates:
        raise NoValidBetaError(
            "no orientation-reversing fixed point of f^2 in the central domain"
        )
    return max(candidates, key=abs)


def is_fibonacci_renormalizable(f: TwoBranchRealMap) -> bool:
    """Check the four return conditions of the real renormalization step.

    Interval data violating RealRenormData invariants raises
    MalformedInputError; a clean structural "no" returns False.  Whether the
    branch boundaries map into the image boundary is audited separately
    (warning only), since the return conditions alone drive the operator.
    """
    f.data.validate()
    v = f.central(0.0)
    if not _in(v, f.data.outer_domain):
        return False
    u1 = f.outer(v)
    if not _in(u1, f.data.central_domain):
        return False
    u2 = f.central(u1)
    if not _in(u2, f.data.central_domain):
        return False
    try:
        b = beta_fixed_point(f, seed=f.data.beta, tol=1e-9)
    except (NoValidBetaError, MalformedInputError):
        return False
    if not _in(b.real if isinstance(b, complex) else b, f.data.central_domain):
        return False
    _audit_boundary_condition(f)
    return True


def _audit_boundary_condition(f: TwoBranchRealMap, rel_tol: float = 1e-6) -> None:
    ilo, ihi = f.data.image
    width = ihi - ilo
    worst = 0.0
    for x in f.data.central_domain:
        y = f.central(x)
        worst = max(worst, min(abs(y - ilo), abs(y - ihi)) / width)
    for x in f.data.outer_domain:
        y = f.outer(x)
        worst = max(worst, min(abs(y - ilo), abs(y - ihi)) / width)
    if worst > rel_tol:
        warnings.warn(
            f"branch boundaries miss the image boundary by {worst:.2e} (relative); "
            "return conditions hold but the level is not boundary-aligned",
            stacklevel=3,
        )


def real_renormalize(f: TwoBranchRealMap) -> TwoBranchRealMap:
    """One real Fibonacci renormalization: rescale the return pair by beta.

    The new central branch is (1/beta) f^2(beta x) on the rescaled central
    return component, the new outer branch (1/beta) f(beta x) on the
    rescaled outer one.
    """
    if not is_fibonacci_renormalizable(f):
        raise PreconditionError("map is not Fibonacci renormalizable")
    beta = float(
        beta_fixed_point(f, seed=f.data.beta, tol=1e-12).real
    )
    if abs(beta) < 1e-6:
        raise SingularRescaleError(f"rescale factor beta = {beta:.3g} too small")

    central_fn = f.central
    outer_fn = f.outer

    def new_central(x):
        return outer_fn(central_fn(beta * x)) / beta

    def new_outer(x):
        return central_fn(beta * x) / beta

    def scale(iv):
        lo, hi = iv[0] / beta, iv[1] / beta
        return (min(lo, hi), max(lo, hi))

    new_central_domain = scale(f.data.central_return)
    new_outer_domain = scale(f.data.outer_return)
    lo, hi = new_central_domain
    if abs(lo + hi) > 1e-7 * (hi - lo):
        raise MalformedInputError(
            "rescaled central return component is not symmetric about 0"
        )
    data = _complete_renorm_data(
        new_central, new_outer, new_central_domain, new_outer_domain
    )
    data = replace(data, image=scale(f.data.central_domain))
    return TwoBranchRealMap(central=new_central, outer=new_outer, data=data)
