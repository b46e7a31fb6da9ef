"""The complex Fibonacci renormalization operator on normalized slice maps.

A SliceMap holds two polynomial jets: a degree-d folding branch on a disk
around the critical point (normalized so the map fixes 1 and has vanishing
derivatives 1..d-1 at 0) and a univalent branch on a disjoint disk around
the critical value.  The operator rescales the second-iterate return pair
by the reversing fixed point beta of the second iterate; composing with
the involution that negates the outer branch turns the operator's
period-two cycle into fixed points reachable by Newton in coefficient
space.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import series as S
from .errors import (
    CompositionDomainError,
    ConditioningError,
    MalformedInputError,
    NeutralMultiplierError,
    NonConvergenceError,
    NoValidBetaError,
    NumericalFailureError,
    PreconditionError,
    SingularRescaleError,
)
from .series import Disk, TruncatedSeries

#: Evaluation slack used inside operator steps.  The branches are analytic
#: far beyond their storage disks (they restrict polynomial-like maps), so
#: moderate extrapolation is safe; fit tail health stays the hard guard.
OPERATOR_EVAL_SLACK = 0.25

#: Slack for the range check "central image lands in the outer disk".
OPERATOR_RANGE_SLACK = 0.15

#: Coefficients required to vanish structurally may carry at most this
#: fraction of the largest coefficient before renormalize refuses to
#: zero them silently.
STRUCTURAL_NOISE = 1e-6


@dataclass(frozen=True)
class SliceMap:
    """Normalized two-branch map: central jet on U_0, outer jet on U_1."""

    degree: int
    central: TruncatedSeries
    outer: TruncatedSeries
    even_mode: bool = True

    def __post_init__(self):
        if self.degree < 2 or self.degree % 2 != 0:
            raise MalformedInputError(f"degree must be even >= 2, got {self.degree}")

    def validate(self, norm_tol: float = 1e-8) -> None:
        u0, u1 = self.central.disk, self.outer.disk
        if abs(u0.center) > 1e-12:
            raise MalformedInputError("central disk must be centered at 0")
        if abs(complex(1.0) - u0.center) >= u0.radius:
            raise MalformedInputError("the normalization point 1 must lie in U_0")
        if abs(u1.center) <= u1.radius:
            raise MalformedInputError("0 must not lie in the outer disk")
        if abs(u1.center - u0.center) <= u0.radius + u1.radius:
            raise MalformedInputError("U_0 and U_1 must have disjoint closures")
        lows = self.central.coeffs[1 : self.degree]
        if np.any(lows != 0.0):
            raise MalformedInputError(
                "central coefficients c_1..c_{d-1} must vanish exactly"
            )
        if self.even_mode and self.central.parity != "even":
            raise MalformedInputError("even mode requires an even central branch")
        err = abs(self.central.eval(1.0) - 1.0)
        if err >= norm_tol:
            raise MalformedInputError(f"|f(1) - 1| = {err:.3e} breaks normalization")

    @property
    def order(self) -> int:
        return self.central.order

    def critical_value(self) -> complex:
        return complex(self.central.coeffs[0])

    def is_real(self, tol: float = 1e-9) -> bool:
        return (
            self.central.is_real(tol)
            and self.outer.is_real(tol)
            and abs(self.outer.disk.center.imag) < tol
        )


@dataclass(frozen=True)
class TangentMap:
    """Tangent vector to the normalized slice: v(1) = 0, v^(i)(0) = 0, i < d."""

    central: TruncatedSeries
    outer: TruncatedSeries


@dataclass(frozen=True)
class CycleSolution:
    """A solved fixed point of (renormalize ∘ involution)."""

    map: SliceMap
    beta: float
    residual: float
    newton_iters: int

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise MalformedInputError(f"cycle beta must lie in (0, 1), got {self.beta}")


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of an operator derivative with margin bookkeeping."""

    eigenvalues: tuple[complex, ...]
    unstable_count: int
    neutral_count: int
    margin: float
    truncation_order: int
    drift: float

    @property
    def stable_count(self) -> int:
        return len(self.eigenvalues) - self.unstable_count - self.neutral_count


@dataclass(frozen=True)
class Verdict:
    """Hyperbolicity verdict: conclusive only under small spectral drift."""

    hyperbolic: Optional[bool]
    unstable_eigenvalue: complex
    gamma: float
    conclusive: bool
    reason: str


def phi_involution(f: SliceMap) -> SliceMap:
    """Negate the outer branch coefficientwise; a linear isometric involution."""
    return replace(f, outer=replace(f.outer, coeffs=-f.outer.coeffs))


def phi_tangent(v: TangentMap) -> TangentMap:
    return replace(v, outer=replace(v.outer, coeffs=-v.outer.coeffs))


# ---------------------------------------------------------------------------
# beta location on slice maps


def beta_fixed_point_slice(
    f: SliceMap,
    seed: complex,
    tol: float = 1e-13,
    max_iter: int = 60,
    slack: float = OPERATOR_EVAL_SLACK,
) -> complex:
    """Reversing fixed point of outer∘central near the seed, by Newton."""
    dc = S.derivative(f.central)
    do = S.derivative(f.outer)
    x = complex(seed)
    for _ in range(max_iter):
        mid = f.central.eval(x, slack=slack)
        val = f.outer.eval(mid, slack=slack) - x
        der = do.eval(mid, slack=slack) * dc.eval(x, slack=slack) - 1.0
        if abs(der) < 1e-14:
            raise NoValidBetaError("degenerate Newton derivative for beta")
        step = val / der
        x = x - step
        if abs(step) < tol * max(1.0, abs(x)):
            break
    mid = f.central.eval(x, slack=slack)
    resid = abs(f.outer.eval(mid, slack=slack) - x)
    if resid > 1e-10 * max(1.0, abs(x)):
        raise NoValidBetaError(f"beta Newton stalled at residual {resid:.3e}")
    mult = do.eval(mid, slack=slack) * dc.eval(x, slack=slack)
    if mult.real >= 0.0:
        raise NoValidBetaError(f"second-iterate multiplier {mult:.4f} not reversing")
    return x


def estimate_beta_real(f: SliceMap, slack: float = OPERATOR_EVAL_SLACK) -> Optional[float]:
    """Scan the positive real trace for the reversing fixed point of f^2."""
    r0 = f.central.disk.radius
    xs = np.linspace(0.05 * r0, 0.95 * r0, 400)
    try:
        mids = f.central.eval(xs, slack=slack)
        vals = f.outer.eval(mids, slack=1.0).real - xs
    except Exception:
        return None
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in flips[::-1]:
        try:
            x = beta_fixed_point_slice(f, 0.5 * (xs[i] + xs[i + 1]))
        except NoValidBetaError:
            continue
        if 0.0 < x.real < r0 and abs(x.imag) < 1e-8:
            return float(x.real)
    return None


# ---------------------------------------------------------------------------
# the operator


def renormalize(
    f: SliceMap,
    beta_seed: Optional[complex] = None,
    target: Optional[tuple[Disk, Disk]] = None,
    order: Optional[int] = None,
    eval_slack: float = OPERATOR_EVAL_SLACK,
    range_slack: float = OPERATOR_RANGE_SLACK,
    spill_threshold: float = S.DEFAULT_SPILL_THRESHOLD,
) -> tuple[SliceMap, complex]:
    """One Fibonacci renormalization: (1/b) f^2(b z) on U_0, (1/b) f(b z) on U_1.

    b is the reversing fixed point of the second iterate continued from
    beta_seed (located on the positive real trace when no seed is given).
    The output lives on `target` disks (defaults to the input's own), and
    the normalization of the output is asserted, not imposed: it holds
    automatically because b is a second-iterate fixed point.
    """
    if beta_seed is None:
        est = estimate_beta_real(f)
        if est is None:
            raise NoValidBetaError("no reversing fixed point on the positive trace")
        beta_seed = est
    beta = beta_fixed_point_slice(f, beta_seed, slack=eval_slack)
    if abs(beta) < 1e-6:
        raise SingularRescaleError(f"beta = {beta!r} too small to rescale by")

    u0_t, u1_t = target if target is not None else (f.central.disk, f.outer.disk)
    n = order if order is not None else f.order

    # Central branch of the renormalization: z -> f(f(beta z)) / beta.
    pts0 = u0_t.boundary(S.sample_count(n))
    inner0 = f.central.eval(beta * pts0, slack=eval_slack)
    excursion = float(np.max(np.abs(inner0 - f.outer.disk.center))) / f.outer.disk.radius
    if excursion > 1.0 + range_slack:
        raise CompositionDomainError(
            f"central image reaches {excursion:.4f} of the outer disk radius; "
            "the map left the operator's domain",
            excursion=excursion,
        )
    central_vals = f.outer.eval(inner0, slack=range_slack) / beta
    parity = "even" if f.even_mode else "all"
    new_central = S.fit_from_samples(central_vals, u0_t, n, parity=parity,
                                     spill_threshold=spill_threshold)

    # Outer branch: z -> f(beta z) / beta via the central branch.
    pts1 = u1_t.boundary(S.sample_count(n))
    outer_vals = f.central.eval(beta * pts1, slack=eval_slack) / beta
    new_outer = S.fit_from_samples(outer_vals, u1_t, n,
                                   spill_threshold=spill_threshold)

    new_central = _clean_structural_zeros(new_central, f.degree)
    out = SliceMap(degree=f.degree, central=new_central, outer=new_outer,
                   even_mode=f.even_mode)
    norm_err = abs(out.central.eval(1.0) - 1.0)
    if norm_err > 1e-7:
        raise NumericalFailureError(
            f"output normalization |Rf(1) - 1| = {norm_err:.3e}; "
            "beta is not a second-iterate fixed point at working precision"
        )
    return out, beta


def _clean_structural_zeros(central: TruncatedSeries, degree: int) -> TruncatedSeries:
    """Zero coefficients c_1..c_{d-1}, which vanish identically for the
    composed fold; refuse if they carry more than fit noise."""
    coeffs = central.coeffs.copy()
    scale = float(np.max(np.abs(coeffs)))
    chunk = coeffs[1:degree]
    if scale > 0 and float(np.max(np.abs(chunk), initial=0.0)) > STRUCTURAL_NOISE * scale:
        raise NumericalFailureError(
            "low-order central coefficients exceed fit noise; "
            "the critical point is not degree-d at working precision"
        )
    coeffs[1:degree] = 0.0
    return replace(central, coeffs=coeffs)


def cycle_step(
    f: SliceMap,
    beta_seed: Optional[complex] = None,
    **kwargs,
) -> tuple[SliceMap, complex]:
    """One application of (involution ∘ renormalize).

    On the even slice this equals renormalize(involution(f)); computing the
    renormalization first keeps beta on the positive real axis.
    """
    out, beta = renormalize(f, beta_seed=beta_seed, **kwargs)
    return phi_involution(out), beta


# ---------------------------------------------------------------------------
# coefficient-vector coordinates


def free_central_indices(degree: int, order: int, even_mode: bool) -> list[int]:
    step = 2 if even_mode else 1
    start = degree if (not even_mode or degree % 2 == 0) else degree + 1
    return list(range(start, order + 1, step))


def to_vector(f: SliceMap) -> np.ndarray:
    """Free real coordinates: central c_d.. (c_0 is gauge), all outer."""
    idx = free_central_indices(f.degree, f.central.order, f.even_mode)
    vec = np.concatenate([f.central.coeffs[idx], f.outer.coeffs])
    if float(np.max(np.abs(vec.imag), initial=0.0)) > 1e-8 * max(1.0, float(np.max(np.abs(vec)))):
        raise MalformedInputError("coefficient vector is not real at working precision")
    return vec.real.copy()


def from_vector(template: SliceMap, u: np.ndarray) -> SliceMap:
    """Rebuild a normalized SliceMap from free coordinates.

    The gauge coefficient c_0 = 1 - sum(free central) enforces f(1) = 1
    exactly; structural zeros are rebuilt exactly.
    """
    idx = free_central_indices(template.degree, template.central.order,
                               template.even_mode)
    nc = len(idx)
    central = np.zeros(template.central.order + 1, dtype=complex)
    central[idx] = u[:nc]
    central[0] = 1.0 - np.sum(u[:nc])
    outer = np.asarray(u[nc:], dtype=complex)
    if len(outer) != template.outer.order + 1:
        raise MalformedInputError("coordinate vector length mismatch")
    parity = "even" if template.even_mode else "all"
    return SliceMap(
        degree=template.degree,
        central=TruncatedSeries(template.central.disk, central, parity=parity),
        outer=TruncatedSeries(template.outer.disk, outer),
        even_mode=template.even_mode,
    )


def tangent_to_vector(v: TangentMap, degree: int, even_mode: bool) -> np.ndarray:
    idx = free_central_indices(degree, v.central.order, even_mode)
    vec = np.concatenate([v.central.coeffs[idx], v.outer.coeffs])
    return vec.real.copy()


def tangent_from_vector(template: SliceMap, u: np.ndarray) -> TangentMap:
    """Tangent with v(1) = 0 enforced through the gauge coefficient."""
    idx = free_central_indices(template.degree, template.central.order,
                               template.even_mode)
    nc = len(idx)
    central = np.zeros(template.central.order + 1, dtype=complex)
    central[idx] = u[:nc]
    central[0] = -np.sum(u[:nc])
    parity = "even" if template.even_mode else "all"
    return TangentMap(
        central=TruncatedSeries(template.central.disk, central, parity=parity),
        outer=TruncatedSeries(template.outer.disk, np.asarray(u[nc:], dtype=complex)),
    )


def map_difference_norm(a: SliceMap, b: SliceMap) -> float:
    """Sup norm over both branch boundaries of a - b."""
    dc = S.add(a.central, b.central, scale=-1.0)
    do = S.add(a.outer, b.outer, scale=-1.0)
    return max(S.sup_norm(dc), S.sup_norm(do))


# ---------------------------------------------------------------------------
# Newton search for the cycle


def find_cycle(
    initial: SliceMap,
    tol: float = 1e-10,
    max_iters: int = 40,
    verbose: bool = False,
) -> CycleSolution:
    """Fixed point of (involution ∘ renormalize) by damped quasi-Newton.

    The seed's orientation is normalized first: if the reversing fixed
    point of its second iterate lies on the negative axis, the involution
    is applied (both cycle maps are fixed points; this picks the one with
    beta in (0, 1)).  The Jacobian is finite-difference and reused for up
    to three accepted steps; steps are halved up to eight times on
    residual increase.
    """
    f = initial
    beta_est = estimate_beta_real(f)
    if beta_est is None:
        f = phi_involution(f)
        beta_est = estimate_beta_real(f)
        if beta_est is None:
            raise NoValidBetaError(
                "seed has no reversing fixed point on either orientation"
            )
    beta = beta_est

    def step_map(u: np.ndarray, seed: float) -> tuple[np.ndarray, SliceMap, float]:
        g = from_vector(f, u)
        out, b = cycle_step(g, beta_seed=seed)
        return to_vector(out), out, float(b.real)

    u = to_vector(f)
    fu, out, beta = step_map(u, beta)
    res_vec = fu - u
    residual = map_difference_norm(out, from_vector(f, u))
    trace = [residual]
    jac = None
    jac_age = 0

    for iteration in range(max_iters):
        if residual < tol:
            solution = from_vector(f, u)
            solution.validate()
            return CycleSolution(
                map=solution, beta=beta, residual=residual,
                newton_iters=iteration,
            )
        if jac is None or jac_age >= 3:
            jac = _fd_jacobian(step_map, u, beta)
            jac_age = 0
        try:
            delta = np.linalg.solve(jac - np.eye(len(u)), -res_vec)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(
                "singular Newton system; try damping or a deeper seed"
            ) from exc

        lam = 1.0
        accepted = False
        for _ in range(8):
            u_try = u + lam * delta
            try:
                fu_try, out_try, beta_try = step_map(u_try, beta)
            except (CompositionDomainError, NoValidBetaError):
                lam *= 0.5
                continue
            res_try = map_difference_norm(out_try, from_vector(f, u_try))
            if res_try < residual or res_try < tol:
                u, fu, out, beta = u_try, fu_try, out_try, beta_try
                res_vec = fu - u
                residual = res_try
                accepted = True
                break
            lam *= 0.5
        trace.append(residual)
        if verbose:
            print(f"  newton iter {iteration + 1}: residual {residual:.3e}")
        if not accepted:
            jac = None
            jac_age = 0
            if len(trace) >= 2 and trace[-1] >= trace[-2]:
                raise NonConvergenceError(
                    "Newton step rejected after 8 halvings", residual_trace=trace
                )
            continue
        jac_age += 1
        if len(trace) > 5 and trace[-1] > 0.9 * trace[-6]:
            raise NonConvergenceError(
                "residual reduction below 10% over 5 steps", residual_trace=trace
            )

    if residual < tol:
        solution = from_vector(f, u)
        solution.validate()
        return CycleSolution(map=solution, beta=beta, residual=residual,
                             newton_iters=max_iters)
    raise NonConvergenceError(
        f"no convergence to {tol:.1e} within {max_iters} iterations",
        residual_trace=trace,
    )


def _fd_jacobian(step_map, u: np.ndarray, beta: float, h: float = 1e-7) -> np.ndarray:
    n = len(u)
    jac = np.empty((n, n))
    scale = max(1.0, float(np.max(np.abs(u))))
    for k in range(n):
        hk = h * scale
        up = u.copy()
        up[k] += hk
        um = u.copy()
        um[k] -= hk
        fp, _, _ = step_map(up, beta)
        fm, _, _ = step_map(um, beta)
        jac[:, k] = (fp - fm) / (2.0 * hk)
    return jac


# ---------------------------------------------------------------------------
# operator derivative


def derivative_apply(
    f: SliceMap,
    v: TangentMap,
    mode: str = "analytic",
    beta_seed: Optional[complex] = None,
    eval_slack: float = OPERATOR_EVAL_SLACK,
) -> TangentMap:
    """Derivative of the plain renormalization at f applied to tangent v.

    Analytic mode runs the one-step variation recursion
    a_1 = v, a_2(x) = v(f(x)) + Df(f(x)) a_1(x),
    differentiates the fixed-point equation f^2(beta) = beta implicitly to
    get the beta variation, and assembles the rescaled formula on both
    disks.  Finite-difference mode is a centered difference of the full
    renormalization along v with adaptive step.
    """
    if mode == "finite_diff":
        return _derivative_finite_diff(f, v, beta_seed=beta_seed)
    if mode != "analytic":
        raise PreconditionError(f"unknown derivative mode {mode!r}")

    if beta_seed is None:
        beta_seed = estimate_beta_real(f)
        if beta_seed is None:
            raise NoValidBetaError("cannot seed beta for the derivative")
    beta = beta_fixed_point_slice(f, beta_seed, slack=eval_slack)

    dc = S.derivative(f.central)
    do = S.derivative(f.outer)

    def a2_and_mult(x):
        mid = f.central.eval(x, slack=eval_slack)
        vc = v.central.eval(x, slack=eval_slack)
        vo = v.outer.eval(mid, slack=OPERATOR_RANGE_SLACK)
        dmid = do.eval(mid, slack=OPERATOR_RANGE_SLACK)
        a2 = vo + dmid * vc
        mult = dmid * dc.eval(x, slack=eval_slack)
        return a2, mult

    a2_beta, mult_beta = a2_and_mult(beta)
    denom = 1.0 - mult_beta
    if abs(denom) < 1e-8:
        raise NeutralMultiplierError(
            f"|1 - Df^2(beta)| = {abs(denom):.2e}: implicit beta variation invalid"
        )
    dbeta = a2_beta / denom

    n = f.order
    # Central target: n = 2 in the rescaled variation formula.
    pts0 = f.central.disk.boundary(S.sample_count(n))
    x0 = beta * pts0
    mid0 = f.central.eval(x0, slack=eval_slack)
    rf_central = f.outer.eval(mid0, slack=OPERATOR_RANGE_SLACK) / beta
    a2, mult = a2_and_mult(x0)
    t_central = (-dbeta / beta) * rf_central + (a2 + mult * dbeta * pts0) / beta

    # Outer target: n = 1.
    pts1 = f.outer.disk.boundary(S.sample_count(n))
    x1 = beta * pts1
    rf_outer = f.central.eval(x1, slack=eval_slack) / beta
    t_outer = (-dbeta / beta) * rf_outer \
        + (v.central.eval(x1, slack=eval_slack)
           + dc.eval(x1, slack=eval_slack) * dbeta * pts1) / beta

    parity = "even" if f.even_mode else "all"
    central_fit = S.fit_from_samples(t_central, f.central.disk, n, parity=parity,
                                     spill_threshold=np.inf)
    outer_fit = S.fit_from_samples(t_outer, f.outer.disk, n,
                                   spill_threshold=np.inf)
    central_fit = _zero_tangent_structure(central_fit, f.degree)
    return TangentMap(central=central_fit, outer=outer_fit)


def _zero_tangent_structure(central: TruncatedSeries, degree: int) -> TruncatedSeries:
    coeffs = central.coeffs.copy()
    coeffs[1:degree] = 0.0
    return replace(central, coeffs=coeffs)


def _derivative_finite_diff(
    f: SliceMap,
    v: TangentMap,
    beta_seed: Optional[complex] = None,
    h_scale: float = 1e-6,
) -> TangentMap:
    vnorm = max(S.sup_norm(v.central), S.sup_norm(v.outer))
    if vnorm == 0.0:
        return TangentMap(central=S.zero_like(v.central), outer=S.zero_like(v.outer))
    fnorm = max(S.sup_norm(f.central), S.sup_norm(f.outer))
    h = h_scale * max(1.0, fnorm) / vnorm

    def shifted(sign: float) -> SliceMap:
        central = S.add(f.central, v.central, scale=sign * h)
        outer = S.add(f.outer, v.outer, scale=sign * h)
        return SliceMap(degree=f.degree, central=central, outer=outer,
                        even_mode=f.even_mode)

    plus, _ = renormalize(shifted(+1.0), beta_seed=beta_seed)
    minus, _ = renormalize(shifted(-1.0), beta_seed=beta_seed)
    central = replace(
        plus.central,
        coeffs=(plus.central.coeffs - minus.central.coeffs) / (2.0 * h),
    )
    outer = replace(
        plus.outer,
        coeffs=(plus.outer.coeffs - minus.outer.coeffs) / (2.0 * h),
    )
    return TangentMap(central=central, outer=outer)


def jacobian_matrix(
    f: SliceMap,
    mode: str = "analytic",
    operator: str = "renorm",
    beta_seed: Optional[complex] = None,
) -> np.ndarray:
    """Dense derivative matrix over the free-coefficient basis.

    operator="renorm" differentiates the plain renormalization;
    operator="cycle" composes with the involution's diagonal sign action,
    giving the derivative of the cycle step.
    """
    if operator not in ("renorm", "cycle"):
        raise PreconditionError(f"unknown operator {operator!r}")
    if beta_seed is None:
        beta_seed = estimate_beta_real(f)
    u = to_vector(f)
    n = len(u)
    cols = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        vk = tangent_from_vector(f, e)
        image = derivative_apply(f, vk, mode=mode, beta_seed=beta_seed)
        cols[:, k] = tangent_to_vector(image, f.degree, f.even_mode)
    if operator == "cycle":
        cols = phi_sign_matrix(f) @ cols
    return cols


def phi_sign_matrix(f: SliceMap) -> np.ndarray:
    """The involution's action on free coordinates: +1 central, -1 outer."""
    idx = free_central_indices(f.degree, f.central.order, f.even_mode)
    signs = np.concatenate([np.ones(len(idx)), -np.ones(f.outer.order + 1)])
    return np.diag(signs)


# ---------------------------------------------------------------------------
# spectrum and verdict


def spectrum(
    matrix: np.ndarray,
    margin: float = 0.05,
    truncation_order: int = 0,
    drift: float = float("nan"),
) -> SpectrumReport:
    """All eigenvalues by dense QR iteration, sorted by descending modulus.

    ``drift`` is the change of the top modulus under an order-refined rerun
    of the producing pipeline; callers that have not rerun leave it NaN and
    the verdict stays inconclusive.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MalformedInputError("spectrum needs a square matrix")
    if not np.all(np.isfinite(m)):
        raise MalformedInputError("matrix entries must be finite")
    try:
        eigs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("eigenvalue iteration failed") from exc
    order = np.argsort(-np.abs(eigs))
    eigs = eigs[order]
    moduli = np.abs(eigs)
    unstable = int(np.sum(moduli > 1.0 + margin))
    neutral = int(np.sum((moduli >= 1.0 - margin) & (moduli <= 1.0 + margin)))
    return SpectrumReport(
        eigenvalues=tuple(complex(e) for e in eigs),
        unstable_count=unstable,
        neutral_count=neutral,
        margin=margin,
        truncation_order=truncation_order,
        drift=drift,
    )


def hyperbolicity_verdict(
    report: SpectrumReport,
    drift_tol: float = 1e-3,
    squared_top: Optional[float] = None,
    squared_tol: float = 1e-4,
) -> Verdict:
    """Exactly one expanding eigenvalue and an empty neutral band.

    gamma is the top modulus of the cycle-step derivative.  When the top
    modulus of the squared operator's derivative is supplied, gamma^2 must
    match it to `squared_tol` relative.
    """
    top = report.eigenvalues[0]
    gamma = abs(top)
    if not np.isfinite(report.drift) or report.drift > drift_tol:
        return Verdict(
            hyperbolic=None,
            unstable_eigenvalue=top,
            gamma=gamma,
            conclusive=False,
            reason=f"drift {report.drift:.3e} exceeds tolerance {drift_tol:.1e}",
        )
    if squared_top is not None:
        rel = abs(gamma**2 - squared_top) / abs(squared_top)
        if rel > squared_tol:
            raise NumericalFailureError(
                f"gamma^2 = {gamma**2:.8f} vs squared-operator top "
                f"{squared_top:.8f}: relative gap {rel:.2e}"
            )
    ok = report.unstable_count == 1 and report.neutral_count == 0
    return Verdict(
        hyperbolic=bool(ok),
        unstable_eigenvalue=top,
        gamma=gamma,
        conclusive=True,
        reason="one expanding eigenvalue, empty neutral band" if ok else (
            f"unstable={report.unstable_count}, neutral={report.neutral_count}"
        ),
    )
