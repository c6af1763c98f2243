"""Metric inequalities between partial isometries and their supports.

For partial isometries u, v the support projections obey

    ‖u*·u − v*·v‖ ≤ ‖u − v‖                       (claim family thm1)

and, when both operands are extremal and d = ‖u − v‖ ≤ √2,

    ‖u*·u − v*·v‖ ≤ d·√(1 − d²/4)                 (claim family thm7)

with the second bound sharp: the co-isometry pair built from two unit
vectors at angle θ attains it exactly (distance 2·sin(θ/2), support
distance sin θ).  The sharpness analysis reduces to minimizing
‖g×e₁ − h×k‖ over unit vectors g, h, whose closed form sin φ is
checked here against a brute-force grid search that never touches the
formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NotExtremal, NotPartialIsometry, OutOfRange
from .numerics import DEFAULT_TOL, ToleranceConfig, identity, zeros
from .operators import BlockOperator, is_extremal, is_partial_isometry

# |margin| at or below this is reported as an equality case.
EQUALITY_TOL = 1e-8

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class InequalityMargin:
    """One evaluation of a bound: margin = rhs − lhs ≥ 0 when it holds."""

    lhs: float
    rhs: float
    margin: float
    is_equality_case: bool


def _require_pi(w: BlockOperator, cfg: ToleranceConfig, name: str) -> None:
    ok, resid = is_partial_isometry(w, cfg)
    if not ok:
        raise NotPartialIsometry(f"{name}: residual {resid:.3e}")


def check_thm1(
    u: BlockOperator, v: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL
) -> InequalityMargin:
    """Support-projection distance against operator distance."""
    _require_pi(u, cfg, "u")
    _require_pi(v, cfg, "v")
    lhs = (u.adjoint() @ u - v.adjoint() @ v).norm()
    rhs = (u - v).norm()
    margin = rhs - lhs
    return InequalityMargin(lhs, rhs, margin, abs(margin) <= EQUALITY_TOL)


def thm7_bound(d: float) -> float:
    """The sharp extremal bound d·√(1 − d²/4), defined on [0, 2]."""
    if not 0.0 <= d <= 2.0:
        raise OutOfRange(f"d = {d!r} outside [0, 2]")
    return d * math.sqrt(1.0 - d * d / 4.0)


def check_thm7(
    u: BlockOperator, v: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL
) -> InequalityMargin:
    """Sharp support bound for extremal pairs; valid for ‖u−v‖ ≤ √2.

    Raises :class:`NotExtremal` if either operand has a block with two
    defects, and :class:`OutOfRange` when the distance exceeds √2 —
    past that point the bound turns around and no longer dominates.
    """
    _require_pi(u, cfg, "u")
    _require_pi(v, cfg, "v")
    if not is_extremal(u, cfg):
        raise NotExtremal("u is not extremal")
    if not is_extremal(v, cfg):
        raise NotExtremal("v is not extremal")
    d = (u - v).norm()
    if d > SQRT2 + 1e-12:
        raise OutOfRange(f"‖u − v‖ = {d:.6f} exceeds √2")
    lhs = (u.adjoint() @ u - v.adjoint() @ v).norm()
    rhs = thm7_bound(min(d, SQRT2))
    margin = rhs - lhs
    return InequalityMargin(lhs, rhs, margin, abs(margin) <= EQUALITY_TOL)


def sharpness_thm7(theta: float, pad: int = 0) -> tuple[BlockOperator, BlockOperator]:
    """The extremal pair attaining the thm7 bound at angle ``theta``.

    Both operators are co-isometries from a (2+pad)-dimensional space
    onto a (1+pad)-dimensional one: the first rows are the covectors of
    two unit vectors at angle θ, and an identity of size ``pad`` rides
    along untouched (it changes neither norm).  By construction
    ‖u − v‖ = 2·sin(θ/2) and ‖u*·u − v*·v‖ = sin θ.
    """
    if not 0.0 < theta <= math.pi / 2:
        raise OutOfRange("theta must lie in (0, π/2]")
    if pad < 0:
        raise ValueError("pad must be >= 0")
    u0 = zeros(1 + pad, 2 + pad)
    v0 = zeros(1 + pad, 2 + pad)
    u0[0, 0] = 1.0
    v0[0, 0] = math.cos(theta)
    v0[0, 1] = math.sin(theta)
    if pad:
        u0[1:, 2:] = identity(pad)
        v0[1:, 2:] = identity(pad)
    return BlockOperator((u0,)), BlockOperator((v0,))


class RankOneMin(NamedTuple):
    closed_form: float
    brute_force: float
    minimizer_x: float
    minimizer_y: float
    grid_step: float


def _rank_one_objective(phi: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Largest eigenvalue of the 2x2 Hermitian matrix
    #   [[1 + cos²φ − 2·x·cosφ,  cosφ·sinφ − (x − iy)·sinφ],
    #    [      (conj)        ,          sin²φ           ]]
    # which is the squared distance ‖g×e₁ − h×k‖² for unit vectors
    # parametrized by (x, y) = overlap coordinates.
    c, s = math.cos(phi), math.sin(phi)
    alpha = 1.0 + c * c - 2.0 * x * c
    gamma = s * s
    beta_re = c * s - x * s
    beta_im = y * s
    half_tr = (alpha + gamma) / 2.0
    rad = np.sqrt(((alpha - gamma) / 2.0) ** 2 + beta_re**2 + beta_im**2)
    return half_tr + rad


def rank_one_min(phi: float, stages: int = 6, grid: int = 200) -> RankOneMin:
    """Minimum of ‖g×e₁ − h×k‖ over unit vectors g, h at angle data φ.

    The closed form is sin φ, attained where the overlap x equals
    cos φ (and its imaginary part y vanishes).  The brute-force value
    comes from evaluating the exact 2×2 eigenvalue objective on a
    progressively zoomed grid over the unit disk — the objective is
    V-shaped near the minimizer, so each 10× zoom buys a digit and the
    default six stages land within ~1e-7 of the true minimum without
    ever consulting the closed form.
    """
    if not 0.0 < phi < math.pi / 2:
        raise OutOfRange("phi must lie in (0, π/2)")
    if stages < 1 or grid < 10:
        raise ValueError("need at least one stage and a 10-point grid")
    cx, cy, half = 0.0, 0.0, 1.0
    step = 2.0 * half / (grid - 1)
    best_val = math.inf
    best_x = best_y = 0.0
    for _ in range(stages):
        xs = np.linspace(cx - half, cx + half, grid)
        ys = np.linspace(cy - half, cy + half, grid)
        xg, yg = np.meshgrid(xs, ys, indexing="ij")
        mask = xg * xg + yg * yg <= 1.0
        vals = np.where(mask, _rank_one_objective(phi, xg, yg), np.inf)
        flat = int(np.argmin(vals))
        i, j = divmod(flat, grid)
        stage_val = float(vals[i, j])
        stage_x, stage_y = float(xg[i, j]), float(yg[i, j])
        if stage_val < best_val:
            best_val, best_x, best_y = stage_val, stage_x, stage_y
        step = float(xs[1] - xs[0])
        cx, cy = stage_x, stage_y
        half = 10.0 * step  # next window: ±10 current cells, ~10× zoom
    return RankOneMin(
        closed_form=math.sin(phi),
        brute_force=math.sqrt(best_val),
        minimizer_x=best_x,
        minimizer_y=best_y,
        grid_step=float(step),
    )


class BoundShapeReport(NamedTuple):
    ok: bool
    rising_ok: bool
    falling_ok: bool
    dominated_ok: bool
    turning_point: float


def bound_shape_check(d_values: Sequence[float]) -> BoundShapeReport:
    """Shape of the thm7 bound along a sorted grid of distances.

    Verifies that d ↦ d·√(1 − d²/4) increases up to √2 and decreases
    after it, and that it never exceeds the plain distance bound d.
    Inputs must be sorted ascending within [0, 2].
    """
    ds = [float(d) for d in d_values]
    if any(b < a for a, b in zip(ds, ds[1:])):
        raise ValueError("d_values must be sorted ascending")
    if ds and (ds[0] < 0.0 or ds[-1] > 2.0):
        raise OutOfRange("d_values must lie in [0, 2]")
    vals = [thm7_bound(d) for d in ds]
    slack = 1e-12
    rising = all(
        v2 >= v1 - slack
        for (d1, v1), (d2, v2) in zip(zip(ds, vals), zip(ds[1:], vals[1:]))
        if d2 <= SQRT2
    )
    falling = all(
        v2 <= v1 + slack
        for (d1, v1), (d2, v2) in zip(zip(ds, vals), zip(ds[1:], vals[1:]))
        if d1 >= SQRT2
    )
    dominated = all(v <= d + slack for d, v in zip(ds, vals))
    return BoundShapeReport(
        ok=rising and falling and dominated,
        rising_ok=rising,
        falling_ok=falling,
        dominated_ok=dominated,
        turning_point=SQRT2,
    )
