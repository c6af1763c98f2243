"""Norm-continuous paths between partial isometries.

Two constructions, each returning a sampled :class:`IsometryPath`
through genuine partial isometries:

* :func:`path_thm4` — for ‖u − v‖ < 1.  Stage one polar-corrects the
  straight segment restricted to the right support of u; stage two
  carries the right support projection to that of v along a projection
  path and lifts it through v.  Works for any pair below distance 1.
* :func:`path_thm5` — for extremal endpoints with ‖u − v‖ < 2.  The
  straight segment itself stays uniformly bounded below (every
  interpolant keeps singular values ≥ 1 − d/2), so a single polar-
  corrected stage suffices and extremality persists along the way.

Both refine their sample grid adaptively (bisecting any interval whose
operator-norm step exceeds the configured bound) and record the
smallest spectral gap seen before polar correction — the quantity whose
positivity is the whole reason the construction is continuous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    NotExtremal,
    NotPartialIsometry,
    PatternConflict,
    ShapeMismatch,
    StepTooLarge,
    TooFar,
)
from .numerics import DEFAULT_TOL, ToleranceConfig
from .operators import (
    BlockOperator,
    DefectPattern,
    is_extremal,
    is_partial_isometry,
    projection_rank,
)
from .polar import polar_pi
from .projection_geometry import TwoProjectionPath

_MAX_REFINE_ROUNDS = 12


@dataclass(frozen=True)
class IsometryPath:
    """Sampled path; t runs strictly from 0 to 1.

    ``min_segment_gap`` is recorded while the path is built (smallest
    pre-polar spectral gap over all samples); it cannot be recomputed
    from the samples alone.
    """

    samples: tuple[tuple[float, BlockOperator], ...]
    construction_tag: str
    min_segment_gap: Optional[float] = None

    def __post_init__(self) -> None:
        ts = [t for t, _ in self.samples]
        if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0:
            raise ValueError("path must run from t=0 to t=1")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample parameters must increase strictly")

    @property
    def operators(self) -> tuple[BlockOperator, ...]:
        return tuple(w for _, w in self.samples)


@dataclass(frozen=True)
class PathCertificate:
    all_partial_isometries: bool
    max_pi_residual: float
    max_step: float
    step_bound: float
    endpoints_match: bool
    all_extremal: Optional[bool]
    min_segment_gap: Optional[float]

    @property
    def passed(self) -> bool:
        return (
            self.all_partial_isometries
            and self.max_step <= self.step_bound
            and self.endpoints_match
            and self.all_extremal is not False
        )


def _adaptive_samples(
    sampler: Callable[[float], tuple[BlockOperator, float]],
    resolution: int,
    cfg: ToleranceConfig,
) -> tuple[list[tuple[float, BlockOperator]], float]:
    # Sample t -> (operator, gap) on a uniform grid, then bisect any
    # interval whose endpoint operators differ by more than
    # path_step_max, up to _MAX_REFINE_ROUNDS rounds.
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    grid = [k / (resolution - 1) for k in range(resolution)]
    grid[-1] = 1.0
    samples = []
    min_gap = float("inf")
    for t in grid:
        w, gap = sampler(t)
        samples.append((t, w))
        min_gap = min(min_gap, gap)
    for _ in range(_MAX_REFINE_ROUNDS):
        new_points = []
        for (t0, w0), (t1, w1) in zip(samples, samples[1:]):
            if (w1 - w0).norm() > cfg.path_step_max:
                new_points.append((t0 + t1) / 2.0)
        if not new_points:
            return samples, min_gap
        for t in new_points:
            w, gap = sampler(t)
            samples.append((t, w))
            min_gap = min(min_gap, gap)
        samples.sort(key=lambda item: item[0])
    worst = max((w1 - w0).norm() for (_, w0), (_, w1) in zip(samples, samples[1:]))
    if worst > cfg.path_step_max:
        raise StepTooLarge(
            f"step {worst:.4f} still exceeds {cfg.path_step_max} after "
            f"{_MAX_REFINE_ROUNDS} refinement rounds"
        )
    return samples, min_gap  # pragma: no cover


def _require_pi(w: BlockOperator, cfg: ToleranceConfig, name: str) -> None:
    ok, resid = is_partial_isometry(w, cfg)
    if not ok:
        raise NotPartialIsometry(f"{name}: residual {resid:.3e}")


def path_thm4(
    u: BlockOperator,
    v: BlockOperator,
    resolution: int = 16,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> IsometryPath:
    """Two-stage path between partial isometries at distance < 1.

    Stage one moves through 𝔲(((1−t)·u + t·v)·p) with p = u*·u: the
    operand keeps right support p and all its retained singular values
    stay ≥ 1 − ‖u−v‖, so the polar part varies continuously from u to
    w = 𝔲(v·p).  Stage two moves the support, sampling 𝔲(v·g(t)) along
    a projection path g from p to v*·v.  Endpoints are the inputs,
    exactly; stage boundaries share the middle sample.
    """
    _require_pi(u, cfg, "u")
    _require_pi(v, cfg, "v")
    if u.shape != v.shape:
        raise ShapeMismatch("endpoint shapes differ")
    d = (u - v).norm()
    if d >= 1.0 - cfg.rank_tol:
        raise TooFar(f"‖u − v‖ = {d:.6f} is not < 1")
    p = u.adjoint() @ u
    q = v.adjoint() @ v

    def stage_one(t: float) -> tuple[BlockOperator, float]:
        if t == 0.0:
            data = polar_pi(u, cfg)
            return u, data.gap
        f_t = (1.0 - t) * u + t * v
        data = polar_pi(f_t @ p, cfg)
        return data.u, data.gap

    support_paths = [
        TwoProjectionPath(pb, qb, cfg) for pb, qb in zip(p.blocks, q.blocks)
    ]

    def stage_two(t: float) -> tuple[BlockOperator, float]:
        g_t = BlockOperator(tuple(sp.projection(t) for sp in support_paths))
        data = polar_pi(v @ g_t, cfg)
        if t == 1.0:
            return v, data.gap
        return data.u, data.gap

    first, gap1 = _adaptive_samples(stage_one, resolution, cfg)
    second, gap2 = _adaptive_samples(stage_two, resolution, cfg)
    merged: list[tuple[float, BlockOperator]] = [
        (t / 2.0, w) for t, w in first
    ]
    merged.extend((0.5 + t / 2.0, w) for t, w in second if t > 0.0)
    merged[-1] = (1.0, merged[-1][1])
    return IsometryPath(
        samples=tuple(merged),
        construction_tag="thm4",
        min_segment_gap=min(gap1, gap2),
    )


def path_thm5(
    u: BlockOperator,
    v: BlockOperator,
    resolution: int = 16,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> IsometryPath:
    """Single-segment path between extremal endpoints at distance < 2.

    Samples 𝔲((1−t)·u + t·v).  For extremal endpoints of the same
    block pattern the interpolant's smallest singular value never drops
    below 1 − ‖u−v‖/2, so every sample is again extremal of the same
    pattern.  A block where one endpoint has only a left defect and the
    other only a right defect would break the argument
    (:class:`PatternConflict`) — unreachable for same-shape extremal
    pairs, so hitting it is a finding.
    """
    _require_pi(u, cfg, "u")
    _require_pi(v, cfg, "v")
    if u.shape != v.shape:
        raise ShapeMismatch("endpoint shapes differ")
    if not is_extremal(u, cfg):
        raise NotExtremal("u has a block with both defects nonzero")
    if not is_extremal(v, cfg):
        raise NotExtremal("v has a block with both defects nonzero")
    pat_u = DefectPattern.of(u, cfg)
    pat_v = DefectPattern.of(v, cfg)
    for k, (lu, ru, lv, rv) in enumerate(
        zip(pat_u.left_ranks, pat_u.right_ranks, pat_v.left_ranks, pat_v.right_ranks)
    ):
        if (lu > 0 and ru == 0 and rv > 0 and lv == 0) or (
            ru > 0 and lu == 0 and lv > 0 and rv == 0
        ):
            raise PatternConflict(
                f"block {k}: endpoints defect on opposite sides"
            )
    d = (u - v).norm()
    if d >= 2.0 - cfg.rank_tol:
        raise TooFar(f"‖u − v‖ = {d:.6f} is not < 2")

    def segment(t: float) -> tuple[BlockOperator, float]:
        f_t = (1.0 - t) * u + t * v
        data = polar_pi(f_t, cfg)
        if t == 0.0:
            return u, data.gap
        if t == 1.0:
            return v, data.gap
        return data.u, data.gap

    samples, min_gap = _adaptive_samples(segment, resolution, cfg)
    return IsometryPath(
        samples=tuple(samples),
        construction_tag="thm5",
        min_segment_gap=min_gap,
    )


def verify_path(
    path: IsometryPath,
    require_extremal: bool = False,
    cfg: ToleranceConfig = DEFAULT_TOL,
    endpoints: Optional[tuple[BlockOperator, BlockOperator]] = None,
) -> PathCertificate:
    """Recompute a path's claims from its samples.

    Checks that every sample is a partial isometry, that consecutive
    steps respect the configured bound, that the first/last samples
    equal the given endpoints bit for bit (when provided), and — on
    request — that every sample is extremal.  ``min_segment_gap`` is
    copied from the construction record.
    """
    ops = path.operators
    max_resid = max(is_partial_isometry(w, cfg).residual for w in ops)
    max_step = max((b - a).norm() for a, b in zip(ops, ops[1:]))
    if endpoints is not None:
        head, tail = endpoints
        endpoints_match = all(
            np.array_equal(x, y)
            for x, y in zip(ops[0].blocks, head.blocks)
        ) and all(
            np.array_equal(x, y)
            for x, y in zip(ops[-1].blocks, tail.blocks)
        )
    else:
        endpoints_match = True
    all_ext: Optional[bool] = None
    if require_extremal:
        all_ext = all(is_extremal(w, cfg) for w in ops)
    return PathCertificate(
        all_partial_isometries=max_resid <= cfg.iso_tol,
        max_pi_residual=max_resid,
        max_step=max_step,
        step_bound=cfg.path_step_max,
        endpoints_match=endpoints_match,
        all_extremal=all_ext,
        min_segment_gap=path.min_segment_gap,
    )


VERDICT_RANK = "RankMismatch"
VERDICT_PATTERN = "PatternMismatch"
VERDICT_NONE = "NoObstruction"


@dataclass(frozen=True)
class ObstructionCertificate:
    """Why two partial isometries cannot be joined by a continuous path.

    ``RankMismatch``: some block of u*·u and v*·v carries different
    rank — rank is constant along any norm-continuous path of partial
    isometries, so no path exists.  ``PatternMismatch``: ranks agree
    but the defect patterns differ blockwise (the corner analog of
    "homotopic extremal partial isometries generate the same defect
    ideals").  ``NoObstruction`` asserts nothing beyond the absence of
    these two invariant obstructions.
    """

    verdict: str
    block: Optional[int]
    u_ranks: tuple[int, ...]
    v_ranks: tuple[int, ...]
    u_pattern: DefectPattern
    v_pattern: DefectPattern


def non_homotopy_certificate(
    u: BlockOperator,
    v: BlockOperator,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> ObstructionCertificate:
    """Invariant-based obstruction check for a pair of partial isometries."""
    _require_pi(u, cfg, "u")
    _require_pi(v, cfg, "v")
    if u.shape != v.shape:
        raise ShapeMismatch("operands have different block shapes")
    u_ranks = tuple(
        projection_rank(b, cfg) for b in (u.adjoint() @ u).blocks
    )
    v_ranks = tuple(
        projection_rank(b, cfg) for b in (v.adjoint() @ v).blocks
    )
    pat_u = DefectPattern.of(u, cfg)
    pat_v = DefectPattern.of(v, cfg)
    for k, (ru, rv) in enumerate(zip(u_ranks, v_ranks)):
        if ru != rv:
            return ObstructionCertificate(
                VERDICT_RANK, k, u_ranks, v_ranks, pat_u, pat_v
            )
    mismatch = compare_patterns(pat_u, pat_v)
    if mismatch is not None:
        return ObstructionCertificate(
            VERDICT_PATTERN, mismatch, u_ranks, v_ranks, pat_u, pat_v
        )
    return ObstructionCertificate(
        VERDICT_NONE, None, u_ranks, v_ranks, pat_u, pat_v
    )


def compare_patterns(a: DefectPattern, b: DefectPattern) -> Optional[int]:
    """First block where the defect supports differ, or None."""
    if len(a.left_ranks) != len(b.left_ranks):
        raise ShapeMismatch("patterns cover different block counts")
    for k, (al, ar, bl, br) in enumerate(
        zip(a.left_support, a.right_support, b.left_support, b.right_support)
    ):
        if al != bl or ar != br:
            return k
    return None
