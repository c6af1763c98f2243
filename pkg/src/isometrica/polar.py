"""Canonical polar data of a block operator.

For a matrix a with singular decomposition a = Σ σ_i·l_i·r_i*, the
canonical polar partial isometry is

    u(a) = Σ_{σ_i retained} l_i·r_i*,

the factor that maps the right support of a isometrically onto its
range and vanishes on the kernel (u(0) = 0).  "Retained" is a rank
decision: σ_i > rank_tol·σ_max with σ_max taken across *all* blocks, so
one global scale governs the whole operator.  When singular values
crowd the cutoff the decision is meaningless and the computation
refuses to pick a side (:class:`IllConditioned`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CornerSingular, IllConditioned, NotNilpotent, NotProjection, ShapeMismatch
from .numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    adjoint,
    as_matrix,
    hermitian_eig,
    op_norm,
    svd,
    zeros,
)
from .operators import BlockOperator, projection_rank

# Width of the ambiguity band around the rank cutoff, as a factor in
# each direction.  A singular value inside (cutoff/10, cutoff*10) means
# the input's rank is not decidable at this tolerance.
_GUARD_FACTOR = 10.0


@dataclass(frozen=True)
class PolarData:
    """Everything the polar map produces, in one place.

    ``u`` is the canonical polar partial isometry, ``modulus`` the
    positive factor |a| (= u*·a), ``left_support``/``right_support``
    the projections u·u* and u*·u, ``gap`` the smallest retained
    singular value across all blocks (0 for the zero operator), and
    ``numerical_rank`` the per-block retained counts.
    """

    u: BlockOperator
    modulus: BlockOperator
    left_support: BlockOperator
    right_support: BlockOperator
    gap: float
    numerical_rank: tuple[int, ...]


def _block_singulars(a: BlockOperator):
    out = []
    for b in a.blocks:
        left, sigma, right = svd(b)
        out.append((left, sigma, right))
    return out


def _rank_decision(
    factored, cfg: ToleranceConfig
) -> tuple[float, tuple[int, ...], float]:
    sigma_max = max(
        (float(s[0]) if s.size else 0.0) for (_, s, _) in factored
    )
    if sigma_max == 0.0:
        return 0.0, tuple(0 for _ in factored), 0.0
    cutoff = cfg.rank_tol * sigma_max
    lo, hi = cutoff / _GUARD_FACTOR, cutoff * _GUARD_FACTOR
    gap = math.inf
    ranks = []
    for _, sigma, _ in factored:
        inside = np.sum((sigma > lo) & (sigma < hi))
        if inside:
            raise IllConditioned(
                f"{int(inside)} singular value(s) inside the rank guard band "
                f"({lo:.3e}, {hi:.3e})"
            )
        r = int(np.sum(sigma > cutoff))
        ranks.append(r)
        if r:
            gap = min(gap, float(sigma[r - 1]))
    if not any(ranks):
        return 0.0, tuple(ranks), cutoff
    return float(gap), tuple(ranks), cutoff


def spectral_gap(
    a: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[float, tuple[int, ...]]:
    """Smallest retained singular value and per-block numerical ranks.

    Returns (0.0, all-zero ranks) for the zero operator.  Raises
    :class:`IllConditioned` when any singular value falls inside the
    guard band around the cutoff rank_tol·σ_max.
    """
    gap, ranks, _ = _rank_decision(_block_singulars(a), cfg)
    return gap, ranks


def polar_pi(a: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> PolarData:
    """Canonical polar decomposition a = u·|a| with u a partial isometry.

    The modulus keeps the full positive factor (including directions
    below the rank cutoff), while u truncates to retained directions,
    so a = u·modulus holds within rank_tol·‖a‖ and u·u* / u*·u are the
    support projections of the retained part.
    """
    factored = _block_singulars(a)
    gap, ranks, _ = _rank_decision(factored, cfg)
    u_blocks = []
    mod_blocks = []
    lsup_blocks = []
    rsup_blocks = []
    for (left, sigma, right), r, blk in zip(factored, ranks, a.blocks):
        m, n = blk.shape
        if r == 0:
            u_blocks.append(zeros(m, n))
            lsup_blocks.append(zeros(m, m))
            rsup_blocks.append(zeros(n, n))
        else:
            lr = left[:, :r]
            rr = right[:, :r]
            u_blocks.append(lr @ adjoint(rr))
            lsup_blocks.append(lr @ adjoint(lr))
            rsup_blocks.append(rr @ adjoint(rr))
        sig_full = np.zeros(right.shape[1])
        sig_full[: sigma.size] = sigma
        mod_blocks.append((right * sig_full) @ adjoint(right))
    return PolarData(
        u=BlockOperator(tuple(u_blocks)),
        modulus=BlockOperator(tuple(mod_blocks)),
        left_support=BlockOperator(tuple(lsup_blocks)),
        right_support=BlockOperator(tuple(rsup_blocks)),
        gap=gap,
        numerical_rank=ranks,
    )


def polar_u(a: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> BlockOperator:
    """Shorthand for ``polar_pi(a).u``."""
    return polar_pi(a, cfg).u


def _projection_basis(
    p: np.ndarray, cfg: ToleranceConfig
) -> np.ndarray:
    # Orthonormal columns spanning the range of a projection matrix.
    p = as_matrix(p)
    dev = op_norm(p @ p - p)
    herm = op_norm(p - adjoint(p))
    if dev > cfg.iso_tol or herm > cfg.iso_tol:
        raise NotProjection(
            f"idempotency residual {dev:.3e}, Hermitian residual {herm:.3e}"
        )
    vals, basis = hermitian_eig(p, cfg)
    r = int(np.sum(vals > 0.5))
    return np.ascontiguousarray(basis[:, :r])


def relative_inverse(
    a: BlockOperator,
    p: BlockOperator,
    q: BlockOperator,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> BlockOperator:
    """Inverse of the corner p·a·q between range(q) and range(p).

    Blockwise: compress a to the two ranges, invert the resulting
    square system, and re-embed.  The result s satisfies s = q·s·p,
    s·a·q = q and p·a·s = p.  Raises :class:`CornerSingular` when the
    compressed corner is not square of full rank.
    """
    if not (len(a.blocks) == len(p.blocks) == len(q.blocks)):
        raise ShapeMismatch("a, p, q need the same block count")
    s_blocks = []
    for blk, pb, qb in zip(a.blocks, p.blocks, q.blocks):
        if pb.shape[0] != blk.shape[0] or qb.shape[0] != blk.shape[1]:
            raise ShapeMismatch("p must act on the out side, q on the in side")
        pbasis = _projection_basis(pb, cfg)
        qbasis = _projection_basis(qb, cfg)
        rp, rq = pbasis.shape[1], qbasis.shape[1]
        if rp != rq:
            raise CornerSingular(f"corner ranks differ: {rp} vs {rq}")
        if rp == 0:
            s_blocks.append(zeros(blk.shape[1], blk.shape[0]))
            continue
        core = adjoint(pbasis) @ blk @ qbasis
        left, sigma, right = svd(core)
        if float(sigma[-1]) <= cfg.rank_tol * float(sigma[0]) or sigma[0] == 0.0:
            raise CornerSingular(
                f"compressed corner is singular (σ_min = {float(sigma[-1]):.3e})"
            )
        core_inv = (right / sigma) @ adjoint(left)
        s_blocks.append(qbasis @ core_inv @ adjoint(pbasis))
    return BlockOperator(tuple(s_blocks))


class AlignResult(NamedTuple):
    b: BlockOperator
    nilpotency_residual: float
    delta: float
    delta_bound: float


# Absolute ceiling on ‖(p0·a·s)²‖ before alignment is refused.
_NILPOTENCY_TOL = 1e-10


def align_left_support(
    a_n: BlockOperator,
    p0: BlockOperator,
    s: BlockOperator,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> AlignResult:
    """Multiply a_n by (1 − p0·a_n·s) to clear its p0-component.

    Used when a_n approximates an operator whose range avoids p0 but
    a_n itself leaks into it: with s a relative inverse of the limit
    (s = q·s·p and p·p0 = 0), the factor n := p0·a_n·s is nilpotent
    (n² = 0), hence 1 − n is invertible and b = (1 − n)·a_n has the
    same right support as a_n with p0·b·s·a-type leakage removed.

    Returns the aligned operator, the measured ‖n²‖, the distance
    ‖b − a_n‖ and its a-priori bound ‖p0·a_n‖·‖s‖·‖a_n‖.
    """
    n_op = p0 @ a_n @ s
    nil = (n_op @ n_op).norm()
    if nil > _NILPOTENCY_TOL:
        raise NotNilpotent(
            f"‖(p0·a·s)²‖ = {nil:.3e} exceeds {_NILPOTENCY_TOL:.0e}"
        )
    eye_out = BlockOperator.eye(a_n.shape.out_dims)
    b = (eye_out - n_op) @ a_n
    delta = (b - a_n).norm()
    bound = (p0 @ a_n).norm() * s.norm() * a_n.norm()
    return AlignResult(b, nil, delta, bound)
