"""Block operators and partial-isometry predicates.

A :class:`BlockOperator` is a tuple of rectangular complex matrices —
an element of a direct sum of operator corners.  All algebra is
blockwise; mixing operators of different block shapes raises
:class:`~isometrica.errors.ShapeMismatch` rather than broadcasting.

A partial isometry satisfies w·w*·w = w.  Its defect projections are
1 − w·w* (left) and 1 − w*·w (right); an operator is *extremal* when no
block has both defects nonzero, which is exactly when nothing can be
glued onto it to increase its support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence, Union

import numpy as np

from . import rng as _rng
from .errors import NotPartialIsometry, RankTooLarge, ShapeMismatch
from .numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    adjoint,
    as_matrix,
    hermitian_eigvals,
    identity,
    op_norm,
    svd,
    zeros,
)

SeedLike = Union[int, np.random.Generator]


@dataclass(frozen=True)
class BlockShape:
    """Tuple of (out_dim, in_dim) pairs, one per block."""

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("BlockShape needs at least one block")
        norm = []
        for b in self.blocks:
            out_dim, in_dim = int(b[0]), int(b[1])
            if out_dim < 1 or in_dim < 1:
                raise ValueError(f"block dims must be >= 1, got {(out_dim, in_dim)}")
            norm.append((out_dim, in_dim))
        object.__setattr__(self, "blocks", tuple(norm))

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def out_dims(self) -> tuple[int, ...]:
        return tuple(b[0] for b in self.blocks)

    @property
    def in_dims(self) -> tuple[int, ...]:
        return tuple(b[1] for b in self.blocks)

    def transpose(self) -> "BlockShape":
        return BlockShape(tuple((i, o) for o, i in self.blocks))


def _as_shape(shape) -> BlockShape:
    if isinstance(shape, BlockShape):
        return shape
    return BlockShape(tuple(tuple(b) for b in shape))


@dataclass(frozen=True)
class BlockOperator:
    """Element of a direct sum of rectangular matrix corners."""

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "blocks", tuple(as_matrix(b) for b in self.blocks)
        )
        if not self.blocks:
            raise ValueError("BlockOperator needs at least one block")

    @property
    def shape(self) -> BlockShape:
        return BlockShape(tuple(b.shape for b in self.blocks))

    @classmethod
    def zero(cls, shape) -> "BlockOperator":
        shape = _as_shape(shape)
        return cls(tuple(zeros(o, i) for o, i in shape))

    @classmethod
    def eye(cls, dims: Iterable[int]) -> "BlockOperator":
        return cls(tuple(identity(int(d)) for d in dims))

    def map_blocks(self, fn: Callable[[np.ndarray], np.ndarray]) -> "BlockOperator":
        return BlockOperator(tuple(fn(b) for b in self.blocks))

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(tuple(adjoint(b) for b in self.blocks))

    def norm(self) -> float:
        """Operator norm: the max over blocks of the block norm."""
        return max(op_norm(b) for b in self.blocks)

    def _check_same_shape(self, other: "BlockOperator") -> None:
        if self.shape != other.shape:
            raise ShapeMismatch(
                f"block shapes differ: {self.shape.blocks} vs {other.shape.blocks}"
            )

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_same_shape(other)
        return BlockOperator(
            tuple(a + b for a, b in zip(self.blocks, other.blocks))
        )

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_same_shape(other)
        return BlockOperator(
            tuple(a - b for a, b in zip(self.blocks, other.blocks))
        )

    def __mul__(self, scalar: complex) -> "BlockOperator":
        return BlockOperator(tuple(scalar * b for b in self.blocks))

    __rmul__ = __mul__

    def __neg__(self) -> "BlockOperator":
        return self * (-1.0)

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        if len(self.blocks) != len(other.blocks):
            raise ShapeMismatch("block counts differ")
        out = []
        for a, b in zip(self.blocks, other.blocks):
            if a.shape[1] != b.shape[0]:
                raise ShapeMismatch(
                    f"cannot compose blocks {a.shape} @ {b.shape}"
                )
            out.append(a @ b)
        return BlockOperator(tuple(out))

    def allclose(self, other: "BlockOperator", tol: float = 0.0) -> bool:
        self._check_same_shape(other)
        return all(
            np.allclose(a, b, rtol=0.0, atol=tol)
            for a, b in zip(self.blocks, other.blocks)
        )


def left_identity(w: BlockOperator) -> BlockOperator:
    """Identity on the out-side spaces of w's blocks."""
    return BlockOperator.eye(w.shape.out_dims)


def right_identity(w: BlockOperator) -> BlockOperator:
    """Identity on the in-side spaces of w's blocks."""
    return BlockOperator.eye(w.shape.in_dims)


class PartialIsometryCheck(NamedTuple):
    ok: bool
    residual: float


def is_partial_isometry(
    w: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL
) -> PartialIsometryCheck:
    """Test w·w*·w = w; the residual is the norm of the difference."""
    resid = (w @ w.adjoint() @ w - w).norm()
    return PartialIsometryCheck(resid <= cfg.iso_tol, resid)


def projection_rank(p: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    """Rank of a (near-)projection matrix.

    The eigenvalues of a projection sit at 0 and 1, so counting those
    above 1/2 is stable under any perturbation below 1/2.  A fast path
    rounds the trace when it is unambiguous (the trace of a projection
    is its rank); otherwise the spectrum is counted directly.
    """
    p = as_matrix(p)
    tr = float(np.real(np.trace(p)))
    if abs(tr - round(tr)) < 0.01:
        dev = op_norm(p @ p - p)
        if dev <= 0.01:
            return int(round(tr))
    vals = hermitian_eigvals(p)
    return int(np.sum(vals > 0.5))


def defect_projections(
    w: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[BlockOperator, BlockOperator]:
    """Left and right defect projections (1 − w·w*, 1 − w*·w).

    Requires a genuine partial isometry; otherwise the "defects" are
    not projections and nothing downstream is meaningful.
    """
    ok, resid = is_partial_isometry(w, cfg)
    if not ok:
        raise NotPartialIsometry(f"residual {resid:.3e} exceeds iso_tol")
    p0 = left_identity(w) - w @ w.adjoint()
    q0 = right_identity(w) - w.adjoint() @ w
    return p0, q0


@dataclass(frozen=True)
class DefectPattern:
    """Blockwise ranks of the two defect projections."""

    left_ranks: tuple[int, ...]
    right_ranks: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.left_ranks) != len(self.right_ranks):
            raise ValueError("left/right rank tuples must have equal length")

    @classmethod
    def of(cls, w: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> "DefectPattern":
        p0, q0 = defect_projections(w, cfg)
        return cls(
            tuple(projection_rank(b, cfg) for b in p0.blocks),
            tuple(projection_rank(b, cfg) for b in q0.blocks),
        )

    @property
    def left_support(self) -> tuple[bool, ...]:
        """Blocks where the left defect is nonzero."""
        return tuple(r > 0 for r in self.left_ranks)

    @property
    def right_support(self) -> tuple[bool, ...]:
        return tuple(r > 0 for r in self.right_ranks)

    def is_extremal(self) -> bool:
        return all(
            l == 0 or r == 0 for l, r in zip(self.left_ranks, self.right_ranks)
        )


def is_extremal(w: BlockOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    """No block carries both a left and a right defect.

    This is the corner form of the extremality criterion: u is extremal
    in the unit ball exactly when (1−u·u*)·x·(1−u*·u) vanishes for
    every x, and in a direct sum of corners that localizes block by
    block.
    """
    return DefectPattern.of(w, cfg).is_extremal()


def _random_pi_block(
    gen: np.random.Generator, out_dim: int, in_dim: int, rank: int
) -> np.ndarray:
    if rank == 0:
        return zeros(out_dim, in_dim)
    g = _rng.complex_gaussian(gen, out_dim, in_dim)
    left, _, right = svd(g)
    return left[:, :rank] @ adjoint(right[:, :rank])


def _as_generator(seed: SeedLike, stream: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return _rng.stream_generator(int(seed), stream)


def random_partial_isometry(
    shape, ranks: Sequence[int], seed: SeedLike
) -> BlockOperator:
    """Random partial isometry with the prescribed blockwise ranks.

    Each block is the polar part of a complex Gaussian matrix truncated
    to the requested rank, so the defect ranks are exact by
    construction.
    """
    shape = _as_shape(shape)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ShapeMismatch("one rank per block required")
    for (o, i), r in zip(shape, ranks):
        if r < 0 or r > min(o, i):
            raise RankTooLarge(f"rank {r} impossible in a {o}x{i} block")
    gen = _as_generator(seed)
    return BlockOperator(
        tuple(
            _random_pi_block(gen, o, i, r) for (o, i), r in zip(shape, ranks)
        )
    )


def random_extremal(shape, seed: SeedLike) -> BlockOperator:
    """Random extremal partial isometry: every block at full min-rank."""
    shape = _as_shape(shape)
    ranks = tuple(min(o, i) for o, i in shape)
    return random_partial_isometry(shape, ranks, seed)
