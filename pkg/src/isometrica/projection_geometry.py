"""Geometry of a pair of orthogonal projections.

Any two projections p, q on a finite-dimensional space decompose it
into four corner subspaces — where (p, q) act as (0,0), (0,1), (1,0),
(1,1) — plus a stack of two-dimensional planes on which the pair is in
*generic position*: in an adapted orthonormal basis each plane carries

    p = [[1, 0], [0, 0]],   q = [[cos²θ, cosθ·sinθ], [cosθ·sinθ, sin²θ]]

for a principal angle θ ∈ (0, π/2).  Everything metric about the pair
reads off this normal form: ‖p − q‖ is 1 when either mixed corner is
present and max sin θ otherwise; the closest partial isometry moving q
onto a "capped" copy of itself has norm distance 2·sin(Δθ/2); and the
unitary path connecting p to q comes from polar-correcting the segment
toward z = q·p + (1−q)·(1−p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    IllConditioned,
    NotProjection,
    PathInvariantViolated,
    ShapeMismatch,
    StepTooLarge,
    TooFar,
)
from .numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    adjoint,
    as_matrix,
    hermitian_eig,
    identity,
    op_norm,
    zeros,
)
from .operators import BlockOperator
from .polar import polar_pi

# Eigenvalues of a compression within this distance of 0 or 1 are
# classified into corner subspaces rather than spawning a generic
# plane with an unresolvable sliver of an angle.
_CLASSIFY_TOL = 1e-10


def _require_projection(p: np.ndarray, cfg: ToleranceConfig, name: str) -> np.ndarray:
    p = as_matrix(p)
    if p.shape[0] != p.shape[1]:
        raise NotProjection(f"{name} is not square: {p.shape}")
    herm = op_norm(p - adjoint(p))
    idem = op_norm(p @ p - p)
    if herm > cfg.iso_tol or idem > cfg.iso_tol:
        raise NotProjection(
            f"{name}: Hermitian residual {herm:.3e}, "
            f"idempotency residual {idem:.3e}"
        )
    return p


@dataclass(frozen=True)
class FivePartDecomposition:
    """Adapted basis and invariants of a projection pair.

    ``basis`` columns are ordered [H00 | H01 | H10 | H11 | planes],
    each generic plane contributing two consecutive columns; ``dims``
    is (d00, d01, d10, d11); ``angles`` lists the principal angles of
    the generic planes, descending.
    """

    basis: np.ndarray
    dims: tuple[int, int, int, int]
    angles: tuple[float, ...]

    @property
    def ambient(self) -> int:
        return int(self.basis.shape[0])

    def canonical_p(self) -> np.ndarray:
        d00, d01, d10, d11 = self.dims
        n = self.ambient
        out = zeros(n, n)
        k = d00 + d01
        for _ in range(d10 + d11):
            out[k, k] = 1.0
            k += 1
        for _ in self.angles:
            out[k, k] = 1.0
            k += 2
        return out

    def canonical_q(self) -> np.ndarray:
        d00, d01, d10, d11 = self.dims
        n = self.ambient
        out = zeros(n, n)
        k = d00
        for _ in range(d01):
            out[k, k] = 1.0
            k += 1
        k += d10
        for _ in range(d11):
            out[k, k] = 1.0
            k += 1
        for theta in self.angles:
            c, s = math.cos(theta), math.sin(theta)
            out[k, k] = c * c
            out[k, k + 1] = c * s
            out[k + 1, k] = c * s
            out[k + 1, k + 1] = s * s
            k += 2
        return out

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """Rebuild (p, q) from the adapted basis and normal form."""
        b = self.basis
        return (
            b @ self.canonical_p() @ adjoint(b),
            b @ self.canonical_q() @ adjoint(b),
        )


def _orthonormal_polish(cols: list[np.ndarray]) -> list[np.ndarray]:
    # One modified Gram-Schmidt pass; inputs are orthonormal to ~1e-12
    # already, this just pins the basis to machine-precision unitarity.
    out: list[np.ndarray] = []
    for c in cols:
        c = c.copy()
        for u in out:
            c -= (u.conj() @ c) * u
        nrm = math.sqrt(float(np.real(c.conj() @ c)))
        if nrm < 0.5:  # pragma: no cover - would mean the set was dependent
            raise IllConditioned("adapted basis degenerated during polish")
        out.append(c / nrm)
    return out


def _complete_basis(cols: list[np.ndarray], n: int) -> list[np.ndarray]:
    # Extend to an orthonormal basis of C^n using canonical vectors.
    extra: list[np.ndarray] = []
    for e in range(n):
        if len(cols) + len(extra) == n:
            break
        cand = np.zeros(n, dtype=np.complex128)
        cand[e] = 1.0
        for _ in range(2):
            for u in cols:
                cand -= (u.conj() @ cand) * u
            for u in extra:
                cand -= (u.conj() @ cand) * u
        nrm = math.sqrt(float(np.real(cand.conj() @ cand)))
        if nrm > 0.5:
            extra.append(cand / nrm)
    return extra


def five_part_decomposition(
    p: np.ndarray, q: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL
) -> FivePartDecomposition:
    """Adapted decomposition of the pair (p, q).

    The range of p is split by the compression of q into eigenvectors
    with eigenvalue ~1 (corner H11), ~0 (corner H10) and the generic
    rest, each generic eigenvector x acquiring a partner
    y = (q·x/‖q·x‖ − cosθ·x)/sinθ to span its plane.  What remains of
    the space is q-invariant and splits into H01/H00 by the same rule.
    Eigenvalues are re-measured as ‖q·x‖² on the actual q, so exact
    coincidences classify exactly; a middle eigenvalue in the leftover
    part means the inputs were not a projection pair at working
    precision and raises :class:`IllConditioned`.
    """
    p = _require_projection(p, cfg, "p")
    q = _require_projection(q, cfg, "q")
    if p.shape != q.shape:
        raise ShapeMismatch(f"projection shapes differ: {p.shape} vs {q.shape}")
    n = p.shape[0]
    vals_p, basis_p = hermitian_eig(p, cfg)
    rp = int(np.sum(vals_p > 0.5))

    h10: list[np.ndarray] = []
    h11: list[np.ndarray] = []
    planes: list[tuple[float, np.ndarray, np.ndarray]] = []
    if rp:
        prange = basis_p[:, :rp]
        compressed = adjoint(prange) @ q @ prange
        _, w = hermitian_eig(compressed, cfg)
        for i in range(rp):
            x = prange @ w[:, i]
            x = x / math.sqrt(float(np.real(x.conj() @ x)))
            qx = q @ x
            mu = float(np.real(qx.conj() @ qx))
            if mu >= 1.0 - _CLASSIFY_TOL:
                h11.append(x)
            elif mu <= _CLASSIFY_TOL:
                h10.append(x)
            else:
                c = math.sqrt(mu)
                s = math.sqrt(1.0 - mu)
                g = qx / c
                y = (g - c * x) / s
                planes.append((math.atan2(s, c), x, y))

    planes.sort(key=lambda item: -item[0])

    assembled = h10 + h11 + [v for (_, x, y) in planes for v in (x, y)]
    leftover = _complete_basis(assembled, n)
    h00: list[np.ndarray] = []
    h01: list[np.ndarray] = []
    if leftover:
        wbasis = np.stack(leftover, axis=1)
        compressed = adjoint(wbasis) @ q @ wbasis
        _, z = hermitian_eig(compressed, cfg)
        for i in range(len(leftover)):
            zz = wbasis @ z[:, i]
            zz = zz / math.sqrt(float(np.real(zz.conj() @ zz)))
            rho = float(np.real((q @ zz).conj() @ (q @ zz)))
            if rho >= 1.0 - _CLASSIFY_TOL:
                h01.append(zz)
            elif rho <= _CLASSIFY_TOL:
                h00.append(zz)
            else:
                raise IllConditioned(
                    f"leftover subspace carries q-eigenvalue {rho:.3e}, "
                    "neither 0 nor 1: inputs are not a projection pair "
                    "at working precision"
                )

    ordered = _orthonormal_polish(
        h00 + h01 + h10 + h11 + [v for (_, x, y) in planes for v in (x, y)]
    )
    basis = np.stack(ordered, axis=1) if ordered else identity(n)
    return FivePartDecomposition(
        basis=np.ascontiguousarray(basis),
        dims=(len(h00), len(h01), len(h10), len(h11)),
        angles=tuple(theta for (theta, _, _) in planes),
    )


def projection_distance(
    p: np.ndarray, q: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL
) -> float:
    """‖p − q‖ computed from the normal form, cross-checked directly.

    Equals 1 when a mixed corner (H01 or H10) is present, otherwise the
    largest sin θ over generic planes (0 when the pair coincides).  The
    decomposition value and the plain operator norm must agree to 1e-9
    or the call refuses.
    """
    dec = five_part_decomposition(p, q, cfg)
    _, d01, d10, _ = dec.dims
    if d01 > 0 or d10 > 0:
        geometric = 1.0
    elif dec.angles:
        geometric = max(math.sin(t) for t in dec.angles)
    else:
        geometric = 0.0
    direct = op_norm(as_matrix(p) - as_matrix(q))
    if abs(geometric - direct) > 1e-9:
        raise IllConditioned(
            f"distance routes disagree: normal form {geometric!r} "
            f"vs operator norm {direct!r}"
        )
    return geometric


def connecting_pi(
    p_from: np.ndarray, p_to: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Canonical partial isometry r with r*·r = p_from, r·r* = p_to.

    Defined as the polar part of p_to·p_from, which works exactly when
    the projections are at distance < 1 (no mixed corners); otherwise
    raises :class:`TooFar`.
    """
    p_from = _require_projection(p_from, cfg, "p_from")
    p_to = _require_projection(p_to, cfg, "p_to")
    if p_from.shape != p_to.shape:
        raise ShapeMismatch("projection shapes differ")
    dist = op_norm(p_from - p_to)
    if dist >= 1.0 - cfg.rank_tol:
        raise TooFar(f"‖p_from − p_to‖ = {dist:.6f} is not < 1")
    return polar_pi(BlockOperator((p_to @ p_from,)), cfg).u.blocks[0]


class CapResult(NamedTuple):
    q_capped: np.ndarray
    w: np.ndarray
    capped: bool
    bound: float


def cap_angles(
    p: np.ndarray,
    q: np.ndarray,
    phi_cap: float,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> CapResult:
    """Pull the large principal angles of (p, q) down to ``phi_cap``.

    Returns a projection q' whose angles to p are min(θ, phi_cap) and a
    partial isometry w with w*·w = q', w·w* = q moving q' back onto q.
    On each capped plane w is the rank-one map between the two range
    lines, so ‖w − q‖ = 2·sin((θ_max − phi_cap)/2); uncapped planes and
    corners are left pointwise fixed.  When no angle exceeds the cap
    the inputs are returned unchanged with ``capped=False``.
    """
    if not 0.0 < phi_cap < math.pi / 2:
        raise ValueError("phi_cap must lie in (0, π/2)")
    dec = five_part_decomposition(p, q, cfg)
    if not dec.angles or max(dec.angles) <= phi_cap:
        qm = as_matrix(q)
        return CapResult(qm, qm.copy(), False, 0.0)
    n = dec.ambient
    d00, d01, d10, d11 = dec.dims
    qcap_can = zeros(n, n)
    w_can = zeros(n, n)
    k = d00
    for _ in range(d01):
        qcap_can[k, k] = 1.0
        w_can[k, k] = 1.0
        k += 1
    k += d10
    for _ in range(d11):
        qcap_can[k, k] = 1.0
        w_can[k, k] = 1.0
        k += 1
    for theta in dec.angles:
        t_new = min(theta, phi_cap)
        c0, s0 = math.cos(theta), math.sin(theta)
        c1, s1 = math.cos(t_new), math.sin(t_new)
        qcap_can[k, k] = c1 * c1
        qcap_can[k, k + 1] = c1 * s1
        qcap_can[k + 1, k] = c1 * s1
        qcap_can[k + 1, k + 1] = s1 * s1
        # rank-one map g(theta') -> g(theta) between the range lines
        w_can[k, k] = c0 * c1
        w_can[k, k + 1] = c0 * s1
        w_can[k + 1, k] = s0 * c1
        w_can[k + 1, k + 1] = s0 * s1
        k += 2
    b = dec.basis
    q_capped = b @ qcap_can @ adjoint(b)
    w = b @ w_can @ adjoint(b)
    bound = 2.0 * math.sin((max(dec.angles) - phi_cap) / 2.0)
    return CapResult(q_capped, w, True, bound)


class TwoProjectionPath:
    """Norm-continuous path of projections from p to q (distance < 1).

    Built from the interpolation m_t = (1−t)·1 + t·z with
    z = q·p + (1−q)·(1−p); since ‖z − 1‖ ≤ ‖p − q‖ < 1 every m_t is
    invertible, its polar part w_t is unitary, and g(t) = w_t·p·w_t*
    sweeps from p (t=0) to q (t=1, where z intertwines p with q).
    Endpoints are returned exactly.
    """

    def __init__(self, p: np.ndarray, q: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL):
        self.p = _require_projection(p, cfg, "p")
        self.q = _require_projection(q, cfg, "q")
        if self.p.shape != self.q.shape:
            raise ShapeMismatch("projection shapes differ")
        self.cfg = cfg
        self.distance = op_norm(self.p - self.q)
        if self.distance >= 1.0 - cfg.rank_tol:
            raise TooFar(f"‖p − q‖ = {self.distance:.6f} is not < 1")
        n = self.p.shape[0]
        eye = identity(n)
        self.z = self.q @ self.p + (eye - self.q) @ (eye - self.p)
        self._eye = eye

    def unitary(self, t: float) -> np.ndarray:
        m_t = (1.0 - t) * self._eye + t * self.z
        data = polar_pi(BlockOperator((m_t,)), self.cfg)
        n = self.p.shape[0]
        if data.numerical_rank[0] != n:
            raise PathInvariantViolated(
                f"interpolant at t={t} lost rank {data.numerical_rank[0]} < {n}"
            )
        return data.u.blocks[0]

    def projection(self, t: float) -> np.ndarray:
        if t == 0.0:
            return self.p
        w = self.unitary(t)
        g = w @ self.p @ adjoint(w)
        if t == 1.0:
            drift = op_norm(g - self.q)
            if drift > self.cfg.iso_tol:
                raise PathInvariantViolated(
                    f"endpoint drift {drift:.3e} exceeds iso_tol"
                )
            return self.q
        return g


def projection_path(
    p: np.ndarray,
    q: np.ndarray,
    n_samples: int,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Uniformly sampled projection path from p to q.

    Every sample is verified to be a projection within iso_tol that
    stays at distance < 1 from q; consecutive samples must differ by at
    most ``cfg.path_step_max`` (raise ``n_samples`` and retry on
    :class:`StepTooLarge`).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    path = TwoProjectionPath(p, q, cfg)
    out = []
    for k in range(n_samples):
        t = k / (n_samples - 1)
        g = path.projection(1.0 if k == n_samples - 1 else t)
        herm = op_norm(g - adjoint(g))
        idem = op_norm(g @ g - g)
        if herm > cfg.iso_tol or idem > cfg.iso_tol:
            raise PathInvariantViolated(
                f"sample at t={t:.4f} is not a projection "
                f"(residuals {herm:.3e}, {idem:.3e})"
            )
        if op_norm(g - path.q) >= 1.0:
            raise PathInvariantViolated(
                f"sample at t={t:.4f} wandered to distance ≥ 1 from q"
            )
        out.append(g)
    worst = max(
        op_norm(b - a) for a, b in zip(out, out[1:])
    )
    if worst > cfg.path_step_max:
        raise StepTooLarge(
            f"largest step {worst:.4f} exceeds {cfg.path_step_max}; "
            "increase n_samples"
        )
    return out
