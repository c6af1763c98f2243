"""Dense complex linear algebra on one deterministic kernel.

Everything spectral in this library (eigenvalues, singular values,
operator norms, functional calculus, polar factors) funnels through a
single cyclic Jacobi eigensolver for Hermitian matrices, so there is
exactly one convergence loop to trust.  The kernel is deterministic:
row-major sweep order over the upper triangle, stable descending
eigenvalue sort, and phase-normalized eigenvector columns, which makes
every downstream report reproducible byte for byte.

The kernel body is plain scalar code; when numba is importable it is
JIT-compiled (same function, same arithmetic), otherwise it runs as
interpreted Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergence, NotHermitian, ShapeMismatch

# Budget for the cyclic Jacobi loop; each sweep rotates every
# upper-triangle pair once.  Quadratic convergence makes ~10 sweeps
# typical at desk scale, so 100 is a generous ceiling.
SWEEP_BUDGET = 100

# Relative cutoff deciding which singular directions still carry a
# usable left factor a·v/σ.  Directions below it are completed by
# orthonormalization instead of divided out.
_LEFT_RECOVERY_CUTOFF = 1e-12


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy shared by all operations.

    Parameters
    ----------
    rank_tol : float
        Relative singular-value cutoff for rank decisions.
    iso_tol : float
        Acceptance tolerance for the partial-isometry residual
        ``w·w*·w - w`` and for projection/idempotency checks.
    eig_tol : float
        Relative off-diagonal mass at which the Jacobi loop stops.
    path_step_max : float
        Largest operator-norm step allowed between consecutive path
        samples.
    """

    rank_tol: float = 1e-9
    iso_tol: float = 1e-8
    eig_tol: float = 1e-12
    path_step_max: float = 0.1

    def __post_init__(self) -> None:
        for name in ("rank_tol", "iso_tol", "eig_tol", "path_step_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not self.rank_tol < 1.0:
            raise ValueError("rank_tol must be < 1")


DEFAULT_TOL = ToleranceConfig()


# ---------------------------------------------------------------------------
# matrix construction


def as_matrix(data) -> np.ndarray:
    """Coerce ``data`` to a 2-D complex128 C-ordered array."""
    a = np.ascontiguousarray(data, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.conj().T)


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    """Block-diagonal direct sum of the given matrices."""
    mats = [as_matrix(b) for b in blocks]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = zeros(rows, cols)
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def rank_one(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """The operator f×g : h ↦ (h, g)·f, as a matrix.

    With the convention (h, g) = g*·h this is the outer product
    f·g*, so (f×g)·g = ‖g‖²·f and in particular returns f when g is
    a unit vector.
    """
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    g = np.asarray(g, dtype=np.complex128).reshape(-1)
    return np.outer(f, g.conj())


def frobenius(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


# ---------------------------------------------------------------------------
# the Jacobi kernel


def _jacobi_body(a, v, accumulate, off_threshold, max_sweeps):
    # Cyclic complex Jacobi on the Hermitian matrix ``a`` (mutated in
    # place).  Rotations run in row-major order over the strict upper
    # triangle; ``v`` accumulates the right factors when ``accumulate``
    # is true.  Returns the number of sweeps used, or -1 on failure to
    # meet ``off_threshold`` (an absolute bound on sqrt of the
    # off-diagonal squared mass) within ``max_sweeps``.
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * (a[i, j].real ** 2 + a[i, j].imag ** 2)
        if math.sqrt(off) <= off_threshold:
            return sweep
        if sweep == max_sweeps:
            return -1
        for i in range(n - 1):
            for j in range(i + 1, n):
                apq = a[i, j]
                b = abs(apq)
                if b == 0.0:
                    continue
                ph = apq / b
                tau = (a[j, j].real - a[i, i].real) / (2.0 * b)
                if abs(tau) > 1e150:
                    # rotation angle ~ 1/(2 tau); avoids tau*tau overflow
                    t = -1.0 / (2.0 * tau)
                else:
                    sgn = 1.0 if tau >= 0.0 else -1.0
                    t = -sgn / (abs(tau) + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sph = s * ph
                sphc = s * ph.conjugate()
                for k in range(n):
                    aki = a[k, i]
                    akj = a[k, j]
                    a[k, i] = c * aki + sphc * akj
                    a[k, j] = -sph * aki + c * akj
                for k in range(n):
                    aik = a[i, k]
                    ajk = a[j, k]
                    a[i, k] = c * aik + sph * ajk
                    a[j, k] = -sphc * aik + c * ajk
                a[i, j] = 0.0
                a[j, i] = 0.0
                a[i, i] = complex(a[i, i].real, 0.0)
                a[j, j] = complex(a[j, j].real, 0.0)
                if accumulate:
                    for k in range(n):
                        vki = v[k, i]
                        vkj = v[k, j]
                        v[k, i] = c * vki + sphc * vkj
                        v[k, j] = -sph * vki + c * vkj
    return -1


try:  # pragma: no cover - exercised implicitly by every spectral call
    import numba

    _jacobi_kernel = numba.njit(cache=True, nogil=True)(_jacobi_body)
except Exception:  # pragma: no cover
    _jacobi_kernel = _jacobi_body


def _phase_normalize_columns(v: np.ndarray) -> None:
    # Fix the free phase of each column: the largest-modulus entry
    # (lowest index on ties) is rotated to the positive real axis.
    # Keeps eigenbases and everything derived from them deterministic.
    for k in range(v.shape[1]):
        col = v[:, k]
        mags = np.abs(col)
        idx = int(np.argmax(mags))
        if mags[idx] > 0.0:
            v[:, k] = col * (mags[idx] / col[idx])


def _require_hermitian(h: np.ndarray, cfg: ToleranceConfig) -> None:
    dev = frobenius(h - h.conj().T)
    scale = max(frobenius(h), 1.0)
    if dev > cfg.iso_tol * scale:
        raise NotHermitian(
            f"matrix deviates from Hermitian by {dev:.3e} (Frobenius)"
        )


def hermitian_eig(
    h: np.ndarray,
    cfg: ToleranceConfig = DEFAULT_TOL,
    sweep_budget: int = SWEEP_BUDGET,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a Hermitian matrix.

    Parameters
    ----------
    h : ndarray
        Square matrix, Hermitian within ``cfg.iso_tol`` (Frobenius,
        relative).  The Hermitian part (h + h*)/2 is what gets
        diagonalized, so eps-level asymmetry cannot leak in.
    cfg : ToleranceConfig
        ``cfg.eig_tol`` sets the relative off-diagonal mass at which
        the sweep loop stops.
    sweep_budget : int
        Maximum number of full sweeps.

    Returns
    -------
    (eigenvalues, basis)
        Real eigenvalues in descending order (stable ties) and a
        unitary matrix with matching, phase-normalized columns:
        h = basis·diag(eigenvalues)·basis*.

    Raises
    ------
    NotHermitian
        If the input fails the Hermitian precondition.
    NoConvergence
        If the off-diagonal mass does not fall below threshold within
        the sweep budget.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeMismatch(f"expected square matrix, got {h.shape}")
    _require_hermitian(h, cfg)
    a = np.ascontiguousarray((h + h.conj().T) / 2.0)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = cfg.eig_tol * frobenius(a)
    sweeps = _jacobi_kernel(a, v, True, threshold, sweep_budget)
    if sweeps < 0:
        raise NoConvergence(
            f"Jacobi loop did not converge in {sweep_budget} sweeps (n={n})"
        )
    vals = np.real(np.diag(a)).copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    v = np.ascontiguousarray(v[:, order])
    _phase_normalize_columns(v)
    return vals, v


def hermitian_eigvals(
    h: np.ndarray,
    cfg: ToleranceConfig = DEFAULT_TOL,
    sweep_budget: int = SWEEP_BUDGET,
) -> np.ndarray:
    """Descending eigenvalues only; skips eigenvector accumulation."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeMismatch(f"expected square matrix, got {h.shape}")
    _require_hermitian(h, cfg)
    a = np.ascontiguousarray((h + h.conj().T) / 2.0)
    dummy = np.eye(1, dtype=np.complex128)
    threshold = cfg.eig_tol * frobenius(a)
    sweeps = _jacobi_kernel(a, dummy, False, threshold, sweep_budget)
    if sweeps < 0:
        raise NoConvergence(
            f"Jacobi loop did not converge in {sweep_budget} sweeps"
        )
    vals = np.real(np.diag(a)).copy()
    return vals[np.argsort(-vals, kind="stable")]


# ---------------------------------------------------------------------------
# SVD and friends


def _vec_norm(x: np.ndarray) -> float:
    return math.sqrt(float(np.real(x.conj() @ x)))


def _complete_orthonormal(u: np.ndarray, have: int) -> None:
    # Fill columns have.. of u with canonical-basis vectors made
    # orthonormal to the existing ones (modified Gram-Schmidt, two
    # passes).  Deterministic and phase-free.
    m, total = u.shape
    k = have
    for e in range(m):
        if k == total:
            return
        cand = np.zeros(m, dtype=np.complex128)
        cand[e] = 1.0
        for _ in range(2):
            for j in range(k):
                cand -= (u[:, j].conj() @ cand) * u[:, j]
        nrm = _vec_norm(cand)
        if nrm > 0.5:
            u[:, k] = cand / nrm
            k += 1
    if k < total:  # pragma: no cover - cannot happen for m >= total
        raise NoConvergence("orthonormal completion exhausted basis vectors")


def svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full singular value decomposition a = left·diag(σ)·right*.

    Computed from the Jacobi eigendecomposition of a*·a on the smaller
    side.  Each singular value is taken as the achieved image norm
    ‖a·v_i‖ of the corresponding right vector (eps-accurate, unlike the
    square root of the squared spectrum, which carries sqrt(eps) noise
    near zero); that is also what keeps the reconstruction residual at
    rounding level.  Directions whose image is negligible get their
    left factor from deterministic orthonormal completion instead of a
    division by ~0.

    Returns
    -------
    (left, singulars, right)
        ``left`` is rows×rows unitary, ``right`` is cols×cols unitary,
        ``singulars`` has length min(rows, cols), descending.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        left, sing, right = svd(adjoint(a))
        return right, sing, left
    t = adjoint(a) @ a
    _, v = hermitian_eig(t)
    images = a @ v
    sigma = np.array([_vec_norm(images[:, i]) for i in range(n)])
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    v = np.ascontiguousarray(v[:, order])
    images = np.ascontiguousarray(images[:, order])
    cutoff = _LEFT_RECOVERY_CUTOFF * (float(sigma[0]) if n else 0.0)
    u = zeros(m, m)
    have = 0
    for i in range(n):
        if sigma[i] <= cutoff or sigma[i] == 0.0:
            break
        col = images[:, i] / sigma[i]
        # one re-orthogonalization pass against earlier columns
        for j in range(have):
            col -= (u[:, j].conj() @ col) * u[:, j]
        nrm = _vec_norm(col)
        if nrm <= 0.5:
            break
        u[:, have] = col / nrm
        have += 1
    _complete_orthonormal(u, have)
    return u, sigma, v


def singular_values(a: np.ndarray) -> np.ndarray:
    """Descending singular values via the smaller normal matrix."""
    a = as_matrix(a)
    m, n = a.shape
    t = adjoint(a) @ a if n <= m else a @ adjoint(a)
    lam = hermitian_eigvals(t)
    return np.sqrt(np.clip(lam, 0.0, None))


def op_norm(a: np.ndarray) -> float:
    """Operator (spectral) norm: the largest singular value."""
    a = as_matrix(a)
    if a.size == 0 or not np.any(a):
        return 0.0
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def fun_calc(h: np.ndarray, f: Callable[[float], float]) -> np.ndarray:
    """Functional calculus f(h) for Hermitian h.

    ``f`` is applied to each eigenvalue; the result is assembled in the
    eigenbasis, so f(h) = basis·diag(f(λ))·basis*.
    """
    vals, basis = hermitian_eig(h)
    fv = np.array([f(float(x)) for x in vals], dtype=np.complex128)
    return (basis * fv) @ basis.conj().T


def weyl_matched_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest index-matched singular-value difference of two matrices."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(singular_values(a) - singular_values(b))))
