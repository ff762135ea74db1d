"""Dense complex small-matrix kernels.

Everything here is a pure function on plain ``numpy`` arrays; auxiliary
spaces in scope have k <= 64, so all paths are dense and double precision.
LAPACK (through numpy) does the heavy lifting; this module owns the
validation contracts, deterministic ordering, and error mapping.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConvergenceFailure, NotHermitian, NotPSD, SingularMatrix


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array with finite entries."""
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    return a


def as_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def operator_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(as_matrix(m), 2))


def is_hermitian(m, rtol: float = DEFAULT_TOLERANCES.hermitian_rtol) -> bool:
    a = as_square(m)
    scale = float(np.abs(a).max()) if a.size else 0.0
    diff = float(np.abs(a - a.conj().T).max())
    if scale == 0.0:
        return diff == 0.0
    return diff <= rtol * scale


def require_hermitian(m, rtol: float = DEFAULT_TOLERANCES.hermitian_rtol) -> np.ndarray:
    a = as_square(m)
    if not is_hermitian(a, rtol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return a


def solve_linear(m, b, *, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Solve M X = B for square M, rejecting numerically singular systems.

    Raises ``SingularMatrix`` when the smallest singular value of M is at
    or below ``solve_singular_rtol * ||M||``.
    """
    a = as_square(m)
    rhs = np.asarray(b, dtype=complex)
    if rhs.shape[0] != a.shape[0]:
        raise ValueError(f"shapes not conformable: {a.shape} vs {rhs.shape}")
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= tols.solve_singular_rtol * svals[0]:
        raise SingularMatrix(
            f"sigma_min={svals[-1]:.3e} <= {tols.solve_singular_rtol:g} * sigma_max={svals[0]:.3e}"
        )
    return np.linalg.solve(a, rhs)


def eig_general(m, *, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """All eigenvalues of a square matrix, sorted by (real, imag).

    The multiset includes algebraic multiplicity.  The ordering is
    deterministic for a fixed input.
    """
    a = as_square(m)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK cap
        raise ConvergenceFailure(str(exc)) from exc
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def eig_hermitian(m, *, tols: Tolerances = DEFAULT_TOLERANCES) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition M = U diag(w) U* of a Hermitian matrix.

    Returns (w ascending, U with orthonormal columns).
    """
    a = require_hermitian(m, tols.hermitian_rtol)
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    return w, u


def psd_sqrt(m, *, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues in ``[-psd_clamp_rtol * ||M||, 0)`` are clamped to zero;
    anything lower raises ``NotPSD``.
    """
    w, u = eig_hermitian(m, tols=tols)
    scale = float(np.abs(w).max()) if w.size else 0.0
    band = tols.psd_clamp_rtol * scale
    if w.size and w[0] < -band:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{band:.3e}")
    w = np.clip(w, 0.0, None)
    r = (u * np.sqrt(w)) @ u.conj().T
    return 0.5 * (r + r.conj().T)


def abs_hermitian(j, *, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """|J| = U diag(|w|) U* for Hermitian J."""
    w, u = eig_hermitian(j, tols=tols)
    a = (u * np.abs(w)) @ u.conj().T
    return 0.5 * (a + a.conj().T)


def im_part(t) -> np.ndarray:
    """Hermitian imaginary part (T - T*) / 2i.

    Exact identity by construction: im_part(T) + im_part(T*) == 0.
    Reconstruction re_part(T) + i * im_part(T) reproduces T up to a
    rounding at the matrix scale (bit-exactness is impossible alongside
    the Hermitian/anti-Hermitian split).
    """
    a = as_square(t)
    return (a - a.conj().T) * (-0.5j)


def re_part(t) -> np.ndarray:
    """Hermitian real part (T + T*) / 2."""
    a = as_square(t)
    return (a + a.conj().T) * 0.5


def smallest_singular(m) -> float:
    """sigma_min(M); zero iff M is singular up to numerics."""
    return float(np.linalg.svd(as_square(m), compute_uv=False)[-1])


def smallest_singular_triplet(m) -> tuple[float, np.ndarray, np.ndarray]:
    """(sigma_min, left vector u, right vector v) with M v = sigma_min u."""
    a = as_square(m)
    uu, ss, vh = np.linalg.svd(a)
    return float(ss[-1]), uu[:, -1], vh[-1].conj()


def min_eig_hermitian(m, *, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    w, _ = eig_hermitian(m, tols=tols)
    return float(w[0])
