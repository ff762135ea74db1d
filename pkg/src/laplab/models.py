"""Concrete operator models with closed-form sandwiched resolvents.

A model is a self-adjoint operator H given through its resolvent; a rigging
is a finite-rank map F onto a k-dimensional channel space.  Together they
produce the k-by-k matrix

    T_z = F (H - z)^-1 F*,

a Herglotz function of z in the upper half-plane.  Three models are
supported:

* ``FiniteHermitian`` -- an explicit n-by-n Hermitian matrix;
* ``FreeLattice1D`` -- the hopping operator (H u)_n = u_{n+1} + u_{n-1} on
  l2(Z), whose resolvent kernel is known in closed form;
* ``DirectSum`` -- block sum of two rigged models, used to plant point
  spectrum inside the lattice band.

Evaluation at real z is exact where the closed form extends to the axis;
:func:`boundary_exact` returns ``None`` ("absent") where it does not, which
tells the caller to fall back on the numeric limit machinery in
:mod:`laplab.lap`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import solve_banded

from . import matkit
from .config import DEFAULT_TOLERANCES, DEFAULT_TRUNCATION_SITES, Tolerances
from .errors import BoundaryOutsideAC

_BAND_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class HalfPlanePoint:
    """Spectral parameter z = lam + i y with y >= 0; y = 0 marks the boundary."""

    lam: float
    y: float

    def __post_init__(self):
        if not np.isfinite(self.lam) or not np.isfinite(self.y):
            raise ValueError("non-finite half-plane point")
        if self.y < 0:
            raise ValueError("y must be >= 0; lower half-plane values follow by conjugation")

    @property
    def z(self) -> complex:
        return complex(self.lam, self.y)

    @property
    def boundary(self) -> bool:
        return self.y == 0.0


def _as_z(z) -> complex:
    if isinstance(z, HalfPlanePoint):
        return z.z
    return complex(z)


def free_lattice_kernel(z, n: int, m: int) -> complex:
    """Resolvent kernel <delta_n, (H - z)^-1 delta_m> of the free 1-d lattice.

    For z off the real axis,

        R_z(n, m) = zeta^|n-m| / (zeta - 1/zeta),

    with zeta the root of zeta^2 - z zeta + 1 = 0 of modulus < 1.  On the
    axis inside the band (|lam| < 2) the continuation from above is used,
    zeta = (lam - i sqrt(4 - lam^2)) / 2, which keeps Im R >= 0; outside
    the band (|lam| > 2) both one-sided limits agree and the real root of
    modulus < 1 applies.  Band edges |lam| = 2 have no boundary value.
    """
    zc = _as_z(z)
    d = abs(int(n) - int(m))
    if zc.imag == 0.0:
        lam = zc.real
        if abs(abs(lam) - 2.0) <= _BAND_EDGE_TOL:
            raise BoundaryOutsideAC(f"band edge lam={lam!r}: boundary value diverges")
        if abs(lam) < 2.0:
            s = np.sqrt(4.0 - lam * lam)
            zeta = complex(lam, -s) / 2.0
            return zeta**d / complex(0.0, -s)
        w = np.sign(lam) * np.sqrt(lam * lam - 4.0)
        zeta = (lam - w) / 2.0
        return complex(zeta**d / (-w))
    w = np.sqrt(zc * zc - 4.0)
    if abs(zc + w) < abs(zc - w):
        w = -w
    zeta = 2.0 / (zc + w)  # stable form of (z - w) / 2
    return zeta**d / (-w)


def _normalize_channel(channel) -> tuple[tuple[int, complex], ...]:
    if isinstance(channel, dict):
        items = channel.items()
    else:
        items = channel
    acc: dict[int, complex] = {}
    for site, amp in items:
        acc[int(site)] = acc.get(int(site), 0.0) + complex(amp)
    cleaned = tuple(sorted((s, a) for s, a in acc.items() if a != 0))
    if not cleaned:
        raise ValueError("each lattice channel needs a nonzero amplitude")
    return cleaned


@dataclass(frozen=True, eq=False)
class LatticeRigging:
    """Channels given as finitely supported sequences over Z."""

    channels: tuple[tuple[tuple[int, complex], ...], ...]

    def __post_init__(self):
        if not self.channels:
            raise ValueError("rigging needs at least one channel")
        object.__setattr__(
            self, "channels", tuple(_normalize_channel(ch) for ch in self.channels)
        )

    @property
    def k(self) -> int:
        return len(self.channels)


def lattice_rigging(*channels) -> LatticeRigging:
    """Build a lattice rigging from dicts or (site, amplitude) iterables."""
    return LatticeRigging(tuple(channels))


def delta_rigging(site: int = 0, amplitude: complex = 1.0) -> LatticeRigging:
    """Single channel supported on one site."""
    return lattice_rigging({site: amplitude})


@dataclass(frozen=True, eq=False)
class FiniteRigging:
    """Channels given as the rows of a k-by-n matrix F."""

    matrix: np.ndarray

    def __post_init__(self):
        a = matkit.as_matrix(self.matrix)
        if not (np.abs(a) > 0).any(axis=1).all():
            raise ValueError("each channel (row of F) must be nonzero")
        object.__setattr__(self, "matrix", a)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SplitRigging:
    """Rigging of a direct sum; channels of ``left`` come first."""

    left: "Rigging"
    right: "Rigging"

    @property
    def k(self) -> int:
        return channel_count(self.left) + channel_count(self.right)


Rigging = Union[LatticeRigging, FiniteRigging, SplitRigging]


@dataclass(frozen=True, eq=False)
class FiniteHermitian:
    """H is an explicit Hermitian matrix."""

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", matkit.require_hermitian(self.h))

    @property
    def n(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class FreeLattice1D:
    """(H u)_n = u_{n+1} + u_{n-1} on l2(Z); essential spectrum [-2, 2]."""


@dataclass(frozen=True, eq=False)
class DirectSum:
    left: "OperatorModel"
    right: "OperatorModel"


OperatorModel = Union[FiniteHermitian, FreeLattice1D, DirectSum]


def channel_count(rigging: Rigging) -> int:
    if isinstance(rigging, (LatticeRigging, FiniteRigging)):
        return rigging.k
    if isinstance(rigging, SplitRigging):
        return rigging.k
    raise TypeError(f"not a rigging: {type(rigging).__name__}")


def make_direct_sum(left, right) -> tuple[DirectSum, SplitRigging]:
    """Combine two (model, rigging) pairs into a block-diagonal model.

    Sandwiched resolvents of the result are block diagonal, with the left
    block first.
    """
    lm, lr = left
    rm, rr = right
    if channel_count(lr) < 1 or channel_count(rr) < 1:
        raise ValueError("each summand needs at least one channel")
    return DirectSum(lm, rm), SplitRigging(lr, rr)


def essential_spectrum(model: OperatorModel) -> tuple[tuple[float, float], ...]:
    """Known essential-spectrum intervals; advisory metadata only."""
    if isinstance(model, FreeLattice1D):
        return ((-2.0, 2.0),)
    if isinstance(model, FiniteHermitian):
        return ()
    if isinstance(model, DirectSum):
        intervals = sorted(essential_spectrum(model.left) + essential_spectrum(model.right))
        merged: list[list[float]] = []
        for lo, hi in intervals:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return tuple((lo, hi) for lo, hi in merged)
    raise TypeError(f"not a model: {type(model).__name__}")


def _pair_check(model, rigging) -> None:
    ok = (
        (isinstance(model, FiniteHermitian) and isinstance(rigging, FiniteRigging))
        or (isinstance(model, FreeLattice1D) and isinstance(rigging, LatticeRigging))
        or (isinstance(model, DirectSum) and isinstance(rigging, SplitRigging))
    )
    if not ok:
        raise TypeError(
            f"rigging {type(rigging).__name__} does not match model {type(model).__name__}"
        )
    if isinstance(model, FiniteHermitian) and rigging.matrix.shape[1] != model.n:
        raise ValueError(
            f"rigging acts on C^{rigging.matrix.shape[1]} but the model lives on C^{model.n}"
        )


def sandwiched_resolvent(
    model: OperatorModel,
    rigging: Rigging,
    z,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Evaluate T_z = F (H - z)^-1 F* as a k-by-k array.

    ``z`` may be a :class:`HalfPlanePoint` or any non-real complex number
    (values below the axis are the conjugate mirror and enable symmetry
    checks).  At real z the exact boundary formulas are used and their
    errors propagate: ``SingularMatrix`` when z hits finite spectrum,
    ``BoundaryOutsideAC`` at lattice band edges.
    """
    _pair_check(model, rigging)
    zc = _as_z(z)
    if isinstance(model, FiniteHermitian):
        f = rigging.matrix
        shifted = model.h - zc * np.eye(model.n)
        x = matkit.solve_linear(shifted, f.conj().T, tols=tols)
        return f @ x
    if isinstance(model, FreeLattice1D):
        chans = rigging.channels
        k = len(chans)
        t = np.zeros((k, k), dtype=complex)
        for p in range(k):
            for q in range(k):
                acc = 0.0 + 0.0j
                for n, a in chans[p]:
                    for m, b in chans[q]:
                        acc += np.conj(a) * b * free_lattice_kernel(zc, n, m)
                t[p, q] = acc
        return t
    tl = sandwiched_resolvent(model.left, rigging.left, zc, tols=tols)
    tr = sandwiched_resolvent(model.right, rigging.right, zc, tols=tols)
    k = tl.shape[0] + tr.shape[0]
    out = np.zeros((k, k), dtype=complex)
    out[: tl.shape[0], : tl.shape[0]] = tl
    out[tl.shape[0] :, tl.shape[0] :] = tr
    return out


def boundary_exact(
    model: OperatorModel,
    rigging: Rigging,
    lam: float,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray | None:
    """Exact boundary value T_{lam + i0} where analytically available.

    Returns ``None`` ("absent") when no closed form applies -- lattice band
    edges, finite models with lam on the spectrum, direct sums with either
    summand absent.  Absent is a value, not an error: it instructs callers
    to extrapolate numerically instead.
    """
    _pair_check(model, rigging)
    lam = float(lam)
    if isinstance(model, FreeLattice1D):
        if abs(abs(lam) - 2.0) <= _BAND_EDGE_TOL:
            return None
        return sandwiched_resolvent(model, rigging, complex(lam, 0.0), tols=tols)
    if isinstance(model, FiniteHermitian):
        w = np.linalg.eigvalsh(model.h)
        scale = max(1.0, float(np.abs(w).max()) if w.size else 0.0)
        if w.size and np.abs(w - lam).min() <= 1e-10 * scale:
            return None
        return sandwiched_resolvent(model, rigging, complex(lam, 0.0), tols=tols)
    left = boundary_exact(model.left, rigging.left, lam, tols=tols)
    if left is None:
        return None
    right = boundary_exact(model.right, rigging.right, lam, tols=tols)
    if right is None:
        return None
    k = left.shape[0] + right.shape[0]
    out = np.zeros((k, k), dtype=complex)
    out[: left.shape[0], : left.shape[0]] = left
    out[left.shape[0] :, left.shape[0] :] = right
    return out


def truncated_lattice_T(
    rigging: LatticeRigging,
    z,
    n_sites: int = DEFAULT_TRUNCATION_SITES,
) -> np.ndarray:
    """Brute-force oracle: T_z of the lattice truncated to sites [-N, N].

    Solves the tridiagonal system directly (banded LU), independent of the
    closed-form kernel.  The truncation error decays like |zeta|^N, so
    y >= 0.1 already gives far better than 1e-8 agreement at N = 2000.
    """
    zc = _as_z(z)
    if zc.imag == 0.0:
        raise ValueError("truncation oracle needs Im z != 0")
    size = 2 * n_sites + 1
    reach = max(abs(s) for ch in rigging.channels for s, _ in ch)
    if reach >= n_sites:
        raise ValueError("channel support too wide for the truncation window")
    band = np.zeros((3, size), dtype=complex)
    band[0, 1:] = 1.0
    band[1, :] = -zc
    band[2, :-1] = 1.0
    k = rigging.k
    rhs = np.zeros((size, k), dtype=complex)
    for q, ch in enumerate(rigging.channels):
        for site, amp in ch:
            rhs[n_sites + site, q] = amp
    x = solve_banded((1, 1), band, rhs)
    return rhs.conj().T @ x


def truncate_lattice(
    rigging: LatticeRigging,
    n_sites: int,
) -> tuple[FiniteHermitian, FiniteRigging]:
    """Explicit finite model of the truncated lattice (small N only).

    The returned pair reproduces the lattice T_z through the generic
    finite-model code path, which makes it a fully independent cross-check
    of the kernel formula.
    """
    size = 2 * n_sites + 1
    h = np.zeros((size, size), dtype=complex)
    idx = np.arange(size - 1)
    h[idx, idx + 1] = 1.0
    h[idx + 1, idx] = 1.0
    f = np.zeros((rigging.k, size), dtype=complex)
    for p, ch in enumerate(rigging.channels):
        for site, amp in ch:
            if abs(site) >= n_sites:
                raise ValueError("channel support too wide for the truncation window")
            f[p, n_sites + site] = np.conj(amp)
    return FiniteHermitian(h), FiniteRigging(f)
