"""Perturbation engine: resolvent identity, resonances, regular directions.

For a perturbation V = F* A F acting through the rigging, the second
resolvent identity collapses to k-by-k algebra:

    T_z(H + F* A F) = [1 + T_z(H) A]^-1 T_z(H).

Everything in this module is built on that identity.  A coupling r is a
*resonance* (relative to a convergent anchor r0) exactly when
1 + (r - r0) T J is singular, which happens at r = r0 - 1/mu for the real
nonzero eigenvalues mu of T J.  The eigenvalue route is exact; a smallest-
singular-value scan over the coupling window is kept as a cross-check.

Multiple eigenvalues of T J split like the square root of the data error
under rounding, so eigenvalues are grouped into clusters and the reality
test is applied to the cluster mean (= block trace / size, accurate to
first order).  Every candidate must additionally push sigma_min of the
criterion operator below ``sigma_dip`` before it is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import matkit
from .config import (
    DEFAULT_ANCHORS,
    DEFAULT_SCAN_STEP,
    DEFAULT_TOLERANCES,
    DEFAULT_WINDOW,
    Tolerances,
)
from .errors import AtResonance, EndpointOnSpectrum, GridEvaluationError
from .lap import (
    DEFAULT_GRID,
    BoundaryLimit,
    Converged,
    Diverged,
    Inconclusive,
    YGrid,
    evaluate_on_grid,
    extrapolate_limit,
)
from .models import (
    FiniteHermitian,
    FiniteRigging,
    OperatorModel,
    Rigging,
    boundary_exact,
    channel_count,
    sandwiched_resolvent,
)


@dataclass(frozen=True, eq=False)
class Direction:
    """A Hermitian k-by-k matrix J defining the perturbation V = F* J F."""

    j: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "j", matkit.require_hermitian(self.j))

    @property
    def k(self) -> int:
        return self.j.shape[0]

    @classmethod
    def identity(cls, k: int) -> "Direction":
        return cls(np.eye(k))

    @classmethod
    def zero(cls, k: int) -> "Direction":
        return cls(np.zeros((k, k)))


@dataclass(frozen=True, eq=False)
class CoupledOperator:
    """H_r = H0 + r F* J F over a base (model, rigging)."""

    model: OperatorModel
    rigging: Rigging
    direction: Direction
    coupling: float

    def __post_init__(self):
        if self.direction.k != channel_count(self.rigging):
            raise ValueError("direction size does not match the channel count")

    def compose(self, direction: Direction, coupling: float) -> "CoupledOperator":
        """Stack a second coupling through the same rigging.

        The result is a single direction r1 J1 + r2 J2 at unit coupling.
        """
        combined = self.coupling * self.direction.j + coupling * direction.j
        return CoupledOperator(self.model, self.rigging, Direction(combined), 1.0)


@dataclass(frozen=True)
class Resonance:
    coupling: float
    multiplicity: int


@dataclass(frozen=True)
class ResonanceReport:
    """Resonance couplings of a direction relative to a convergent anchor."""

    anchor: float
    resonances: tuple[Resonance, ...]
    window: tuple[float, float]
    imag_tolerance: float
    scan_dips: tuple[float, ...] | None = None
    scan_agrees: bool | None = None


@dataclass(frozen=True)
class AnchorAttempt:
    anchor: float
    outcome: str  # "diverged" | "inconclusive" | "at_resonance" | "error"
    detail: float | None


@dataclass(frozen=True, eq=False)
class Regular:
    """Evidence that the direction is regular: a converged anchor limit."""

    witness_coupling: float
    limit: np.ndarray
    error_estimate: float
    method: str
    resonances: ResonanceReport


@dataclass(frozen=True)
class NotObserved:
    """No anchor produced a convergent limit; not a proof of non-regularity."""

    attempts: tuple[AnchorAttempt, ...]


RegularityVerdict = Regular | NotObserved


@dataclass(frozen=True, eq=False)
class ExistenceCertificate:
    """Outcome of the boundary invertibility criterion at one coupling."""

    exists: bool
    sigma_min: float
    null_vector: np.ndarray | None = None
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.exists


def perturbed_resolvent(
    t: np.ndarray,
    a: np.ndarray,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Apply the resolvent identity: T -> [1 + T A]^-1 T.

    ``AtResonance`` is raised when 1 + T A is numerically singular; that is
    a mathematical statement about the coupling, not a numerical fault.
    """
    t = matkit.as_square(t)
    a = matkit.require_hermitian(a, tols.hermitian_rtol)
    if a.shape != t.shape:
        raise ValueError(f"shapes differ: T {t.shape} vs A {a.shape}")
    ta = t @ a
    m = np.eye(t.shape[0]) + ta
    sigma = matkit.smallest_singular(m)
    if sigma <= tols.invertibility_rtol * (1.0 + matkit.operator_norm(ta)):
        raise AtResonance(sigma)
    return np.linalg.solve(m, t)


def coupled_T(
    op: CoupledOperator,
    z,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """T_z(H_r) from the base resolvent through the identity."""
    base = sandwiched_resolvent(op.model, op.rigging, z, tols=tols)
    return perturbed_resolvent(base, op.coupling * op.direction.j, tols=tols)


def exists_at_coupling(
    t_limit: np.ndarray,
    delta_a: np.ndarray,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> ExistenceCertificate:
    """Does the boundary value survive the additional perturbation delta_a?

    True (with a sigma_min certificate) when 1 + T delta_a is invertible;
    false with a Fredholm null-vector certificate otherwise.
    """
    t_limit = matkit.as_square(t_limit)
    delta_a = matkit.require_hermitian(delta_a, tols.hermitian_rtol)
    m = t_limit @ delta_a
    op = np.eye(m.shape[0]) + m
    threshold = tols.criterion_rtol * (1.0 + matkit.operator_norm(m))
    sigma, _, v = matkit.smallest_singular_triplet(op)
    if sigma > threshold:
        return ExistenceCertificate(exists=True, sigma_min=sigma)
    residual = float(np.linalg.norm(op @ v))
    return ExistenceCertificate(exists=False, sigma_min=sigma, null_vector=v, residual=residual)


def _cluster_eigenvalues(
    mu: np.ndarray,
    radius_of: np.ndarray,
) -> list[tuple[complex, int]]:
    """Group eigenvalues into connected clusters; return (mean, size) pairs."""
    n = len(mu)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(mu[i] - mu[j]) <= max(radius_of[i], radius_of[j]):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        vals = mu[members]
        out.append((complex(vals.mean()), len(members)))
    return out


def _criterion_sigma(tj: np.ndarray, rho: float) -> float:
    return matkit.smallest_singular(np.eye(tj.shape[0]) + rho * tj)


def _scan_dips(
    tj: np.ndarray,
    anchor: float,
    window: tuple[float, float],
    step: float,
    dip: float,
) -> tuple[float, ...]:
    """Grid scan of sigma_min(1 + (r - anchor) T J), refined at local minima."""
    lo, hi = window
    count = int(np.floor((hi - lo) / step)) + 1
    rs = lo + step * np.arange(count)
    rhos = rs - anchor
    stack = np.eye(tj.shape[0])[None, :, :] + rhos[:, None, None] * tj[None, :, :]
    sigmas = np.linalg.svd(stack, compute_uv=False)[:, -1]
    # interior local minima plus both ends, worth refining when small
    candidates = [0, len(rs) - 1]
    interior = np.where((sigmas[1:-1] <= sigmas[:-2]) & (sigmas[1:-1] <= sigmas[2:]))[0] + 1
    candidates.extend(int(i) for i in interior)
    dips = []
    for i in sorted(set(candidates)):
        if sigmas[i] > 0.1:
            continue
        lo_r = rs[max(i - 1, 0)]
        hi_r = rs[min(i + 1, len(rs) - 1)]
        res = minimize_scalar(
            lambda r: _criterion_sigma(tj, r - anchor),
            bounds=(lo_r, hi_r),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < dip:
            dips.append(float(res.x))
    dips.sort()
    merged: list[float] = []
    for r in dips:
        if merged and abs(r - merged[-1]) <= 1e-9 * (1.0 + abs(r)):
            continue
        merged.append(r)
    return tuple(merged)


def resonance_couplings(
    t_limit: np.ndarray,
    direction: Direction,
    window: tuple[float, float] = DEFAULT_WINDOW,
    anchor: float = 0.0,
    *,
    limit_error: float = 0.0,
    cross_check: bool = True,
    scan_step: float = DEFAULT_SCAN_STEP,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> ResonanceReport:
    """Enumerate resonance couplings of ``direction`` relative to ``anchor``.

    ``t_limit`` is the converged boundary value at the anchor coupling and
    ``limit_error`` its error estimate (used to widen the eigenvalue
    clustering radius, since an entry error eps splits a multiple
    eigenvalue by about sqrt(eps)).  An empty report is a valid outcome.
    """
    t_limit = matkit.as_square(t_limit)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must be a nonempty interval")
    tj = t_limit @ direction.j
    mu = matkit.eig_general(tj, tols=tols)
    floor = 10.0 * np.sqrt(max(limit_error, 0.0))
    radius = np.maximum(tols.resonance_cluster_rtol * (1.0 + np.abs(mu)), floor)
    zero_tol = 1e-12 * (1.0 + matkit.operator_norm(tj))
    found: list[Resonance] = []
    for mean, size in _cluster_eigenvalues(mu, radius):
        if abs(mean) <= zero_tol:
            continue
        if abs(mean.imag) > tols.resonance_imag_rtol * (1.0 + abs(mean)):
            continue
        r = anchor - (1.0 / mean).real
        if not (lo <= r <= hi):
            continue
        if _criterion_sigma(tj, r - anchor) >= tols.sigma_dip:
            continue
        found.append(Resonance(coupling=float(r), multiplicity=size))
    found.sort(key=lambda res: res.coupling)

    dips = None
    agrees = None
    if cross_check:
        dips = _scan_dips(tj, anchor, (lo, hi), scan_step, tols.sigma_dip)
        match_tol = max(10.0 * scan_step * 1e-3, 1e-6)
        rep = [res.coupling for res in found]
        agrees = len(dips) == len(rep) and all(
            abs(a - b) <= match_tol * (1.0 + abs(b)) for a, b in zip(dips, rep)
        )
    return ResonanceReport(
        anchor=float(anchor),
        resonances=tuple(found),
        window=(lo, hi),
        imag_tolerance=tols.resonance_imag_rtol,
        scan_dips=dips,
        scan_agrees=agrees,
    )


def regular_direction(
    model: OperatorModel,
    rigging: Rigging,
    lam: float,
    direction: Direction,
    anchors: tuple[float, ...] = DEFAULT_ANCHORS,
    grid: YGrid = DEFAULT_GRID,
    tol: float | None = None,
    window: tuple[float, float] = DEFAULT_WINDOW,
    *,
    cross_check: bool = True,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> RegularityVerdict:
    """Decide whether V = F* J F is a regular direction at lam.

    Anchors are tried in order; the first coupling with a convergent
    boundary value T_{lam+i0}(H_r) wins and its resonance report is
    attached.  When the base model has an exact boundary value the limit
    at the anchor follows through the identity; otherwise the coupled
    resolvent is extrapolated numerically.  ``NotObserved`` collects one
    diagnostic per failed anchor and is evidence of absence, not absence
    of the limit.
    """
    if not anchors:
        raise ValueError("anchor list must be nonempty")
    if direction.k != channel_count(rigging):
        raise ValueError("direction size does not match the channel count")
    exact_base = boundary_exact(model, rigging, lam, tols=tols)
    attempts: list[AnchorAttempt] = []
    for r0 in anchors:
        if exact_base is not None:
            try:
                limit = perturbed_resolvent(exact_base, r0 * direction.j, tols=tols)
            except AtResonance as exc:
                attempts.append(AnchorAttempt(r0, "at_resonance", exc.sigma_min))
                continue
            outcome: BoundaryLimit = Converged(value=limit, error_estimate=0.0, method="exact")
        else:
            def coupled(pt, _r0=r0):
                base = sandwiched_resolvent(model, rigging, pt, tols=tols)
                return perturbed_resolvent(base, _r0 * direction.j, tols=tols)

            try:
                samples = evaluate_on_grid(coupled, lam, grid)
            except GridEvaluationError as exc:
                attempts.append(AnchorAttempt(r0, "error", float(exc.y)))
                continue
            outcome = extrapolate_limit(samples, tol, tols=tols)
        if isinstance(outcome, Converged):
            report = resonance_couplings(
                outcome.value,
                direction,
                window,
                anchor=r0,
                limit_error=outcome.error_estimate,
                cross_check=cross_check,
                tols=tols,
            )
            return Regular(
                witness_coupling=float(r0),
                limit=outcome.value,
                error_estimate=outcome.error_estimate,
                method=outcome.method,
                resonances=report,
            )
        if isinstance(outcome, Diverged):
            attempts.append(AnchorAttempt(r0, "diverged", outcome.blowup_exponent))
        elif isinstance(outcome, Inconclusive):
            attempts.append(AnchorAttempt(r0, "inconclusive", outcome.last_delta))
    return NotObserved(attempts=tuple(attempts))


def is_semi_regular(
    model: OperatorModel,
    rigging: Rigging,
    lam: float,
    anchors: tuple[float, ...] = DEFAULT_ANCHORS,
    grid: YGrid = DEFAULT_GRID,
    tol: float | None = None,
    window: tuple[float, float] = DEFAULT_WINDOW,
    *,
    cross_check: bool = True,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> RegularityVerdict:
    """Test the canonical direction F* F (J = identity).

    A single convergent anchor here certifies the point as semi-regular;
    regularity of any other direction implies this one works.
    """
    direction = Direction.identity(channel_count(rigging))
    return regular_direction(
        model, rigging, lam, direction, anchors, grid, tol, window,
        cross_check=cross_check, tols=tols,
    )


def finite_perturbed_hamiltonian(
    model: FiniteHermitian,
    rigging: FiniteRigging,
    a: np.ndarray,
) -> np.ndarray:
    """Assemble H + F* A F explicitly (the direct route of the dual check)."""
    a = matkit.require_hermitian(a)
    f = rigging.matrix
    h = model.h + f.conj().T @ a @ f
    return 0.5 * (h + h.conj().T)


def spectral_flow_finite(
    h0: np.ndarray,
    v: np.ndarray,
    lam: float,
    r_from: float,
    r_to: float,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> int:
    """Net eigenvalue flow of H0 + r V through lam as r goes r_from -> r_to.

    Returns N(H_from, lam) - N(H_to, lam) where N counts eigenvalues below
    lam, so an upward crossing contributes +1.  Endpoints must keep their
    spectrum away from lam.
    """
    h0 = matkit.require_hermitian(h0, tols.hermitian_rtol)
    v = matkit.require_hermitian(v, tols.hermitian_rtol)
    counts = []
    for r in (r_from, r_to):
        w = np.linalg.eigvalsh(h0 + r * v)
        scale = max(1.0, float(np.abs(w).max()))
        if np.abs(w - lam).min() <= 1e-10 * scale:
            raise EndpointOnSpectrum(f"eigenvalue at lam={lam!r} for coupling r={r!r}")
        counts.append(int((w < lam).sum()))
    return counts[0] - counts[1]
