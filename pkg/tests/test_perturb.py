import numpy as np
import pytest

from laplab import lap, matkit, models, perturb
from laplab.errors import AtResonance, EndpointOnSpectrum, NotHermitian

from conftest import random_finite_pair, random_hermitian

SQ5 = np.sqrt(5.0)


def finite_direct_T(model, rigging, a, z):
    """Independent route: assemble H + F*AF and sandwich it directly."""
    h = perturb.finite_perturbed_hamiltonian(model, rigging, a)
    return models.sandwiched_resolvent(models.FiniteHermitian(h), rigging, z)


class TestDirection:
    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            perturb.Direction(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_identity_and_zero(self):
        assert perturb.Direction.identity(3).k == 3
        assert (perturb.Direction.zero(2).j == 0).all()

    def test_compose_collapses_couplings(self, embedded_model, swap_direction):
        model, rig = embedded_model
        op = perturb.CoupledOperator(model, rig, swap_direction, 2.0)
        other = perturb.Direction(np.diag([1.0, -1.0]))
        combined = op.compose(other, 0.5)
        assert combined.coupling == 1.0
        np.testing.assert_array_equal(
            combined.direction.j, 2.0 * swap_direction.j + 0.5 * other.j
        )


class TestPerturbedResolvent:
    def test_zero_direction_is_identity(self):
        t = np.array([[0.3 + 0.4j, 0.1], [0.1, -0.2 + 0.9j]])
        np.testing.assert_allclose(
            perturb.perturbed_resolvent(t, np.zeros((2, 2))), t, rtol=0, atol=1e-15
        )

    def test_scalar_arithmetic(self):
        # (i/2) / (1 + i) = 0.25 + 0.25i
        out = perturb.perturbed_resolvent(np.array([[0.5j]]), np.array([[2.0]]))
        np.testing.assert_allclose(out, [[0.25 + 0.25j]], rtol=0, atol=1e-15)

    def test_scalar_arithmetic_vs_truncated_lattice(self):
        # independent oracle: banded solve of H0 + 2 P0 on 80001 sites,
        # extrapolated over y >> level spacing (pi/N ~ 8e-5)
        from scipy.linalg import solve_banded

        n_sites = 40000

        def truncated_perturbed(pt):
            z = pt.z
            size = 2 * n_sites + 1
            band = np.zeros((3, size), dtype=complex)
            band[0, 1:] = 1.0
            band[1, :] = -z
            band[1, n_sites] += 2.0
            band[2, :-1] = 1.0
            rhs = np.zeros(size, dtype=complex)
            rhs[n_sites] = 1.0
            return np.array([[solve_banded((1, 1), band, rhs)[n_sites]]])

        grid = lap.YGrid(0.1, 0.5, 8)
        out = lap.extrapolate_limit(lap.evaluate_on_grid(truncated_perturbed, 0.0, grid), 1e-6)
        assert isinstance(out, lap.Converged)
        assert abs(complex(out.value[0, 0]) - (0.25 + 0.25j)) <= 1e-6

    def test_resonant_coupling_raises(self):
        with pytest.raises(AtResonance) as err:
            perturb.perturbed_resolvent(np.array([[-1.0 / SQ5]]), np.array([[SQ5]]))
        assert err.value.sigma_min <= 1e-12

    def test_identity_consistency_seeded(self):
        rng = np.random.default_rng(301)
        for _ in range(50):
            model, rig = random_finite_pair(rng)
            a = random_hermitian(rng, rig.k)
            z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2.0))
            t = models.sandwiched_resolvent(model, rig, z)
            via_identity = perturb.perturbed_resolvent(t, a)
            direct = finite_direct_T(model, rig, a, z)
            assert np.linalg.norm(via_identity - direct, 2) <= 1e-10

    def test_composition_law(self):
        rng = np.random.default_rng(303)
        for _ in range(50):
            model, rig = random_finite_pair(rng)
            a = random_hermitian(rng, rig.k)
            b = random_hermitian(rng, rig.k)
            z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2.0))
            t = models.sandwiched_resolvent(model, rig, z)
            stacked = perturb.perturbed_resolvent(perturb.perturbed_resolvent(t, a), b)
            merged = perturb.perturbed_resolvent(t, a + b)
            assert np.linalg.norm(stacked - merged, 2) <= 1e-10

    def test_left_right_identity(self):
        rng = np.random.default_rng(307)
        for _ in range(50):
            k = int(rng.integers(1, 5))
            t = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
            a = random_hermitian(rng, k)
            left = perturb.perturbed_resolvent(t, a)
            right = t @ np.linalg.inv(np.eye(k) + a @ t)
            assert np.linalg.norm(left - right, 2) <= 1e-10

    def test_herglotz_preserved(self):
        rng = np.random.default_rng(311)
        for _ in range(100):
            model, rig = random_finite_pair(rng)
            a = random_hermitian(rng, rig.k)
            z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2.0))
            t = perturb.perturbed_resolvent(models.sandwiched_resolvent(model, rig, z), a)
            norm = max(np.linalg.norm(t, 2), 1e-300)
            assert np.linalg.eigvalsh(matkit.im_part(t))[0] >= -1e-10 * norm


class TestCoupledT:
    def test_zero_coupling(self, embedded_model, swap_direction):
        model, rig = embedded_model
        op = perturb.CoupledOperator(model, rig, swap_direction, 0.0)
        z = 0.4 + 0.8j
        np.testing.assert_allclose(
            perturb.coupled_T(op, z),
            models.sandwiched_resolvent(model, rig, z),
            rtol=0,
            atol=1e-14,
        )

    def test_both_routes_by_hand(self):
        # H=[0], F=[1], J=[1], r=1, z=i: direct 1/(1-i), identity i/(1+i)
        model = models.FiniteHermitian(np.array([[0.0]]))
        rig = models.FiniteRigging(np.array([[1.0]]))
        op = perturb.CoupledOperator(model, rig, perturb.Direction(np.array([[1.0]])), 1.0)
        via_identity = perturb.coupled_T(op, 1j)
        np.testing.assert_allclose(via_identity, [[0.5 + 0.5j]], rtol=0, atol=1e-14)
        direct = finite_direct_T(model, rig, np.array([[1.0]]), 1j)
        np.testing.assert_allclose(direct, [[0.5 + 0.5j]], rtol=0, atol=1e-14)

    def test_boundary_through_exact_base(self, lattice_delta0):
        model, rig = lattice_delta0
        op = perturb.CoupledOperator(model, rig, perturb.Direction(np.array([[1.0]])), 1.0)
        t = perturb.coupled_T(op, models.HalfPlanePoint(3.0, 0.0))
        # (-1/sqrt5) / (1 - 1/sqrt5)
        expected = (-1 / SQ5) / (1 - 1 / SQ5)
        np.testing.assert_allclose(t, [[expected]], rtol=0, atol=1e-14)


class TestExistsAtCoupling:
    def test_zero_delta(self):
        cert = perturb.exists_at_coupling(np.array([[0.5j]]), np.zeros((1, 1)))
        assert cert and cert.exists and cert.null_vector is None

    def test_imaginary_part_blocks_cancellation(self):
        for t_val in (-7.0, -1.0, 0.5, 4.0):
            cert = perturb.exists_at_coupling(np.array([[0.5j]]), np.array([[t_val]]))
            assert cert.exists
            assert cert.sigma_min >= 1.0 - 1e-12  # |1 + it/2| >= 1

    def test_resonant_point_yields_null_vector(self):
        cert = perturb.exists_at_coupling(np.array([[-1.0 / SQ5]]), np.array([[SQ5]]))
        assert not cert.exists
        np.testing.assert_allclose(np.abs(cert.null_vector), [1.0], rtol=0, atol=1e-14)
        assert cert.residual <= 1e-14


class TestResonanceCouplings:
    def test_lattice_outside_band(self, lattice_delta0):
        model, rig = lattice_delta0
        t = models.boundary_exact(model, rig, 3.0)
        report = perturb.resonance_couplings(
            t, perturb.Direction(np.array([[1.0]])), window=(-5.0, 5.0), anchor=0.0
        )
        assert len(report.resonances) == 1
        res = report.resonances[0]
        assert res.multiplicity == 1
        assert abs(res.coupling - SQ5) <= 1e-8
        assert report.scan_agrees

    def test_strict_positivity_gives_empty(self, lattice_delta0):
        model, rig = lattice_delta0
        t = models.boundary_exact(model, rig, 0.0)  # i/2, positive imaginary part
        report = perturb.resonance_couplings(t, perturb.Direction(np.array([[1.0]])))
        assert report.resonances == ()
        assert report.scan_agrees

    def test_embedded_exact_anchor(self, swap_direction):
        t = np.array([[0.0, 1.0], [1.0, 2.0j]])
        report = perturb.resonance_couplings(t, swap_direction, window=(-5.0, 5.0), anchor=1.0)
        assert len(report.resonances) == 1
        res = report.resonances[0]
        assert res.multiplicity == 2
        assert abs(res.coupling) <= 1e-12
        assert report.scan_agrees

    def test_strict_positivity_exclusion_random_directions(self):
        # Im T positive definite forbids real spectrum of T J for every J
        rng = np.random.default_rng(401)
        rig2 = models.lattice_rigging({0: 1.0}, {1: 1.0})
        t2 = models.boundary_exact(models.FreeLattice1D(), rig2, 0.3)
        assert np.linalg.eigvalsh(matkit.im_part(t2))[0] > 1e-8 * np.linalg.norm(t2, 2)
        for _ in range(100):
            j = random_hermitian(rng, 2)
            report = perturb.resonance_couplings(t2, perturb.Direction(j), cross_check=False)
            assert report.resonances == ()

    def test_anchor_independence(self, embedded_model, swap_direction):
        model, rig = embedded_model
        sets = []
        for anchor in (1.0, -1.0, 2.0):
            verdict = perturb.regular_direction(
                model, rig, 0.0, swap_direction, anchors=(anchor,)
            )
            assert isinstance(verdict, perturb.Regular)
            sets.append([r.coupling for r in verdict.resonances.resonances])
        for found in sets:
            assert len(found) == 1 and abs(found[0]) <= 1e-8


class TestRegularDirection:
    def test_lattice_band_center(self, lattice_delta0):
        model, rig = lattice_delta0
        verdict = perturb.regular_direction(
            model, rig, 0.0, perturb.Direction(np.array([[1.0]]))
        )
        assert isinstance(verdict, perturb.Regular)
        assert verdict.witness_coupling == 0.0
        assert verdict.method == "exact"
        assert verdict.resonances.resonances == ()

    def test_embedded_needs_second_anchor(self, embedded_model, swap_direction):
        model, rig = embedded_model
        verdict = perturb.regular_direction(model, rig, 0.0, swap_direction)
        assert isinstance(verdict, perturb.Regular)
        assert verdict.witness_coupling == 1.0
        assert verdict.method == "extrapolated"
        np.testing.assert_allclose(
            verdict.limit, [[0.0, 1.0], [1.0, 2.0j]], rtol=0, atol=1e-6
        )
        res = verdict.resonances.resonances
        assert len(res) == 1 and res[0].multiplicity == 2 and abs(res[0].coupling) <= 1e-8

    def test_zero_direction_not_observed(self, embedded_model):
        model, rig = embedded_model
        verdict = perturb.regular_direction(model, rig, 0.0, perturb.Direction.zero(2))
        assert isinstance(verdict, perturb.NotObserved)
        assert len(verdict.attempts) == len(perturb.DEFAULT_ANCHORS)
        assert all(att.outcome == "diverged" for att in verdict.attempts)

    def test_attempt_diagnostics_carry_exponent(self, embedded_model, swap_direction):
        model, rig = embedded_model
        verdict = perturb.regular_direction(model, rig, 0.0, swap_direction)
        # anchor 0 failed first, with a pole-rate diagnostic
        assert isinstance(verdict, perturb.Regular)

    def test_not_observed_diagnostics(self, embedded_model):
        model, rig = embedded_model
        verdict = perturb.regular_direction(
            model, rig, 0.0, perturb.Direction.zero(2), anchors=(0.0, 1.0)
        )
        assert isinstance(verdict, perturb.NotObserved)
        for att in verdict.attempts:
            assert att.outcome == "diverged"
            assert 0.9 <= att.detail <= 1.1


class TestIsSemiRegular:
    def test_lattice(self, lattice_delta0):
        model, rig = lattice_delta0
        verdict = perturb.is_semi_regular(model, rig, 0.0)
        assert isinstance(verdict, perturb.Regular)

    def test_embedded_worked_instance(self, embedded_model):
        model, rig = embedded_model
        verdict = perturb.is_semi_regular(model, rig, 0.0)
        assert isinstance(verdict, perturb.Regular)
        assert verdict.witness_coupling == 1.0
        np.testing.assert_allclose(
            verdict.limit, np.diag([0.2 + 0.4j, 1.0]), rtol=0, atol=1e-6
        )

    def test_finite_point_shifted_away(self):
        # H=[0], F=[1], lam=0: anchor 0 diverges, anchor 1 gives T = 1
        model = models.FiniteHermitian(np.array([[0.0]]))
        rig = models.FiniteRigging(np.array([[1.0]]))
        verdict = perturb.is_semi_regular(model, rig, 0.0)
        assert isinstance(verdict, perturb.Regular)
        assert verdict.witness_coupling == 1.0
        np.testing.assert_allclose(verdict.limit, [[1.0]], rtol=0, atol=1e-10)


def brute_force_flow(h0, v, lam, r_from, r_to, steps=400):
    """Track sorted eigenvalue branches on a dense coupling grid and count
    signed crossings of lam (upward = +1)."""
    rs = np.linspace(r_from, r_to, steps + 1)
    branches = np.array([np.linalg.eigvalsh(h0 + r * v) for r in rs])
    signs = np.sign(branches - lam)
    total = 0
    for i in range(branches.shape[1]):
        s = signs[:, i]
        flips = np.diff(s) / 2.0
        total += int(round(flips.sum()))
    return total


class TestSpectralFlow:
    def test_single_upward_crossing(self):
        assert perturb.spectral_flow_finite(np.array([[0.0]]), np.array([[1.0]]), 0.5, 0.0, 1.0) == 1

    def test_zero_direction(self):
        h = np.diag([0.0, 2.0])
        assert perturb.spectral_flow_finite(h, np.zeros((2, 2)), 0.5, 0.0, 1.0) == 0

    def test_counting_function_difference(self):
        # diag(-1, 1) + r I through 0.5: one eigenvalue below at both ends
        h = np.diag([-1.0, 1.0])
        assert perturb.spectral_flow_finite(h, np.eye(2), 0.5, 0.0, 1.0) == 0

    def test_endpoint_on_spectrum(self):
        with pytest.raises(EndpointOnSpectrum):
            perturb.spectral_flow_finite(np.array([[0.5]]), np.array([[1.0]]), 0.5, 0.0, 1.0)

    def test_against_brute_force_tracking(self):
        rng = np.random.default_rng(601)
        done = 0
        while done < 100:
            n = int(rng.integers(2, 9))
            h0 = random_hermitian(rng, n)
            v = random_hermitian(rng, n)
            lam = float(rng.uniform(-1.5, 1.5))
            r_from, r_to = sorted(rng.uniform(-2.0, 2.0, size=2))
            if r_to - r_from < 0.1:
                continue
            endpoints = [np.linalg.eigvalsh(h0 + r * v) for r in (r_from, r_to)]
            if min(np.abs(w - lam).min() for w in endpoints) < 1e-4:
                continue
            flow = perturb.spectral_flow_finite(h0, v, lam, r_from, r_to)
            assert flow == brute_force_flow(h0, v, lam, r_from, r_to)
            done += 1
