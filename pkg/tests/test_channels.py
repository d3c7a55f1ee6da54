"""Tests for ideal/faulty Trotter channel construction.

Averaged noise channels are checked against Monte-Carlo oracles (sample means
of the corresponding unitary-jitter channels), and the second-order error
expansion against the exact supermatrix difference.
"""

import numpy as np
import pytest

from trotopt import linalg
from trotopt.channels import (
    AveragedTimingJitter,
    Decoherence,
    Depolarizing,
    TimingJitter,
    TrotterPlan,
    averaged_jitter_superop,
    averaged_step_error_expansion,
    complete_noise,
    depolarizing_superop,
    evolution_superop,
    faulty_trotter,
    ideal_map,
    jitter_deltas,
    rescale_time_energy,
    sampled_jitter_superop,
    sampled_trotter_unitary,
    single_step_error_expansion,
    trotter_ideal,
    trotter_step_unitary,
)
from trotopt.hamiltonians import ising_chain

SZ = np.diag([1.0 + 0.0j, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def qubit_plan(t=0.4, n=2, a=1.0):
    return TrotterPlan((SZ, SX), t=t, n=n, a=a)


def ising_plan(t=0.1, n=5, a=1.0):
    return TrotterPlan(ising_chain(2), t=t, n=n, a=a)


def j_dist(ta, tb):
    """Trace distance between the Choi states of two supermatrices."""
    return 0.5 * linalg.trace_norm(linalg.super_to_choi(ta) - linalg.super_to_choi(tb))


class TestTrotterPlan:
    def test_rejects_non_hermitian_term(self):
        with pytest.raises(ValueError, match="Hermitian"):
            TrotterPlan((np.array([[0.0, 1.0], [0.0, 0.0]]),), t=1.0, n=1)

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(ValueError, match="dimension"):
            TrotterPlan((SZ, np.eye(4)), t=1.0, n=1)

    def test_rejects_bad_scalars(self):
        with pytest.raises(ValueError, match="t must"):
            TrotterPlan((SZ,), t=-0.1, n=1)
        with pytest.raises(ValueError, match="n must"):
            TrotterPlan((SZ,), t=0.1, n=0)
        with pytest.raises(ValueError, match="a must"):
            TrotterPlan((SZ,), t=0.1, n=1, a=0.0)

    def test_terms_are_frozen_copies(self):
        h = SZ.copy()
        plan = TrotterPlan((h,), t=1.0, n=1)
        h[0, 0] = 99.0
        assert plan.terms[0][0, 0] == 1.0
        with pytest.raises(ValueError):
            plan.terms[0][0, 0] = 5.0

    def test_noise_parameter_ranges(self):
        with pytest.raises(ValueError):
            TimingJitter(sigma=-1.0)
        with pytest.raises(ValueError):
            AveragedTimingJitter(sigma=-0.5)
        with pytest.raises(ValueError):
            Depolarizing(p=1.5)
        with pytest.raises(ValueError):
            Decoherence(gamma=-0.1)


class TestEvolutionSuperop:
    def test_zero_time_is_identity(self):
        np.testing.assert_array_equal(evolution_superop(SZ, 0.0), np.eye(4))

    def test_sigma_z_phases_coherences(self):
        tau = 0.7
        t = evolution_superop(SZ, tau)
        rho = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
        out = linalg.unvec(t @ linalg.vec(rho))
        assert out[0, 0] == pytest.approx(0.6, abs=1e-12)
        assert out[1, 1] == pytest.approx(0.4, abs=1e-12)
        assert out[0, 1] == pytest.approx((0.2 - 0.1j) * np.exp(2j * tau), abs=1e-12)

    def test_one_parameter_group(self):
        h = SZ + 0.5 * SX
        lhs = evolution_superop(h, 0.3) @ evolution_superop(h, 0.9)
        np.testing.assert_allclose(lhs, evolution_superop(h, 1.2), atol=1e-10)


class TestCompleteNoise:
    def test_maps_pure_state_to_maximally_mixed(self):
        for d in (2, 3, 4):
            t = complete_noise(d)
            psi = np.zeros(d)
            psi[0] = 1.0
            rho = np.outer(psi, psi)
            np.testing.assert_allclose(
                linalg.unvec(t @ linalg.vec(rho)), np.eye(d) / d, atol=1e-12
            )

    def test_idempotent(self):
        t = complete_noise(3)
        np.testing.assert_allclose(t @ t, t, atol=1e-12)

    def test_qubit_supermatrix_pattern(self):
        t = complete_noise(2)
        expected = np.zeros((4, 4))
        expected[np.ix_([0, 3], [0, 3])] = 0.5
        np.testing.assert_allclose(t, expected, atol=1e-15)
        # within an occupied row the two entries are separated by d zeros
        assert np.all(t[0, 1:3] == 0.0)

    def test_rejects_small_dimension(self):
        with pytest.raises(ValueError, match=">= 2"):
            complete_noise(1)


class TestDepolarizing:
    def test_endpoints(self):
        np.testing.assert_array_equal(depolarizing_superop(0.0, 3), np.eye(9))
        np.testing.assert_allclose(depolarizing_superop(1.0, 3), complete_noise(3), atol=1e-15)

    def test_half_strength_on_ground_state(self):
        t = depolarizing_superop(0.5, 2)
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = linalg.unvec(t @ linalg.vec(rho))
        np.testing.assert_allclose(out, np.diag([0.75, 0.25]), atol=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            depolarizing_superop(-0.01, 2)


class TestAveragedJitter:
    def test_zero_width_is_identity(self):
        np.testing.assert_allclose(averaged_jitter_superop(SX, 0.0), np.eye(4), atol=1e-14)

    def test_sigma_z_dephasing_factor(self):
        t = averaged_jitter_superop(SZ, 1.0)
        rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        out = linalg.unvec(t @ linalg.vec(rho))
        assert out[0, 0] == pytest.approx(0.5, abs=1e-12)
        # energy gap 2, so coherences shrink by exp(-2)
        assert out[0, 1] == pytest.approx(0.5 * np.exp(-2.0), abs=1e-12)
        assert out[0, 1] == pytest.approx(0.5 * 0.135335, abs=1e-6)

    def test_against_monte_carlo_average(self):
        # oracle: sample mean of exp(iH delta) rho exp(-iH delta) over 1e5 draws
        h = SZ
        sigma = 1.0
        rng = np.random.default_rng(314)
        n_samples = 100_000
        deltas = rng.normal(0.0, sigma, n_samples)
        # H = sigma_z is diagonal, so each sample just phases the coherence
        phases = np.exp(2j * deltas)
        rho01 = 0.5
        mc_mean = rho01 * phases.mean()
        se = rho01 * phases.std(ddof=1) / np.sqrt(n_samples)
        t = averaged_jitter_superop(h, sigma)
        out = linalg.unvec(t @ linalg.vec(np.full((2, 2), 0.5, dtype=complex)))
        assert abs(out[0, 1] - mc_mean) <= 3.0 * max(se, 1e-12)

    def test_commutes_with_own_evolution(self):
        h = SZ + 0.3 * SX
        avg = averaged_jitter_superop(h, 0.4)
        evo = evolution_superop(h, 1.1)
        np.testing.assert_allclose(avg @ evo, evo @ avg, atol=1e-10)


class TestSampledJitter:
    def test_zero_width_is_identity(self):
        rng = np.random.default_rng(1)
        np.testing.assert_allclose(sampled_jitter_superop(SX, 0.0, rng), np.eye(4), atol=1e-12)

    def test_preserves_purity(self):
        rng = np.random.default_rng(2)
        t = sampled_jitter_superop(SZ + SX, 0.8, rng)
        for _ in range(5):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v /= np.linalg.norm(v)
            rho = np.outer(v, v.conj())
            out = linalg.unvec(t @ linalg.vec(rho))
            assert np.trace(out @ out).real == pytest.approx(1.0, abs=1e-10)

    def test_draw_statistics(self):
        sigma = 0.3
        plan = TrotterPlan((SZ, SX), t=1.0, n=50_000)
        draws = jitter_deltas(plan, sigma, np.random.default_rng(99)).ravel()
        assert draws.size == 100_000
        assert abs(draws.mean()) <= 4.0 * sigma / np.sqrt(draws.size)
        assert draws.var(ddof=1) == pytest.approx(sigma**2, rel=0.05)


class TestIdealAndTrotter:
    def test_zero_time_identity(self):
        plan = qubit_plan(t=0.0)
        np.testing.assert_allclose(ideal_map(plan), np.eye(4), atol=1e-14)

    def test_single_term_matches_evolution(self):
        plan = TrotterPlan((SZ,), t=0.9, n=3)
        np.testing.assert_allclose(ideal_map(plan), evolution_superop(SZ, 0.9), atol=1e-12)
        np.testing.assert_allclose(trotter_ideal(plan), evolution_superop(SZ, 0.9), atol=1e-10)

    def test_ideal_map_scale_invariant(self):
        plan = ising_plan()
        np.testing.assert_allclose(
            ideal_map(plan), ideal_map(rescale_time_energy(plan, 2.0)), atol=1e-12
        )

    def test_commuting_terms_split_exactly(self):
        h1 = np.kron(SZ, np.eye(2))
        h2 = np.kron(np.eye(2), SZ)
        for n in (1, 3, 7):
            plan = TrotterPlan((h1, h2), t=0.8, n=n)
            np.testing.assert_allclose(trotter_ideal(plan), ideal_map(plan), atol=1e-10)

    def test_single_step_single_term(self):
        plan = TrotterPlan((SX,), t=0.5, n=1)
        np.testing.assert_allclose(trotter_ideal(plan), evolution_superop(SX, 0.5), atol=1e-12)

    def test_step_unitary_order_is_list_order(self):
        plan = qubit_plan(t=0.6, n=2)
        expected = linalg.hermitian_exp(SX, 0.3) @ linalg.hermitian_exp(SZ, 0.3)
        np.testing.assert_allclose(trotter_step_unitary(plan), expected, atol=1e-12)


class TestFaultyTrotter:
    def test_noiseless_limits(self):
        plan = ising_plan()
        ref = trotter_ideal(plan)
        rng = np.random.default_rng(0)
        np.testing.assert_allclose(faulty_trotter(plan, TimingJitter(0.0), rng), ref, atol=1e-12)
        np.testing.assert_allclose(faulty_trotter(plan, AveragedTimingJitter(0.0)), ref, atol=1e-12)
        np.testing.assert_allclose(faulty_trotter(plan, Depolarizing(0.0)), ref, atol=1e-12)
        np.testing.assert_allclose(faulty_trotter(plan, Decoherence(0.0)), ref, atol=1e-12)

    def test_jitter_requires_rng(self):
        with pytest.raises(ValueError, match="rng"):
            faulty_trotter(qubit_plan(), TimingJitter(0.1))

    def test_jitter_bit_reproducible(self):
        plan = ising_plan()
        a = faulty_trotter(plan, TimingJitter(0.05), np.random.default_rng(1234))
        b = faulty_trotter(plan, TimingJitter(0.05), np.random.default_rng(1234))
        assert np.array_equal(a, b)

    def test_depol_full_strength_erases_everything(self):
        plan = ising_plan(n=3)
        np.testing.assert_allclose(
            faulty_trotter(plan, Depolarizing(1.0)), complete_noise(4), atol=1e-12
        )

    def test_averaged_matches_sample_mean(self):
        # oracle: entrywise mean of 1e4 sampled-jitter supermatrices
        plan = ising_plan(t=0.1, n=5)
        sigma = 0.05
        n_runs = 10_000
        acc = np.zeros((16, 16), dtype=complex)
        acc_sq = np.zeros((16, 16))
        for run in range(n_runs):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=2024, spawn_key=(run,)))
            t = linalg.unitary_superop(sampled_trotter_unitary(plan, sigma, rng))
            acc += t
            acc_sq += np.abs(t) ** 2
        mean = acc / n_runs
        var = np.maximum(acc_sq / n_runs - np.abs(mean) ** 2, 0.0)
        se = np.sqrt(var / n_runs)
        avg = faulty_trotter(plan, AveragedTimingJitter(sigma))
        assert np.all(np.abs(avg - mean) <= 4.0 * se + 1e-9)

    def test_decoherence_mixing_fraction(self):
        plan = qubit_plan(t=2.0, n=4)
        gamma = 0.3
        t = faulty_trotter(plan, Decoherence(gamma))
        ref = trotter_ideal(plan)
        p = 1.0 - np.exp(-gamma * plan.t)
        np.testing.assert_allclose(t, depolarizing_superop(p, 2) @ ref, atol=1e-12)

    @pytest.mark.parametrize(
        "noise",
        [
            TimingJitter(0.08, seed=5),
            AveragedTimingJitter(0.08),
            Depolarizing(0.02),
            Decoherence(0.1),
        ],
        ids=["jitter", "avg-jitter", "depol", "decoh"],
    )
    def test_channels_are_cptp(self, noise):
        plan = ising_plan(t=0.3, n=4)
        rng = np.random.default_rng(42)
        t = faulty_trotter(plan, noise, rng)
        j = linalg.super_to_choi(t)
        d = plan.dim
        np.testing.assert_allclose(j, j.conj().T, atol=1e-9)
        assert np.linalg.eigvalsh(j).min() >= -1e-9
        np.testing.assert_allclose(
            linalg.partial_trace(j, (d, d), 1), np.eye(d) / d, atol=1e-9
        )

    def test_averaging_improves_over_mean_run(self):
        # convexity: the averaged channel is never farther from ideal than the
        # average distance of its sampled constituents
        plan = qubit_plan(t=1.0, n=3)
        sigma = 0.1
        ideal = ideal_map(plan)
        dists = []
        for run in range(50):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=7, spawn_key=(run,)))
            dists.append(j_dist(faulty_trotter(plan, TimingJitter(sigma), rng), ideal))
        avg_dist = j_dist(faulty_trotter(plan, AveragedTimingJitter(sigma)), ideal)
        assert avg_dist <= np.mean(dists) + 1e-9

    def test_chaining_bound(self):
        plan = ising_plan(t=0.5, n=6)
        step_plan = TrotterPlan(plan.terms, t=plan.t / plan.n, n=1)
        for noise in (AveragedTimingJitter(0.05), Depolarizing(0.01)):
            full = j_dist(faulty_trotter(plan, noise), ideal_map(plan))
            step = j_dist(faulty_trotter(step_plan, noise), ideal_map(step_plan))
            assert full <= plan.n * step + 1e-9


class TestRescaling:
    def test_identity_rescale(self):
        plan = qubit_plan()
        assert rescale_time_energy(plan, 1.0) is plan
        rescaled = rescale_time_energy(plan, 2.5)
        assert rescaled.a == 2.5
        assert rescaled.t == plan.t and rescaled.n == plan.n
        for old, new in zip(plan.terms, rescaled.terms):
            np.testing.assert_array_equal(old, new)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rescale_time_energy(qubit_plan(), -2.0)

    def test_depol_invariant_under_rescaling(self):
        plan = ising_plan(n=4)
        noise = Depolarizing(0.05)
        np.testing.assert_allclose(
            faulty_trotter(plan, noise),
            faulty_trotter(rescale_time_energy(plan, 3.0), noise),
            atol=1e-12,
        )

    def test_jitter_couples_through_a_sigma(self):
        plan = qubit_plan(t=0.8, n=4)
        sigma = 0.05
        fast = faulty_trotter(rescale_time_energy(plan, 2.0), AveragedTimingJitter(sigma))
        slow = faulty_trotter(plan, AveragedTimingJitter(2.0 * sigma))
        np.testing.assert_allclose(fast, slow, atol=1e-12)
        u_fast = sampled_trotter_unitary(
            rescale_time_energy(plan, 2.0), sigma, np.random.default_rng(3)
        )
        u_slow = sampled_trotter_unitary(plan, 2.0 * sigma, np.random.default_rng(3))
        np.testing.assert_allclose(u_fast, u_slow, atol=1e-12)

    def test_decoherence_sees_wall_clock_time(self):
        plan = qubit_plan(t=2.0, n=2)
        gamma = 0.4
        sped_up = faulty_trotter(rescale_time_energy(plan, 4.0), Decoherence(gamma))
        equivalent_p = 1.0 - np.exp(-gamma * plan.t / 4.0)
        np.testing.assert_allclose(
            sped_up, depolarizing_superop(equivalent_p, 2) @ trotter_ideal(plan), atol=1e-12
        )


class TestErrorExpansion:
    def exact_step_difference(self, plan, deltas):
        total = sum(plan.terms[1:], start=plan.terms[0].copy())
        ideal = evolution_superop(total, plan.tau)
        u = np.eye(plan.dim, dtype=complex)
        for j, h in enumerate(plan.terms):
            u = linalg.hermitian_exp(h, plan.tau + deltas[j]) @ u
        return ideal - linalg.unitary_superop(u)

    def test_commuting_zero_offsets_vanish(self):
        h1 = np.kron(SZ, np.eye(2))
        h2 = np.kron(np.eye(2), SZ)
        plan = TrotterPlan((h1, h2), t=0.4, n=2)
        out = single_step_error_expansion(plan, np.zeros(2))
        assert np.abs(out).max() <= 1e-14

    def test_residual_is_third_order(self):
        base_tau = 0.02
        base_deltas = np.array([0.013, -0.008])
        terms = ising_chain(2)
        residuals = []
        for lvl in range(4):
            s = 0.5**lvl
            plan = TrotterPlan(terms, t=base_tau * s, n=1)
            diff = self.exact_step_difference(plan, base_deltas * s)
            approx = single_step_error_expansion(plan, base_deltas * s)
            residuals.append(np.linalg.norm(diff - approx))
        slope = np.polyfit(np.log([0.5**lvl for lvl in range(4)]), np.log(residuals), 1)[0]
        assert slope >= 2.7

    def test_sample_average_matches_closed_form(self):
        # the expansion is a quadratic polynomial in the offsets, so its exact
        # coefficient matrices follow from a few probe evaluations and the
        # 1e5-sample average can be formed without 1e5 full rebuilds
        plan = TrotterPlan((SZ, SX), t=0.05, n=1)
        sigma = 0.02
        k = 2
        e0 = single_step_error_expansion(plan, np.zeros(k))
        lin = []
        quad = {}
        for j in range(k):
            probe = np.zeros(k)
            probe[j] = 1.0
            plus = single_step_error_expansion(plan, probe)
            minus = single_step_error_expansion(plan, -probe)
            lin.append((plus - minus) / 2.0)
            quad[(j, j)] = (plus + minus - 2.0 * e0) / 2.0
        both = single_step_error_expansion(plan, np.ones(k))
        plus0 = single_step_error_expansion(plan, np.array([1.0, 0.0]))
        plus1 = single_step_error_expansion(plan, np.array([0.0, 1.0]))
        quad[(0, 1)] = (both - plus0 - plus1 + e0) / 2.0
        # interpolation sanity: reproduce a full evaluation at a random point
        probe = np.array([0.3, -0.7])
        rebuilt = (
            e0
            + probe[0] * lin[0]
            + probe[1] * lin[1]
            + probe[0] ** 2 * quad[(0, 0)]
            + probe[1] ** 2 * quad[(1, 1)]
            + 2.0 * probe[0] * probe[1] * quad[(0, 1)]
        )
        np.testing.assert_allclose(rebuilt, single_step_error_expansion(plan, probe), atol=1e-12)

        n_samples = 100_000
        draws = np.random.default_rng(2718).normal(0.0, sigma, size=(n_samples, k))
        feats = np.stack(
            [draws[:, 0], draws[:, 1], draws[:, 0] ** 2, draws[:, 1] ** 2,
             2.0 * draws[:, 0] * draws[:, 1]],
            axis=1,
        )
        mats = np.stack([lin[0], lin[1], quad[(0, 0)], quad[(1, 1)], quad[(0, 1)]])
        samples = feats @ mats.reshape(5, -1)  # per-sample deviation from e0
        mean = e0 + samples.mean(axis=0).reshape(e0.shape)
        se = np.sqrt(
            samples.real.var(axis=0, ddof=1) + samples.imag.var(axis=0, ddof=1)
        ).reshape(e0.shape) / np.sqrt(n_samples)
        closed = averaged_step_error_expansion(plan, sigma)
        assert np.all(np.abs(mean - closed) <= 4.0 * se + 1e-12)

    def test_averaged_commuting_zero_sigma(self):
        h1 = np.kron(SZ, np.eye(2))
        h2 = np.kron(np.eye(2), SZ)
        plan = TrotterPlan((h1, h2), t=0.4, n=2)
        assert np.abs(averaged_step_error_expansion(plan, 0.0)).max() <= 1e-14

    def test_averaged_single_qubit_by_hand(self):
        plan = TrotterPlan((SZ, SX), t=0.3, n=2)
        sigma = 0.07
        tau = plan.tau
        eye = np.eye(2)
        comm = SZ @ SX - SX @ SZ  # = 2i sigma_y
        np.testing.assert_allclose(comm, 2j * np.array([[0, -1j], [1j, 0]]), atol=1e-15)
        hand = -0.5 * tau**2 * (np.kron(comm.conj(), eye) + np.kron(eye, comm))
        # both generators square to the identity
        hand += sigma**2 * (2.0 * np.eye(4) - np.kron(SZ.conj(), SZ) - np.kron(SX.conj(), SX))
        np.testing.assert_allclose(averaged_step_error_expansion(plan, sigma), hand, atol=1e-13)

    def test_averaged_is_even_in_sigma(self):
        plan = TrotterPlan(ising_chain(2), t=0.2, n=3)
        np.testing.assert_allclose(
            averaged_step_error_expansion(plan, 0.04),
            averaged_step_error_expansion(plan, -0.04),
            atol=1e-15,
        )

    def test_offset_count_validated(self):
        with pytest.raises(ValueError, match="offsets"):
            single_step_error_expansion(qubit_plan(), np.zeros(3))
