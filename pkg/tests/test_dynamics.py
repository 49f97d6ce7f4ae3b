import math

import numpy as np
import pytest

from hnbody.clifford import exp_subgroup, NORMAL_A, NILPOTENT_N, random_unimodular
from hnbody.dynamics import (
    ConservedQuantities,
    SystemState,
    conserved,
    cotangent_potential,
    eom_interaction,
    eom_rhs,
    gradient_consistency,
    integrate,
    min_pair_theta,
    theta,
    vlasov_weak_residual,
)
from hnbody.errors import DomainError, SingularityError
from hnbody.geometry import apply_mobius, geodesic_through
from hnbody.equilibria import EquilibriumClass, FindOptions, find_equilibrium


def two_body(positions, velocities=(0j, 0j), masses=(1.0, 1.0), R=1.0, t=0.0):
    return SystemState(t, positions, velocities, masses, R)


@pytest.fixture(scope="module")
def elliptic_pair():
    return find_equilibrium(
        EquilibriumClass.ELLIPTIC_CYCLIC,
        [1.0, 1.0],
        1.0,
        np.array([2j, 0.5j]),
        FindOptions(symmetry="axis"),
    )


class TestTheta:
    def test_axis_pair(self):
        # on the axis the cross terms drop: theta(ia, ib) = 4 (a^2 - b^2)^2
        assert theta(1j, 2j) == 36.0
        for a, b in ((0.5, 2.0), (1.0, 3.0), (2.0, 2.5)):
            assert theta(1j * a, 1j * b) == pytest.approx(4 * (a * a - b * b) ** 2, rel=1e-14)

    def test_coincident_is_zero(self):
        for w in (1j, 0.7 + 2.3j, -4 + 0.1j):
            assert theta(w, w) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self):
        assert theta(1 + 1j, 1 + 2j) == 36.0

    def test_bitwise_symmetry(self):
        rng = np.random.default_rng(20)
        for _ in range(300):
            w1 = rng.normal() + 1j * rng.uniform(0.05, 4.0)
            w2 = rng.normal() + 1j * rng.uniform(0.05, 4.0)
            assert theta(w1, w2) == theta(w2, w1)

    def test_nonnegative(self):
        rng = np.random.default_rng(21)
        for _ in range(500):
            w1 = rng.normal() + 1j * rng.uniform(0.05, 4.0)
            w2 = rng.normal() + 1j * rng.uniform(0.05, 4.0)
            assert theta(w1, w2) >= 0.0


class TestPotential:
    def test_hand_value(self):
        s = two_body([1j, 2j])
        assert cotangent_potential(s) == pytest.approx(-5.0 / 3.0, rel=1e-15)

    def test_mobius_invariance(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            n = rng.integers(2, 5)
            w = rng.normal(size=n) + 1j * rng.uniform(0.2, 3.0, n)
            m = rng.uniform(0.2, 2.0, n)
            s = SystemState(0.0, w, np.zeros(n, complex), m, 1.0)
            v0 = cotangent_potential(s)
            A = random_unimodular(rng)
            w2 = np.array([apply_mobius(A, wk) for wk in w])
            s2 = SystemState(0.0, w2, np.zeros(n, complex), m, 1.0)
            assert abs(cotangent_potential(s2) - v0) < 1e-10 * max(1.0, abs(v0))

    def test_scaling_flow_invariance(self):
        w = np.array([0.3 + 1j, -0.4 + 2j])
        s = two_body(w)
        v0 = cotangent_potential(s)
        for t in (-1.0, 0.5, 2.0):
            s2 = two_body(math.exp(t) * w)
            assert cotangent_potential(s2) == pytest.approx(v0, rel=1e-12)

    def test_single_body_zero(self):
        s = SystemState(0.0, [1j], [0j], [1.0], 1.0)
        assert cotangent_potential(s) == 0.0

    def test_collision_raises(self):
        with pytest.raises(SingularityError):
            cotangent_potential(two_body([1j, 1j + 1e-30]))


class TestEomRhs:
    def test_rest_pair_hand_value(self):
        s = two_body([1j, 2j])
        acc = eom_rhs(s)
        assert abs(acc[0] - (32.0 / 9.0) * 1j) < 1e-12
        # attraction: the upper body accelerates downward
        assert acc[1].imag < 0

    def test_single_body_pure_geodesic(self):
        s = SystemState(0.0, [0.5 + 2j], [1.0 + 0.5j], [1.0], 1.0)
        w, v = s.positions[0], s.velocities[0]
        assert eom_rhs(s)[0] == 2.0 * v * v / (w - np.conjugate(w))

    def test_axis_pair_accelerations_imaginary(self):
        for a, b in ((1.0, 2.0), (0.5, 3.0)):
            s = two_body([1j * a, 1j * b])
            acc = eom_rhs(s)
            assert np.max(np.abs(acc.real)) < 1e-14
            # equal masses attract toward each other along the axis
            assert acc[0].imag * acc[1].imag < 0

    def test_equivariance_under_isometric_subgroups(self):
        rng = np.random.default_rng(23)
        for field, tau in ((NORMAL_A, 0.7), (NILPOTENT_N, -1.3), (NORMAL_A, -0.4)):
            A = exp_subgroup(field, tau)
            for _ in range(40):
                n = rng.integers(2, 5)
                w = rng.normal(size=n) + 1j * rng.uniform(0.3, 3.0, n)
                v = rng.normal(size=n) + 1j * rng.normal(size=n)
                m = rng.uniform(0.2, 2.0, n)
                s = SystemState(0.0, w, v, m, 1.0)
                acc = eom_rhs(s)
                den = A.c * w + A.d
                f1 = 1.0 / den**2
                f2 = -2.0 * A.c / den**3
                wt = np.array([apply_mobius(A, wk) for wk in w])
                st = SystemState(0.0, wt, f1 * v, m, 1.0)
                transported = f2 * v * v + f1 * acc
                err = np.max(np.abs(eom_rhs(st) - transported))
                assert err < 1e-9 * max(1.0, float(np.max(np.abs(transported))))

    def test_singularity_guard_reports_pair(self):
        with pytest.raises(SingularityError) as info:
            eom_rhs(two_body([1j, 1j + 1e-9]))
        assert info.value.pair == (0, 1)


class TestGradientConsistency:
    def test_two_body_example(self):
        rep = gradient_consistency(two_body([1j, 2j]))
        assert rep.sign == -1.0
        assert rep.max_rel_error < 1e-6

    def test_three_bodies_radius_two(self):
        rng = np.random.default_rng(24)
        w = rng.normal(size=3) + 1j * rng.uniform(0.5, 2.5, 3)
        m = rng.uniform(0.5, 2.0, 3)
        s = SystemState(0.0, w, np.zeros(3, complex), m, 2.0)
        rep = gradient_consistency(s)
        assert rep.sign == -1.0
        assert rep.max_rel_error < 1e-5

    def test_single_body_trivial(self):
        s = SystemState(0.0, [1j], [0j], [1.0], 1.0)
        rep = gradient_consistency(s)
        assert rep.max_rel_error == 0.0

    def test_sign_is_global(self):
        rng = np.random.default_rng(25)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            w = rng.normal(size=n) + 1j * rng.uniform(0.5, 2.5, n)
            # keep pairs comfortably separated so the FD oracle is well-scaled
            if min_pair_theta(w) < 1e-2:
                continue
            m = rng.uniform(0.2, 2.0, n)
            R = float(rng.choice([0.5, 1.0, 2.0]))
            s = SystemState(0.0, w, np.zeros(n, complex), m, R)
            rep = gradient_consistency(s)
            assert rep.sign == -1.0
            assert rep.max_rel_error < 1e-5

    def test_step_underflow_rejected(self):
        with pytest.raises(DomainError):
            gradient_consistency(two_body([1j, 2j]), step=1e-20)


class TestConserved:
    def test_single_body_kinetic(self):
        s = SystemState(0.0, [1j], [1.0 + 0j], [1.0], 1.0)
        q = conserved(s)
        assert q.energy == pytest.approx(0.5, rel=1e-15)

    def test_rotation_momentum_vanishes_at_fixed_point(self):
        s = SystemState(0.0, [1j, 3j], [0.7 + 0.2j, 0j], [1.0, 1.0], 1.0)
        # the body at i contributes nothing to the rotation momentum
        q_with = conserved(s)
        s0 = SystemState(0.0, [3j], [0j], [1.0], 1.0)
        assert q_with.momenta[2] == pytest.approx(conserved(s0).momenta[2], abs=1e-15)

    def test_zero_velocities_zero_momenta(self):
        s = two_body([0.4 + 1j, -0.3 + 2j])
        assert np.all(conserved(s).momenta == 0.0)

    def test_is_dataclass_with_dict(self):
        q = conserved(two_body([1j, 2j], (0.1 + 0j, 0j)))
        d = q.as_dict()
        assert set(d) == {"energy", "momentum_normal", "momentum_nilpotent", "momentum_rotation"}


class TestIntegrate:
    def test_free_motion_follows_geodesic(self):
        s = SystemState(0.0, [1j], [1.0 + 0j], [1.0], 1.0)
        traj = integrate(s, 1.0, tol=1e-11)
        # tangent 1 at i: the unit half-circle about the origin
        arc = geodesic_through(1j, traj.sample(1.0)[0][0])
        assert arc.kind == "circle"
        for t in np.linspace(0.0, 1.0, 23):
            w = traj.sample(t)[0][0]
            assert abs(abs(w) - 1.0) < 1e-8

    def test_time_reversal(self):
        s = two_body([1j, 2j], (0.6 + 0j, -0.6 + 0j))
        traj = integrate(s, 3.0, tol=1e-11)
        w1, v1 = traj.sample(3.0)
        back = integrate(SystemState(0.0, w1, -v1, s.masses, s.R), 3.0, tol=1e-11)
        w0, v0 = back.sample(3.0)
        assert np.max(np.abs(w0 - s.positions)) < 1e-6
        assert np.max(np.abs(v0 + s.velocities)) < 1e-6

    def test_equilibrium_orbit_follows_flow(self, elliptic_pair):
        from hnbody.clifford import ROTATION_ELLIPTIC
        from hnbody.flows import flow

        traj = integrate(elliptic_pair, 2.0, tol=1e-12)
        for t in np.linspace(0.0, 2.0, 17):
            w, _ = traj.sample(t)
            ref = np.array([flow(ROTATION_ELLIPTIC, w0, t) for w0 in elliptic_pair.positions])
            assert np.max(np.abs(w - ref)) < 1e-8

    def test_transported_equilibrium_reintegrates(self, elliptic_pair):
        # pushing the initial data along the rotation flow yields another
        # solution that still rides the flow
        from hnbody.clifford import ROTATION_ELLIPTIC
        from hnbody.flows import flow, transport

        tau = 0.55
        moved = [
            transport(ROTATION_ELLIPTIC, w, v, tau)
            for w, v in zip(elliptic_pair.positions, elliptic_pair.velocities)
        ]
        s = SystemState(
            0.0,
            [m[0] for m in moved],
            [m[1] for m in moved],
            elliptic_pair.masses,
            elliptic_pair.R,
        )
        traj = integrate(s, 1.0, tol=1e-12)
        for t in np.linspace(0.0, 1.0, 9):
            w, _ = traj.sample(t)
            ref = np.array([flow(ROTATION_ELLIPTIC, w0, t) for w0 in s.positions])
            assert np.max(np.abs(w - ref)) < 1e-8

    def test_collision_gives_singularity_verdict(self):
        with pytest.raises(SingularityError) as info:
            integrate(two_body([1j, 2j]), 2.0, tol=1e-10)
        assert info.value.trajectory is not None
        assert info.value.time == pytest.approx(0.34, abs=0.02)

    def test_monotone_times_and_stats(self):
        s = two_body([1j, 2j], (0.6 + 0j, -0.6 + 0j))
        traj = integrate(s, 1.0, tol=1e-9)
        assert np.all(np.diff(traj.times) > 0)
        assert traj.stats.steps == len(traj.times) - 1
        assert traj.stats.min_theta > 0

    def test_invalid_inputs(self):
        s = two_body([1j, 2j])
        with pytest.raises(DomainError):
            integrate(s, 1.0, tol=-1e-9)
        with pytest.raises(DomainError):
            integrate(s, -1.0)


class TestConservation:
    def test_two_body_drift(self):
        s = two_body([1j, 2j], (0.6 + 0j, -0.6 + 0j))
        traj = integrate(s, 10.0, tol=1e-10)
        e0 = conserved(traj.samples[0]).energy
        j0 = conserved(traj.samples[0]).momenta
        for state in traj.samples[:: max(1, len(traj.times) // 200)]:
            q = conserved(state)
            assert abs(q.energy - e0) / max(1.0, abs(e0)) < 1e-7
            assert np.max(np.abs(q.momenta - j0)) / max(1.0, np.max(np.abs(j0))) < 1e-7

    def test_three_body_drift(self, elliptic_pair):
        w = np.concatenate([elliptic_pair.positions, [2.0 + 3.0j]])
        v = np.concatenate([elliptic_pair.velocities, [-0.3 + 0.2j]])
        s = SystemState(0.0, w, v, [1.0, 1.0, 0.05], 1.0)
        traj = integrate(s, 10.0, tol=1e-10)
        assert traj.stats.min_theta > 1e-2
        e0 = conserved(traj.samples[0]).energy
        j0 = conserved(traj.samples[0]).momenta
        for state in traj.samples[:: max(1, len(traj.times) // 200)]:
            q = conserved(state)
            assert abs(q.energy - e0) / max(1.0, abs(e0)) < 1e-7
            assert np.max(np.abs(q.momenta - j0)) / max(1.0, np.max(np.abs(j0))) < 1e-7


class TestVlasovWeakForm:
    def test_constant_test_function_exact(self, elliptic_pair):
        from hnbody.dynamics import default_test_functions

        traj = integrate(elliptic_pair, 1.0, tol=1e-12, max_step=0.005)
        only_one = (default_test_functions()[0],)
        assert vlasov_weak_residual(traj, tests=only_one, num_points=501) == 0.0

    def test_coordinate_test_function(self, elliptic_pair):
        from hnbody.dynamics import default_test_functions

        traj = integrate(elliptic_pair, 2.0, tol=1e-12, max_step=0.005)
        re_x = (default_test_functions()[1],)
        assert vlasov_weak_residual(traj, tests=re_x, num_points=1001) < 1e-6

    def test_speed_squared_test_function(self, elliptic_pair):
        from hnbody.dynamics import default_test_functions

        traj = integrate(elliptic_pair, 2.0, tol=1e-12, max_step=0.005)
        vsq = (default_test_functions()[3],)
        assert vlasov_weak_residual(traj, tests=vsq, num_points=1001) < 1e-5

    def test_full_library(self, elliptic_pair):
        traj = integrate(elliptic_pair, 2.0, tol=1e-12, max_step=0.005)
        assert vlasov_weak_residual(traj, num_points=1001) < 1e-6


class TestSystemStateValidation:
    def test_rejects_lower_half_plane(self):
        with pytest.raises(DomainError):
            SystemState(0.0, [1j, 1 - 1j], [0j, 0j], [1.0, 1.0], 1.0)

    def test_rejects_nonpositive_mass(self):
        with pytest.raises(DomainError):
            SystemState(0.0, [1j], [0j], [0.0], 1.0)

    def test_rejects_bad_radius(self):
        with pytest.raises(DomainError):
            SystemState(0.0, [1j], [0j], [1.0], -2.0)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DomainError):
            SystemState(0.0, [1j, 2j], [0j], [1.0, 1.0], 1.0)
