"""Core algebra: validation, post-processing, joints, equivalence tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minjoint.observables import (
    DEFAULT_TOL,
    MarkovKernel,
    Observable,
    Tolerance,
    compose_kernels,
    constant_kernel,
    identity_kernel,
    is_joint_observable,
    is_postprocessing_of,
    joint_from_common,
    kernel_preserves_equivalence,
    marginal,
    pair_linearly_independent,
    pairwise_linearly_independent,
    pairwise_reduce,
    post_process,
    product_kernel,
    validate_observable,
)
from minjoint.qubit import BlochObservable, JointParams, bloch_effect, \
    bloch_to_observable, joint_from_params
from minjoint.sampling import random_kernel, random_observable

from conftest import JOINT_OUTCOMES, discrimination_fixture, example_trivial_instance

I2 = np.eye(2, dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class TestValidation:
    def test_projective_pair_passes(self):
        obs = Observable(("+", "-"), (0.5 * (I2 + SZ), 0.5 * (I2 - SZ)))
        assert validate_observable(obs).passed

    def test_duplicated_effect_fails_normalization(self):
        obs = Observable(("+", "-"), (0.5 * (I2 + SZ), 0.5 * (I2 + SZ)))
        report = validate_observable(obs)
        assert not report.passed
        # sums to I + sigma_z, so the residual is |sigma_z| entrywise: max 1
        assert report.normalization_residual == pytest.approx(1.0)

    def test_unbiased_bloch_passes_with_expected_eigenvalues(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.3, 0, 0]))
        report = validate_observable(obs)
        assert report.passed
        for effect in obs.effects:
            eig = np.linalg.eigvalsh(effect.entries)
            assert eig == pytest.approx([(1 - 0.3) / 2, (1 + 0.3) / 2])

    def test_non_hermitian_reported(self):
        obs = Observable(("a", "b"), (np.array([[0.5, 0.3], [0.0, 0.5]]),
                                      np.array([[0.5, -0.3], [0.0, 0.5]])))
        report = validate_observable(obs)
        assert max(report.herm_residuals) == pytest.approx(0.3)
        assert not report.passed

    def test_structural_errors(self):
        with pytest.raises(ValueError):
            Observable((), ())
        with pytest.raises(ValueError):
            Observable(("a", "b"), (I2, np.eye(3, dtype=complex)))


class TestPostProcess:
    def test_identity_kernel_fixed_point(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.2, 0.1, 0]))
        out = post_process(identity_kernel(obs.outcomes), obs)
        assert np.allclose(out.as_array(), obs.as_array())

    def test_grouping_of_basis_measurement(self):
        parent, grouped, _, grouping = discrimination_fixture()
        out = post_process(grouping, parent)
        assert np.allclose(out.as_array(), grouped.as_array())

    def test_constant_kernel_yields_trivial(self):
        parent, _, _, _ = discrimination_fixture()
        out = post_process(constant_kernel(("x", "y"), parent.outcomes), parent)
        assert np.allclose(out.as_array(), np.stack([np.eye(4) / 2] * 2))

    def test_label_mismatch(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.2, 0, 0]))
        with pytest.raises(ValueError):
            post_process(identity_kernel(("x", "y")), obs)


class TestComposeKernels:
    def test_identity_neutral(self):
        rng = np.random.default_rng(0)
        p = random_kernel(rng, ("a", "b"), ("1", "2", "3"))
        assert np.allclose(compose_kernels(p, identity_kernel(p.in_set)).entries,
                           p.entries)
        assert np.allclose(compose_kernels(identity_kernel(p.out_set), p).entries,
                           p.entries)

    def test_uniform_kernel_idempotent(self):
        u = MarkovKernel(("a", "b"), ("a", "b"), [[0.5, 0.5], [0.5, 0.5]])
        assert np.allclose(compose_kernels(u, u).entries, u.entries)

    def test_grouping_after_permutation_is_matrix_product(self):
        _, _, _, grouping = discrimination_fixture()
        perm = np.zeros((4, 4))
        for i, j in enumerate([2, 0, 3, 1]):
            perm[i, j] = 1.0
        perm_kernel = MarkovKernel(("1", "2", "3", "4"), ("1", "2", "3", "4"), perm)
        composed = compose_kernels(grouping, perm_kernel)
        assert np.allclose(composed.entries, grouping.entries @ perm)


class TestMarginals:
    def test_parametrized_joint_marginals_exact(self, f1_min):
        a_obs, b_obs, jp = f1_min
        joint = joint_from_params(a_obs, b_obs, jp)
        assert np.allclose(marginal(joint, 0).as_array(),
                           bloch_to_observable(a_obs).as_array())
        assert np.allclose(marginal(joint, 1).as_array(),
                           bloch_to_observable(b_obs).as_array())

    def test_commuting_product_observable(self):
        diag_a = (np.diag([0.7, 0.2]).astype(complex), np.diag([0.3, 0.8]).astype(complex))
        diag_b = (np.diag([0.4, 0.9]).astype(complex), np.diag([0.6, 0.1]).astype(complex))
        outcomes = tuple((x, y) for x in ("1", "2") for y in ("1", "2"))
        joint = Observable(outcomes, tuple(diag_a[i] @ diag_b[j]
                                           for i in range(2) for j in range(2)))
        assert np.allclose(marginal(joint, 0).as_array(), np.stack(diag_a))
        assert np.allclose(marginal(joint, 1).as_array(), np.stack(diag_b))

    def test_trivial_joint(self):
        inst = example_trivial_instance()
        for axis in (0, 1):
            assert np.allclose(marginal(inst.joint, axis).as_array(),
                               np.stack([I2 / 2] * 2))

    def test_non_product_outcomes_rejected(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.2, 0, 0]))
        with pytest.raises(ValueError):
            marginal(obs, 0)


class TestIsJointObservable:
    def test_example_trivial_true(self):
        inst = example_trivial_instance()
        assert is_joint_observable(inst.joint, inst.marginals)

    def test_wrong_marginals_false(self):
        inst = example_trivial_instance()
        sharp = Observable(("+", "-"), (0.5 * (I2 + SZ), 0.5 * (I2 - SZ)))
        assert not is_joint_observable(inst.joint, (sharp, sharp))

    def test_parametrized_joint_true(self, f1_min):
        a_obs, b_obs, jp = f1_min
        joint = joint_from_params(a_obs, b_obs, jp)
        marginals = [bloch_to_observable(a_obs), bloch_to_observable(b_obs)]
        assert is_joint_observable(joint, marginals)


class TestProductKernel:
    def test_identity_product(self):
        k = identity_kernel(("1", "2"))
        prod = product_kernel([k, k])
        assert prod.out_set == tuple((x, y) for x in ("1", "2") for y in ("1", "2"))
        # delta on matching pairs: entry ((x, y), z) = [x == z][y == z]
        expected = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], dtype=float)
        assert np.allclose(prod.entries, expected)

    def test_uniform_product(self):
        k = constant_kernel(("a", "b"), ("1", "2"))
        assert np.allclose(product_kernel([k, k]).entries, 0.25)

    def test_deterministic_times_noisy_by_direct_formula(self):
        det = MarkovKernel(("a", "b"), ("1", "2"), [[1, 0], [0, 1]])
        noisy = MarkovKernel(("c", "d"), ("1", "2"), [[0.3, 0.7], [0.7, 0.3]])
        prod = product_kernel([det, noisy])
        for i, (x1, x2) in enumerate(prod.out_set):
            for j, y in enumerate(prod.in_set):
                expected = (det.entries[det.out_set.index(x1), j]
                            * noisy.entries[noisy.out_set.index(x2), j])
                assert prod.entries[i, j] == pytest.approx(expected)

    def test_mismatched_inputs_rejected(self):
        k1 = identity_kernel(("1", "2"))
        k2 = identity_kernel(("1", "3"))
        with pytest.raises(ValueError):
            product_kernel([k1, k2])
        with pytest.raises(ValueError):
            product_kernel([])


class TestJointFromCommon:
    def test_deterministic_projections_relabel(self):
        rng = np.random.default_rng(5)
        common = random_observable(rng, 2, 4)
        p1 = MarkovKernel(("+", "-"), common.outcomes,
                          [[1, 1, 0, 0], [0, 0, 1, 1]])
        p2 = MarkovKernel(("+", "-"), common.outcomes,
                          [[1, 0, 1, 0], [0, 1, 0, 1]])
        joint = joint_from_common(common, [p1, p2])
        # the product kernel is a permutation-like relabeling of the four outcomes
        arr = common.as_array()
        expected = {("+", "+"): arr[0], ("+", "-"): arr[1],
                    ("-", "+"): arr[2], ("-", "-"): arr[3]}
        for label, effect in zip(joint.outcomes, joint.effects):
            assert np.allclose(effect.entries, expected[label], atol=1e-12)

    def test_trivial_common(self):
        common = Observable(tuple("abcd"), tuple(np.eye(2, dtype=complex) / 4
                                                 for _ in range(4)))
        rng = np.random.default_rng(6)
        kernels = [random_kernel(rng, ("+", "-"), common.outcomes) for _ in range(2)]
        joint = joint_from_common(common, kernels)
        for label, effect in zip(joint.outcomes, joint.effects):
            weight = sum(kernels[0].entries[kernels[0].out_set.index(label[0]), y]
                         * kernels[1].entries[kernels[1].out_set.index(label[1]), y]
                         for y in range(4)) / 4
            assert np.allclose(effect.entries, weight * np.eye(2), atol=1e-12)

    def test_random_marginal_property(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            common = random_observable(rng, 2, 3)
            kernels = [random_kernel(rng, ("+", "-"), common.outcomes)
                       for _ in range(2)]
            joint = joint_from_common(common, kernels)
            for axis, kernel in enumerate(kernels):
                want = post_process(kernel, common)
                got = marginal(joint, axis)
                assert np.max(np.abs(got.as_array() - want.as_array())) < 1e-12


class TestPairIndependence:
    def test_equal_effects_dependent(self):
        assert not pair_linearly_independent(Observable(("a", "b"), (I2 / 2, I2 / 2)).effects[0],
                                             Observable(("a", "b"), (I2 / 2, I2 / 2)).effects[1])

    def test_orthogonal_projections_independent(self):
        obs = Observable(("+", "-"), (0.5 * (I2 + SZ), 0.5 * (I2 - SZ)))
        assert pair_linearly_independent(obs.effects[0], obs.effects[1])

    def test_proportional_pair_dependent(self):
        e2 = bloch_effect(0.8, [0.1, 0.2, 0.0])
        obs = Observable(("a", "b"), (0.3 * e2, np.eye(2) - 0.3 * e2))
        assert not pair_linearly_independent(obs.effects[0],
                                             Observable(("x", "y"), (e2, np.eye(2) - e2)).effects[0])


class TestPairwiseReduce:
    def test_already_independent_fixed_point(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.3, 0, 0]))
        reduced, forward, backward = pairwise_reduce(obs)
        assert reduced.outcomes == obs.outcomes
        assert np.allclose(forward.entries, np.eye(2))
        assert np.allclose(backward.entries, np.eye(2))

    def test_all_proportional_to_identity(self):
        obs = Observable(("a", "b", "c"), (I2 / 2, I2 / 4, I2 / 4))
        reduced, forward, backward = pairwise_reduce(obs)
        assert reduced.n_outcomes == 1
        assert np.allclose(reduced.effects[0].entries, I2)
        assert np.allclose(backward.entries, [[0.5], [0.25], [0.25]])

    def test_example_trivial_merges_to_two_outcomes(self):
        inst = example_trivial_instance()
        t_mat = bloch_effect(1.0, [0, 0, 0.5])
        reduced, forward, backward = pairwise_reduce(inst.joint)
        assert reduced.n_outcomes == 2
        assert np.allclose(reduced.effects[0].entries, t_mat)
        assert np.allclose(reduced.effects[1].entries, I2 - t_mat)

    def test_round_trip_with_zero_effect(self):
        e = bloch_effect(0.6, [0.1, 0, 0.2])
        obs = Observable(("a", "b", "c", "d"),
                         (0.25 * e, np.zeros((2, 2), dtype=complex), 0.75 * e, I2 - e))
        reduced, forward, backward = pairwise_reduce(obs)
        assert reduced.n_outcomes == 2
        assert np.allclose(post_process(forward, obs).as_array(), reduced.as_array(),
                           atol=1e-12)
        assert np.allclose(post_process(backward, reduced).as_array(), obs.as_array(),
                           atol=1e-12)
        assert pairwise_linearly_independent(reduced)

    def test_all_zero_rejected(self):
        obs = Observable(("a",), (np.zeros((2, 2), dtype=complex),))
        with pytest.raises(ValueError):
            pairwise_reduce(obs)


class TestKernelPreservesEquivalence:
    def test_identity_and_permutation_preserve(self):
        parent, _, _, _ = discrimination_fixture()
        assert kernel_preserves_equivalence(identity_kernel(parent.outcomes), parent)
        perm = np.zeros((4, 4))
        for i, j in enumerate([1, 2, 3, 0]):
            perm[i, j] = 1.0
        assert kernel_preserves_equivalence(
            MarkovKernel(parent.outcomes, parent.outcomes, perm), parent)

    def test_grouping_loses_information(self):
        parent, _, _, grouping = discrimination_fixture()
        assert not kernel_preserves_equivalence(grouping, parent)

    def test_soundness_against_lp_oracle(self):
        # preserving kernels keep A recoverable from p * A
        rng = np.random.default_rng(11)
        for _ in range(5):
            obs = random_observable(rng, 2, 3)
            perm = np.zeros((3, 3))
            order = rng.permutation(3)
            for i, j in enumerate(order):
                perm[i, j] = 1.0
            kernel = MarkovKernel(obs.outcomes, obs.outcomes, perm)
            assert kernel_preserves_equivalence(kernel, obs)
            ok, _ = is_postprocessing_of(obs, post_process(kernel, obs))
            assert ok


class TestIsPostprocessingOf:
    def test_reflexive_with_witness(self):
        obs = bloch_to_observable(BlochObservable(1.0, [0.25, 0.1, 0]))
        ok, witness = is_postprocessing_of(obs, obs)
        assert ok
        assert np.allclose(post_process(witness, obs).as_array(), obs.as_array(),
                           atol=1e-8)

    def test_grouping_direction_only(self):
        parent, grouped, _, _ = discrimination_fixture()
        ok, witness = is_postprocessing_of(grouped, parent)
        assert ok
        assert np.allclose(post_process(witness, parent).as_array(),
                           grouped.as_array(), atol=1e-8)
        ok_rev, _ = is_postprocessing_of(parent, grouped)
        assert not ok_rev

    def test_trivial_observable_is_least(self):
        rng = np.random.default_rng(13)
        trivial = Observable(("x", "y"), (I2 / 2, I2 / 2))
        for _ in range(3):
            obs = random_observable(rng, 2, 3)
            ok, _ = is_postprocessing_of(trivial, obs)
            assert ok


@st.composite
def small_kernels(draw, out_n, in_n):
    raw = draw(st.lists(st.lists(st.floats(0.01, 1.0), min_size=out_n, max_size=out_n),
                        min_size=in_n, max_size=in_n))
    cols = np.array(raw, dtype=float).T
    cols /= cols.sum(axis=0, keepdims=True)
    out = tuple(f"o{i}" for i in range(out_n))
    inp = tuple(f"i{i}" for i in range(in_n))
    return MarkovKernel(out, inp, cols)


class TestAlgebraProperties:
    @given(small_kernels(2, 3), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_post_process_composition(self, p, seed):
        rng = np.random.default_rng(seed)
        obs = random_observable(rng, 2, 3, labels=p.in_set)
        q = random_kernel(rng, p.in_set, p.in_set)
        left = post_process(compose_kernels(p, q), obs)
        right = post_process(p, post_process(q, obs))
        assert np.max(np.abs(left.as_array() - right.as_array())) < 1e-9

    @given(small_kernels(2, 2), small_kernels(2, 3), small_kernels(3, 2))
    @settings(max_examples=25, deadline=None)
    def test_composition_associative(self, p, q, r):
        q = MarkovKernel(p.in_set, q.in_set, q.entries)
        r = MarkovKernel(q.in_set, r.in_set, r.entries)
        left = compose_kernels(p, compose_kernels(q, r))
        right = compose_kernels(compose_kernels(p, q), r)
        assert np.max(np.abs(left.entries - right.entries)) < 1e-9

    @given(small_kernels(3, 2), small_kernels(2, 2))
    @settings(max_examples=25, deadline=None)
    def test_product_kernel_columns(self, p1, p2):
        p2 = MarkovKernel(p2.out_set, p1.in_set, p2.entries)
        prod = product_kernel([p1, p2])
        assert np.max(np.abs(prod.entries.sum(axis=0) - 1.0)) < 2 * DEFAULT_TOL.eps_norm

    def test_post_process_preserves_validity(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            obs = random_observable(rng, 3, 4)
            kernel = random_kernel(rng, ("a", "b", "c"), obs.outcomes)
            assert validate_observable(post_process(kernel, obs)).passed
