import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_marginal, left_connected_subsets, marginal_table
from treeshift.chains import (
    Configuration,
    MarkovSpec,
    SampledTree,
    ZKernel,
    assemble,
    bernoulli_spec,
    cylinder_measure,
    derive_seed,
    empirical_cylinder,
    enumerate_cylinders,
    frac_from_str,
    frac_to_str,
    kernel_for_letter,
    make_spec,
    restriction,
    reverse_kernel,
    sample_ball,
    spec_from_json,
    spec_to_json,
    translate_configuration,
    validate,
)
from treeshift.errors import DomainError, InputError, MissingCoordinate
from treeshift.randspec import random_spec
from treeshift.words import IDENTITY, Letter, Word, ball, word_from_str

H = Fraction(1, 2)
W = word_from_str


class TestFractions:
    def test_accepts_lowest_terms(self):
        assert frac_from_str("1/2") == H
        assert frac_from_str("3") == 3
        assert frac_from_str("0") == 0

    def test_rejects_bad_input(self):
        for bad in ["2/4", "-1/2", "1/-2", "1/0", "0/2", "1.5", "1/2/3", " 1/2", "01/2"]:
            with pytest.raises(InputError):
                frac_from_str(bad)

    @given(st.fractions(min_value=0, max_value=10))
    def test_round_trip(self, f):
        assert frac_from_str(frac_to_str(f)) == f


class TestValidate:
    def test_bernoulli_valid(self):
        spec = bernoulli_spec([0, 1], [H, H])
        assert validate(spec).ok

    def test_identity_kernel_valid(self):
        spec = make_spec(
            ["s1", "s2"], [0, 1], [H, H], [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]
        )
        assert validate(spec).ok

    def test_nonstationary_rejected(self):
        spec = make_spec(
            ["s1", "s2"],
            [0, 1],
            [Fraction(1, 3), Fraction(2, 3)],
            [[[H, H], [H, H]], [[H, H], [H, H]]],
        )
        report = validate(spec)
        assert not report.ok
        assert any("stationary" in p for p in report.problems)

    def test_zero_mass_rejected(self):
        spec = make_spec(["s1", "s2"], [0, 1], [1, 0], [[[1, 0], [0, 1]]] * 2)
        assert any("positive" in p for p in validate(spec).problems)

    def test_non_stochastic_row_rejected(self):
        spec = make_spec(["s1", "s2"], [0, 1], [H, H], [[[H, H], [H, 1]], [[H, H], [H, H]]])
        assert any("sums to" in p for p in validate(spec).problems)


class TestReverseKernel:
    def test_symmetric_uniform_is_self_reverse(self):
        spec = make_spec(
            ["s1", "s2"], [0, 1], [H, H], [[[H, H], [H, H]], [[0, 1], [1, 0]]]
        )
        k = spec.kernels[0]
        assert reverse_kernel(spec, 0) == tuple(zip(*k)) == k

    def test_worked_example(self):
        spec = make_spec(
            ["s1", "s2"],
            [0, 1],
            [Fraction(1, 3), Fraction(2, 3)],
            [[[0, 1], [H, H]], [[0, 1], [H, H]]],
        )
        assert validate(spec).ok
        rev = reverse_kernel(spec, 0)
        assert rev == ((Fraction(0), Fraction(1)), (H, H))
        # detailed balance form: pi(a) rev(a,b) == pi(b) P(b,a)
        for a in range(2):
            for b in range(2):
                assert spec.pi[a] * rev[a][b] == spec.pi[b] * spec.kernels[0][b][a]

    @pytest.mark.parametrize("seed", range(6))
    def test_involution_and_rows(self, seed):
        spec = random_spec(seed, size=seed % 3 + 2)
        for gen in range(spec.rank):
            rev = reverse_kernel(spec, gen)
            for row in rev:
                assert sum(row) == 1
                assert all(x >= 0 for x in row)
            back = MarkovSpec(spec.generators, spec.alphabet, spec.pi, (rev,) * spec.rank)
            assert reverse_kernel(back, 0) == spec.kernels[gen]


class TestConfiguration:
    def test_requires_left_connected_domain(self):
        with pytest.raises(DomainError):
            Configuration({IDENTITY: 0, W("s1.s1"): 1})
        with pytest.raises(DomainError):
            Configuration({W("s1"): 0})

    def test_missing_coordinate(self):
        phi = Configuration({IDENTITY: 0})
        with pytest.raises(MissingCoordinate):
            phi[W("s1")]


class TestCylinderMeasure:
    def test_singleton(self, m1):
        for a in range(2):
            assert cylinder_measure(m1, Configuration({IDENTITY: a})) == H

    def test_worked_quarter_cylinder(self, m1):
        phi = Configuration({IDENTITY: 0, W("s1"): 1, W("s2.s1"): 0})
        assert cylinder_measure(m1, phi) == Fraction(1, 4)

    def test_bernoulli_product(self):
        spec = bernoulli_spec([0, 1, 2], [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
        for dom in [ball(2, 1), ball(2, 2)]:
            phi = Configuration({w: i % 3 for i, w in enumerate(dom)})
            expected = Fraction(1)
            for w, v in phi.items():
                expected *= spec.pi[v]
            assert cylinder_measure(spec, phi) == expected

    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_brute_marginal_on_small_ball(self, seed, m1):
        spec = m1 if seed == 0 else random_spec(seed, size=3)
        big = ball(2, 1)
        for sub in left_connected_subsets(big):
            sub_words = sorted(sub, key=lambda w: w.sort_key())
            table = marginal_table(spec, big, sub_words)
            for values in itertools.product(range(spec.size), repeat=len(sub_words)):
                phi = Configuration(dict(zip(sub_words, values)))
                assert cylinder_measure(spec, phi) == table.get(values, Fraction(0))

    def test_brute_marginal_single_config(self, m1):
        phi = {IDENTITY: 0, W("s1"): 1, W("s2.s1"): 0}
        assert brute_marginal(m1, ball(2, 2), phi) == Fraction(1, 4)

    def test_additivity(self, m1):
        dom = ball(2, 1)
        child = W("s1.s1")
        for values, weight in enumerate_cylinders(m1, dom, positive_only=False):
            phi = dict(zip(dom.words, values))
            total = sum(
                cylinder_measure(m1, Configuration({**phi, child: a})) for a in range(2)
            )
            assert total == cylinder_measure(m1, Configuration(phi)) == weight

    def test_translation_invariance(self, m1):
        dom = ball(2, 1)
        for values, weight in enumerate_cylinders(m1, dom):
            phi = Configuration(dict(zip(dom.words, values)))
            for h in dom:
                psi = translate_configuration(phi, h)
                assert cylinder_measure(m1, psi) == weight

    @pytest.mark.parametrize("seed", range(3))
    def test_total_mass(self, seed):
        spec = random_spec(seed, size=2 + seed, style="sparse")
        total = sum(w for _, w in enumerate_cylinders(spec, ball(2, 1)))
        assert total == 1


class TestRestrictionAssemble:
    def test_restriction_fields(self, m1):
        zk = restriction(m1, 1)
        assert zk.pi == (H, H)
        assert zk.transitions == ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))

    def test_three_step_cylinder_matches(self, m1):
        zk = restriction(m1, 0)
        path = [0, 1, 0]
        chain_prob = zk.pi[path[0]] * zk.transitions[0][1] * zk.transitions[1][0]
        phi = Configuration({IDENTITY: 0, W("s1"): 1, W("s1.s1"): 0})
        assert chain_prob == cylinder_measure(m1, phi) == Fraction(1, 8)

    def test_assemble_round_trip(self, m1):
        parts = {name: restriction(m1, gi) for gi, name in enumerate(m1.generators)}
        assert assemble(parts) == m1

    def test_assemble_from_scratch(self, m1):
        iid = ZKernel((0, 1), (H, H), ((H, H), (H, H)))
        swap = ZKernel((0, 1), (H, H), ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))))
        assert assemble({"s1": iid, "s2": swap}) == m1

    def test_assemble_mismatch(self):
        a = ZKernel((0, 1), (H, H), ((H, H), (H, H)))
        b = ZKernel((0, 1), (Fraction(1, 3), Fraction(2, 3)), ((H, H), (H, H)))
        with pytest.raises(InputError):
            assemble({"s1": a, "s2": b})


class TestBernoulliSpec:
    def test_rows_equal_pi(self):
        pi = [Fraction(1, 3), Fraction(2, 3)]
        spec = bernoulli_spec(["a", "b"], pi)
        for k in spec.kernels:
            for row in k:
                assert row == tuple(pi)
        assert validate(spec).ok

    def test_zero_mass_rejected(self):
        with pytest.raises(InputError):
            bernoulli_spec([0, 1], [1, 0])


class TestSampling:
    def test_swap_edges_respected(self, m1):
        phi = sample_ball(m1, 2, seed=7)
        for w in phi:
            if not w.is_identity and w.letters[0] == Letter(1, 1):
                from treeshift.words import parent

                assert phi[w] == 1 - phi[parent(w)]

    def test_deterministic_and_order_independent(self, m1):
        a = sample_ball(m1, 2, seed=123)
        b = sample_ball(m1, 2, seed=123)
        assert a == b
        tree = SampledTree(m1, 123)
        deep = W("s1.s2.s1")
        v = tree[deep]  # deep access first
        fresh = SampledTree(m1, 123)
        for w in ball(2, 2):
            fresh[w]
        assert fresh[deep] == v

    def test_empirical_trivial(self, m1):
        samples = [sample_ball(m1, 1, derive_seed(5, i)) for i in range(20)]
        phi_all = Configuration({IDENTITY: samples[0][IDENTITY]})
        none_value = Configuration({IDENTITY: 0, W("s2"): 0})  # swap forbids it
        assert empirical_cylinder(samples, none_value) == 0.0
        assert 0 < empirical_cylinder(samples, phi_all) <= 1

    def test_quarter_cylinder_frequency(self, m1):
        phi = Configuration({IDENTITY: 0, W("s1"): 1, W("s2.s1"): 0})
        n = 10_000
        trees = (SampledTree(m1, derive_seed(42, i)) for i in range(n))
        hits = sum(
            all(t[w] == v for w, v in phi.items()) for t in trees
        )
        p = Fraction(1, 4)
        # exact binomial four-sigma bound: (hits/n - p)^2 <= 16 p(1-p)/n
        assert (Fraction(hits, n) - p) ** 2 <= 16 * p * (1 - p) / n


class TestJson:
    def test_round_trip(self, m1):
        obj = spec_to_json(m1)
        again = spec_from_json(json.loads(json.dumps(obj)))
        assert again == m1

    def test_schema_errors(self, m1):
        good = spec_to_json(m1)
        bad = dict(good)
        bad["generators"] = ["s2", "s1"]
        with pytest.raises(InputError):
            spec_from_json(bad)
        bad = dict(good)
        bad["pi"] = {"0": "2/4", "1": "1/2"}
        with pytest.raises(InputError):
            spec_from_json(bad)
        bad = dict(good)
        bad["pi"] = {"0": "1/2", "2": "1/2"}
        with pytest.raises(InputError):
            spec_from_json(bad)
        with pytest.raises(InputError):
            spec_from_json([1, 2])

    def test_kernel_for_letter_unknown_generator(self, m1):
        with pytest.raises(InputError):
            kernel_for_letter(m1, Letter(5, 1))
