import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glauberlab.ordercore import (STAR, Poset, contract, dominance_by_up_sets,
                                  enumerate_up_sets, is_increasing, is_up_set,
                                  leq, lift, num_ones, num_stars, parse_state,
                                  state_str, stochastic_dominance)


def chain(vals):
    return Poset(tuple((v,) for v in vals))


class TestLeq:
    def test_binary(self):
        assert leq((0, 1), (1, 1))
        assert not leq((1, 0), (0, 1))
        assert not leq((0, 1), (1, 0))

    def test_ternary_chain(self):
        # the ternary order places the wildcard on top: 0 < 1 < STAR
        assert leq((0, 1), (1, STAR))
        assert leq((1,), (STAR,))
        assert not leq((STAR,), (1,))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            leq((0,), (0, 1))

    def test_partial_order_axioms_exhaustive(self):
        elems = list(itertools.product((0, 1, STAR), repeat=2))
        for x in elems:
            assert leq(x, x)
            for y in elems:
                if leq(x, y) and leq(y, x):
                    assert x == y
                for z in elems:
                    if leq(x, y) and leq(y, z):
                        assert leq(x, z)


class TestStateStrings:
    def test_round_trip(self):
        for s in itertools.product((0, 1, STAR), repeat=3):
            assert parse_state(state_str(s)) == s

    def test_star_rendering(self):
        assert state_str((0, 1, STAR)) == "01*"


class TestIsIncreasing:
    def test_constant(self):
        p = chain((0, 1))
        assert is_increasing([5.0, 5.0], p) == (True, None)

    def test_up_set_indicator(self):
        p = Poset(tuple(itertools.product((0, 1), repeat=2)))
        for u in enumerate_up_sets(p):
            f = [1.0 if i in u else 0.0 for i in range(p.size)]
            assert is_increasing(f, p)[0]

    def test_violation_witness(self):
        p = chain((0, 1))
        ok, wit = is_increasing([1.0, 0.0], p)
        assert not ok and wit == (0, 1)


class TestUpSets:
    def test_two_chain(self):
        assert len(enumerate_up_sets(chain((0, 1)))) == 3

    def test_three_chain(self):
        assert len(enumerate_up_sets(chain((0, 1, STAR)))) == 4

    def test_square(self):
        p = Poset(tuple(itertools.product((0, 1), repeat=2)))
        assert len(enumerate_up_sets(p)) == 6

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_brute_force(self, n):
        elems = tuple(itertools.product((0, 1), repeat=n))
        p = Poset(elems)
        brute = 0
        for mask in range(2 ** len(elems)):
            members = frozenset(i for i in range(len(elems)) if mask >> i & 1)
            if is_up_set(p, members):
                brute += 1
        got = enumerate_up_sets(p)
        assert len(got) == brute
        assert len(set(got)) == len(got)
        for u in got:
            assert is_up_set(p, u)

    def test_element_guard(self):
        p = Poset(tuple((i,) for i in range(40)))
        with pytest.raises(ValueError, match="flow-based"):
            enumerate_up_sets(p, max_elements=32)


class TestLiftContract:
    def test_contract_rule(self):
        assert contract((STAR, 1, 0)) == (1, 1, 0)
        assert contract((0, 0)) == (0, 0)

    def test_zero_fixed(self):
        rng = np.random.default_rng(0)
        assert lift((0, 0, 0), 0.3, rng) == (0, 0, 0)

    def test_theta_range(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            lift((1,), 1.0, rng)

    def test_star_probability(self):
        rng = np.random.default_rng(1)
        n_star = sum(lift((1,), 0.25, rng) == (STAR,) for _ in range(20000))
        assert abs(n_star / 20000 - 0.75) < 0.02

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=8),
           st.floats(0.01, 0.99), st.integers(0, 2 ** 32 - 1))
    def test_contract_of_lift_is_identity(self, bits, theta, seed):
        x = tuple(bits)
        rng = np.random.default_rng(seed)
        assert contract(lift(x, theta, rng)) == x

    def test_counts(self):
        assert num_ones((0, 1, STAR, 1)) == 2
        assert num_stars((0, 1, STAR, 1)) == 1


class TestDominance:
    def test_single_variable(self):
        p = chain((0, 1))
        ok, _ = stochastic_dominance([0.5, 0.5], [0.3, 0.7], p)
        assert ok
        ok, wit = stochastic_dominance([0.3, 0.7], [0.5, 0.5], p)
        assert not ok
        assert wit == frozenset({1})

    def test_antichain_counterexample(self):
        p = Poset(tuple(itertools.product((0, 1), repeat=2)))
        nu = np.zeros(4)
        nu[p.index((0, 1))] = 0.5
        nu[p.index((1, 0))] = 0.5
        nup = np.zeros(4)
        nup[p.index((0, 0))] = 0.5
        nup[p.index((1, 1))] = 0.5
        ok, wit = stochastic_dominance(nu, nup, p)
        assert not ok
        # the witness up-set must separate the masses
        assert sum(nu[i] for i in wit) > sum(nup[i] for i in wit)

    def test_self_dominance(self):
        p = Poset(tuple(itertools.product((0, 1, STAR), repeat=2)))
        nu = np.random.default_rng(5).dirichlet(np.ones(p.size))
        assert stochastic_dominance(nu, nu, p)[0]

    def test_non_normalized_rejected(self):
        p = chain((0, 1))
        with pytest.raises(ValueError):
            stochastic_dominance([0.5, 0.6], [0.5, 0.5], p)

    def test_flow_agrees_with_up_sets(self, rng):
        p = Poset(tuple(itertools.product((0, 1, STAR), repeat=2)))
        for _ in range(300):
            nu = rng.dirichlet(np.ones(p.size) * rng.uniform(0.2, 2.0))
            nup = rng.dirichlet(np.ones(p.size) * rng.uniform(0.2, 2.0))
            a, wa = stochastic_dominance(nu, nup, p)
            b, _ = dominance_by_up_sets(nu, nup, p)
            assert a == b
            if not a:
                assert is_up_set(p, wa)
                assert sum(nu[i] for i in wa) > sum(nup[i] for i in wa)

    def test_transitivity_spot_check(self, rng):
        p = Poset(tuple(itertools.product((0, 1), repeat=3)))
        mono = sorted(p.elements, key=sum)
        found = 0
        for _ in range(500):
            raw = [rng.dirichlet(np.ones(p.size)) for _ in range(3)]
            # bias the three laws toward increasing mass up the order
            vs = []
            for j, r in enumerate(raw):
                w = r * np.array([(1 + j) ** sum(e) for e in p.elements])
                vs.append(w / w.sum())
            a, b, c = vs
            if (stochastic_dominance(a, b, p)[0]
                    and stochastic_dominance(b, c, p)[0]):
                found += 1
                assert stochastic_dominance(a, c, p)[0]
        assert found > 0
