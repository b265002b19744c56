import numpy as np
import pytest
from hypothesis import given, strategies as st

import famdp
from famdp.core import ActuatorSet, Policy, TransitionKernel, validate

from conftest import make_famdp


def tiny(discount=0.5, rho=0.5, t_loop=1.0):
    return make_famdp(
        1, ((0,),),
        {(0, 0): {0: t_loop}}, {(0, 0): {0: 1.0}},
        [[1.0]], [[rho]], discount)


class TestValidate:
    def test_valid_instance_empty_report(self):
        assert validate(tiny()) == []

    def test_bad_row_sum_names_the_row(self):
        bad = tiny(t_loop=0.9)
        report = validate(bad)
        assert any(v.code == "nominal-row-sum" and v.state == 0 and v.control == 0
                   for v in report)

    def test_discount_one_with_full_reliability_rejected(self):
        report = validate(tiny(discount=1.0, rho=1.0))
        assert any(v.code == "discount-reliability" for v in report)

    def test_discount_one_with_fallible_actuator_ok(self):
        assert validate(tiny(discount=1.0, rho=0.9)) == []

    def test_reliability_out_of_range(self):
        report = validate(tiny(rho=1.5))
        assert any(v.code == "reliability-range" for v in report)

    def test_missing_row_for_admissible_pair(self):
        f = make_famdp(
            2, ((0,),),
            {(0, 0): {1: 1.0}},  # no row for state 1
            {(0, 0): {0: 1.0}, (1, 0): {1: 1.0}},
            [[0.0], [1.0]], [[0.5], [1.0]], 0.5)
        report = validate(f)
        assert any(v.code == "nominal-missing-row" and v.state == 1 for v in report)

    def test_mixture_rows_sum_to_one(self, bridge):
        # rho * sum(T) + (1 - rho) * sum(F) must be 1 for admissible pairs
        for s in range(bridge.num_states):
            for u in bridge.admissible_at(s):
                rho = bridge.reliability[s, u]
                _, pt = bridge.nominal.row(s, u)
                _, pf = bridge.malfunction.row(s, u)
                total = rho * pt.sum() + (1 - rho) * pf.sum()
                assert abs(total - 1.0) <= 2e-9


class TestReliabilityProfile:
    def test_uniform(self):
        f = make_famdp(
            1, ((0,), (1,)),
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            [[1.0, 1.0]], [[0.9, 0.9]], 0.5)
        prof = famdp.reliability_profile(f)
        assert prof.rho_max_k == (0.9, 0.9)
        assert prof.rho_min_k == (0.9, 0.9)
        assert prof.rho_max == 0.9

    def test_max_across_actuators(self):
        f = make_famdp(
            1, ((0,), (1,)),
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            [[1.0, 1.0]], [[0.8, 0.99]], 0.5)
        assert famdp.reliability_profile(f).rho_max == 0.99

    def test_single_shot_actuators(self):
        prof = famdp.reliability_profile(tiny(rho=0.0))
        assert prof.rho_max == 0.0

    def test_invariant_under_state_permutation(self, bridge):
        prof = famdp.reliability_profile(bridge)
        # permute states by rebuilding with shuffled state indices
        n = bridge.num_states
        perm = np.random.Generator(np.random.PCG64(5)).permutation(n)
        remap = {s: int(perm[s]) for s in range(n)}
        def remap_kernel(kernel):
            rows = {}
            for (s, u), (idx, p) in kernel.items():
                rows[(remap[s], u)] = dict(zip((remap[i] for i in idx.tolist()), p.tolist()))
            return rows
        inv = np.argsort(perm)
        shuffled = make_famdp(
            n, bridge.control_sets,
            remap_kernel(bridge.nominal), remap_kernel(bridge.malfunction),
            bridge.reward[inv][:, :], bridge.reliability[inv][:, :],
            bridge.discount,
            admissible=tuple(bridge.admissible_at(int(s)) for s in inv))
        assert famdp.reliability_profile(shuffled) == prof


class TestAdmissibleControls:
    def test_all_permissive_full_set(self):
        f = make_famdp(
            1, ((0,), (1,)),
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}},
            [[1.0, 1.0]], [[0.9, 0.9]], 0.5)
        assert famdp.admissible_controls(f, 0, ActuatorSet.full(2)) == (0, 1)

    def test_empty_operative_set(self, bridge):
        assert famdp.admissible_controls(bridge, 0, 0) == ()

    def test_bridge_cell_with_tracks_only_is_stranded(self, bridge):
        # (4, 2) is the bridge: wheels only; tracks alone leave nothing
        s = 2 * 6 + 4
        tracks_only = ActuatorSet.of([1], 2)
        assert famdp.admissible_controls(bridge, s, tracks_only) == ()
        wheels_only = ActuatorSet.of([0], 2)
        assert famdp.admissible_controls(bridge, s, wheels_only) != ()

    @given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 35))
    def test_monotone_in_operative_set(self, a, b, s):
        f = _BRIDGE
        sub = a & b
        sup = a | b
        small = set(famdp.admissible_controls(f, s, sub))
        big = set(famdp.admissible_controls(f, s, sup))
        assert small <= big


_BRIDGE = famdp.build_gridworld(famdp.load_scenario("bridge6x6"))


class TestActuatorSet:
    def test_basic_ops(self):
        full = ActuatorSet.full(3)
        assert full.cardinality == 3
        dropped = full.remove(1)
        assert dropped.members() == (0, 2)
        assert dropped.issubset(full) and not full.issubset(dropped)

    def test_remove_absent_raises(self):
        with pytest.raises(ValueError):
            ActuatorSet.empty(2).remove(0)

    @given(st.integers(1, 10), st.data())
    def test_mask_roundtrip(self, width, data):
        mask = data.draw(st.integers(0, (1 << width) - 1))
        s = ActuatorSet(mask, width)
        assert ActuatorSet.of(s.members(), width) == s
        assert len(s) == bin(mask).count("1")


class TestPolicy:
    def test_records_roundtrip(self):
        p = Policy(2)
        p.set(0, 3, 1)
        p.set(5, 1, 0)
        q = Policy.from_records(2, p.to_records())
        assert q == p
        assert q.control(0, ActuatorSet.full(2)) == 1
        assert q.control(4, 3) is None


class TestKernel:
    def test_records_roundtrip(self):
        k = TransitionKernel.from_records([[0, 0, 1, 0.25], [0, 0, 0, 0.75]], 2, 1)
        idx, p = k.row(0, 0)
        assert idx.tolist() == [0, 1] and p.tolist() == [0.75, 0.25]
        assert TransitionKernel.from_records(k.to_records(), 2, 1).to_records() == k.to_records()
