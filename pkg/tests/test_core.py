import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsched.core import (Instance, InstanceError, Job, Schedule, ScheduleError, SizeError,
                          brute_force_opt, dp_opt, evaluate, format_instance, parse_instance,
                          read_instance, sequence_cost, smith_schedule, write_instance)
from conftest import fixture, random_instance


def test_order_example_costs_are_exact():
    # i(4,1) j(8,1.5) k(1,0); positions i=0, j=1, k=2
    p, w = [4.0, 8.0, 1.0], [1.0, 1.5, 0.0]
    assert sequence_cost([0, 2, 1], p, w, 2.0) == 269.5
    assert sequence_cost([1, 2, 0], p, w, 2.0) == 265.0


def test_order_example_optimum_places_i_before_j():
    inst = fixture("order_example")
    sched, cost = brute_force_opt(inst, 2.0)
    assert sched.order == (0, 2, 1)
    assert cost == pytest.approx(277.0, rel=1e-12)
    assert evaluate([1, 2, 0], inst, 2.0) == pytest.approx(289.3, rel=1e-12)


def test_single_job_cost():
    inst = Instance.from_pairs([(3.0, 2.0)])
    assert evaluate([0], inst, 1.0) == 6.0
    assert smith_schedule(inst).order == (0,)
    sched, cost = brute_force_opt(inst, 1.7)
    assert sched.order == (0,) and cost == pytest.approx(2.0 * 3.0 ** 1.7)
    assert dp_opt(inst, 1.7) == pytest.approx(cost)


def test_smith_two_jobs():
    inst = Instance.from_pairs([(1.0, 2.0), (2.0, 1.0)])
    assert smith_schedule(inst).order == (0, 1)
    assert evaluate(smith_schedule(inst), inst, 1.0) == 5.0
    assert evaluate([1, 0], inst, 1.0) == 8.0


def test_schedule_completions():
    inst = Instance.from_pairs([(2.0, 1.0), (3.0, 1.0), (5.0, 1.0)])
    s = Schedule.of([2, 0, 1], inst)
    assert s.completions == (7.0, 10.0, 5.0)


@pytest.mark.parametrize("order", [[0, 0, 1], [0, 1], [0, 1, 3]])
def test_bad_orders_rejected(order):
    inst = Instance.from_pairs([(2.0, 1.0), (3.0, 1.0), (5.0, 1.0)])
    with pytest.raises(ScheduleError):
        evaluate(order, inst, 2.0)


@pytest.mark.parametrize("pairs", [
    [],
    [(1.0, 0.0)],
    [(0.0, 1.0)],
    [(-1.0, 1.0)],
    [(1.0, math.inf)],
    [(1.0, 2.0), (2.0, 4.0)],
])
def test_invalid_instances_rejected(pairs):
    with pytest.raises(InstanceError):
        Instance.from_pairs(pairs)


def test_ids_must_be_dense():
    with pytest.raises(InstanceError):
        Instance((Job(1, 1.0, 1.0),))


def test_tied_smith_ratios_rejected_from_file():
    text = "# nlsched-instance v1\n0,10,5\n1,8,4\n"
    with pytest.raises(InstanceError, match="Smith ratio"):
        parse_instance(text)


def test_size_guards():
    big = random_instance(random.Random(1), 11)
    with pytest.raises(SizeError):
        brute_force_opt(big, 2.0)
    huge = random_instance(random.Random(1), 25)
    with pytest.raises(SizeError):
        dp_opt(huge, 2.0)


def test_instance_roundtrip(tmp_path):
    inst = random_instance(random.Random(3), 7, name="sets/demo")
    inst = Instance(inst.jobs, "demo", {"sigma": "0.3", "labels": "a b c d e f g"})
    path = write_instance(inst, tmp_path / "x" / "demo.inst")
    back = read_instance(path)
    assert back == inst
    assert back.meta == inst.meta
    assert back.labels() == list("abcdefg")
    assert format_instance(back) == format_instance(inst)


@pytest.mark.parametrize("text", [
    "0,1,1\n",
    "# nlsched-instance v1\n0,1\n",
    "# nlsched-instance v1\n0,a,1\n",
])
def test_malformed_files(text):
    with pytest.raises(InstanceError):
        parse_instance(text)


def test_dp_and_brute_force_agree():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(1, 8)
        beta = rng.choice([0.5, 0.8, 1.0, 1.1, 2.0, 3.2])
        inst = random_instance(rng, n)
        sched, cost = brute_force_opt(inst, beta)
        assert evaluate(sched, inst, beta) == cost
        assert dp_opt(inst, beta) == pytest.approx(cost, rel=1e-12)


def test_brute_force_tie_break_is_lexicographic():
    # at beta=2, (1,5) and (2,8) cost 77 in both orders
    for pairs in ([(1.0, 5.0), (2.0, 8.0)], [(2.0, 8.0), (1.0, 5.0)]):
        inst = Instance.from_pairs(pairs)
        assert evaluate([0, 1], inst, 2.0) == evaluate([1, 0], inst, 2.0) == 77.0
        assert brute_force_opt(inst, 2.0)[0].order == (0, 1)


def test_dp_beta_one_equals_smith():
    rng = random.Random(5)
    for _ in range(30):
        inst = random_instance(rng, rng.randint(1, 12))
        assert dp_opt(inst, 1.0) == pytest.approx(evaluate(smith_schedule(inst), inst, 1.0),
                                                  rel=1e-12)


pairs_st = st.lists(
    st.tuples(st.integers(1, 100), st.floats(0.01, 100.0, allow_nan=False)),
    min_size=1, max_size=6,
).filter(lambda ps: len({w / p for p, w in ps}) == len(ps))


@given(pairs_st, st.sampled_from([0.5, 1.0, 2.0, 3.2]), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_relabeling_invariance(pairs, beta, rnd):
    inst = Instance.from_pairs(pairs)
    perm = list(range(len(pairs)))
    rnd.shuffle(perm)
    relabeled = Instance.from_pairs([pairs[k] for k in perm])
    order = list(range(len(pairs)))
    rnd.shuffle(order)
    # job perm[k] of inst is job k of relabeled
    inv = {old: new for new, old in enumerate(perm)}
    assert evaluate(order, inst, beta) == pytest.approx(
        evaluate([inv[k] for k in order], relabeled, beta), rel=1e-12)


@given(pairs_st, st.sampled_from([0.5, 1.3, 2.0, 3.2]), st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_scaling_keeps_argmin(pairs, beta, c):
    inst = Instance.from_pairs(pairs)
    sched, cost = brute_force_opt(inst, beta)
    p_scaled = Instance.from_pairs([(p * c, w) for p, w in pairs])
    w_scaled = Instance.from_pairs([(p, w * c) for p, w in pairs])
    for other, factor in ((p_scaled, c ** beta), (w_scaled, c)):
        o_sched, o_cost = brute_force_opt(other, beta)
        assert o_cost == pytest.approx(cost * factor, rel=1e-9)
        # argmin may only differ when two orders are tied within rounding
        assert evaluate(sched, other, beta) == pytest.approx(o_cost, rel=1e-9)


def test_all_permutations_cover_brute_force():
    inst = random_instance(random.Random(8), 5)
    best = min(evaluate(o, inst, 2.0) for o in itertools.permutations(range(5)))
    assert brute_force_opt(inst, 2.0)[1] == best
