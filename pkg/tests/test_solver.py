"""Backtracking search: configs, selection heuristics, budgets, oracle
agreement."""

import random

import pytest

from oracle import brute_force_consistent
from rcc8.algebra import DC, EQ, TPP, UNIVERSAL, default_algebra
from rcc8.generator import GenSpec, generate
from rcc8.network import Network, path_consistency, read_instance
from rcc8.solver import (
    ALL_CONFIGS,
    BUDGET_EXHAUSTED,
    CONSISTENT,
    INCONSISTENT,
    HeuristicConfig,
    SolveOutcome,
    consistency,
    global_score,
    local_score,
    parse_config,
    select_constraint,
    static_order,
)
from rcc8.subclasses import split_set

H8_DYN_LOC = HeuristicConfig("H8", "dynamic", "local")


# ----------------------------------------------------------------- configs


def test_exactly_twenty_configs_with_unique_labels():
    assert len(ALL_CONFIGS) == 20
    labels = [cfg.label for cfg in ALL_CONFIGS]
    assert len(set(labels)) == 20
    splits = {cfg.split for cfg in ALL_CONFIGS}
    assert splits == {"B", "Bhat", "H8", "C8", "Q8"}


def test_config_labels_parse_back():
    for cfg in ALL_CONFIGS:
        assert parse_config(cfg.label) == cfg
    assert parse_config("H8/dynamic/local") == H8_DYN_LOC


def test_config_validation():
    for bad in (
        ("X8", "static", "local"),
        ("H8", "sometimes", "local"),
        ("H8", "static", "cosmic"),
    ):
        with pytest.raises(ValueError):
            HeuristicConfig(*bad)
    with pytest.raises(ValueError):
        parse_config("H8/static")


def test_outcome_is_frozen_and_reports_millis():
    out = SolveOutcome(
        status=CONSISTENT,
        visited_nodes=3,
        wall_time=0.25,
        heuristic=H8_DYN_LOC,
        budget=None,
    )
    assert out.millis == pytest.approx(250.0)
    with pytest.raises(AttributeError):
        out.visited_nodes = 5


# ------------------------------------------------------------------ scores


def test_local_score_prefers_small_decompositions_then_weight(algebra):
    split = split_set("H8", algebra)
    weights = algebra.exact_weights
    # find masks with decomposition sizes 2 and 3 and differing weights
    by_size = {2: [], 3: []}
    for mask in range(1, 256):
        size = len(split.decomposition(mask))
        if size in by_size:
            by_size[size].append(mask)
    assert by_size[2] and by_size[3]
    net = Network(3)
    net.set_edge(0, 1, by_size[3][0], algebra)
    net.set_edge(0, 2, by_size[2][0], algebra)
    s_three = local_score(net, (0, 1), split, weights)
    s_two = local_score(net, (0, 2), split, weights)
    assert s_two.decomposition_size == 2
    assert s_two.sort_key() < s_three.sort_key()

    light, heavy = sorted(by_size[2], key=lambda m: weights.weight(m))[:: len(by_size[2]) - 1]
    if weights.weight(light) != weights.weight(heavy):
        net.set_edge(0, 1, heavy, algebra)
        net.set_edge(0, 2, light, algebra)
        assert (
            local_score(net, (0, 2), split, weights).sort_key()
            < local_score(net, (0, 1), split, weights).sort_key()
        )


def test_member_relations_score_size_one_and_are_never_selected(algebra):
    split = split_set("H8", algebra)
    weights = algebra.exact_weights
    net = Network(3)
    member = sorted(m for m in split.members if m not in (0, UNIVERSAL))[0]
    net.set_edge(0, 1, member, algebra)
    assert local_score(net, (0, 1), split, weights).decomposition_size == 1
    cfg = HeuristicConfig("H8", "dynamic", "local")
    assert select_constraint(net, cfg, algebra=algebra) is None


def test_global_score_on_two_nodes_is_the_edge_weight(algebra):
    weights = algebra.exact_weights
    net = Network(2)
    net.set_edge(0, 1, TPP | DC, algebra)
    score = global_score(net, (0, 1), weights)
    assert score.neighborhood_sum == weights.weight(TPP | DC)


def test_global_score_with_universal_neighbors_is_weight_plus_offset(algebra):
    weights = algebra.exact_weights
    n = 5
    net = Network(n)
    net.set_edge(0, 1, TPP | DC, algebra)
    score = global_score(net, (0, 1), weights)
    assert score.neighborhood_sum == weights.weight(TPP | DC) + 32 * (n - 2)


def test_global_tie_breaks_lexicographically(algebra):
    # a 3-node network where every edge carries the same relation: all
    # neighborhood sums tie, so selection must fall back to edge order
    mask = UNIVERSAL - 1  # not in any tractable split, decomposes > 1
    net = Network(3)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        net.set_edge(i, j, mask, algebra)
    assert path_consistency(net, algebra).ok
    for split in ("H8", "C8", "Q8"):
        cfg = HeuristicConfig(split, "dynamic", "global")
        if len(split_set(split, algebra).decomposition(net.get(0, 1))) > 1:
            assert select_constraint(net, cfg, algebra=algebra) == (0, 1)


# --------------------------------------------------------------- selection


def _post_pc_instance(seed, n=12, d=6.0, model="A"):
    # deterministic scan to the first PC-consistent instance at this seed
    for offset in range(100):
        net, _ = generate(GenSpec(model, n, d, 4.0, seed + offset))
        if path_consistency(net).ok:
            return net
    raise AssertionError("no path-consistent instance found")


def test_static_order_is_deterministic_and_covers_all_pairs(algebra):
    net = _post_pc_instance(0)
    for cfg in (
        HeuristicConfig("H8", "static", "local"),
        HeuristicConfig("H8", "static", "global"),
    ):
        first = static_order(net, cfg, algebra)
        second = static_order(net, cfg, algebra)
        assert first == second
        assert len(first) == net.n * (net.n - 1) // 2
        assert len(set(first)) == len(first)


def test_static_selection_skips_edges_that_fell_into_the_split(algebra):
    cfg = HeuristicConfig("H8", "static", "local")
    split = split_set("H8", algebra)
    net = _post_pc_instance(1)
    order = static_order(net, cfg, algebra)
    edge = select_constraint(net, cfg, order_cache=order, algebra=algebra)
    assert edge is not None
    i, j = edge
    assert len(split.decomposition(net.get(i, j))) > 1
    # force that edge into the split set; selection must move on
    part = split.decomposition(net.get(i, j))[0]
    net.set_edge(i, j, part, algebra)
    bumped = select_constraint(net, cfg, order_cache=order, algebra=algebra)
    assert bumped != edge


def test_dynamic_selection_reacts_to_tightening(algebra):
    cfg = HeuristicConfig("H8", "dynamic", "local")
    split = split_set("H8", algebra)
    rng = random.Random(2)
    seen_change = False
    for seed in range(40):
        net = _post_pc_instance(seed, n=8, d=5.0)
        before = select_constraint(net, cfg, algebra=algebra)
        if before is None:
            continue
        # tighten the selected edge into the split set
        part = split.decomposition(net.get(*before))[rng.randrange(
            len(split.decomposition(net.get(*before)))
        )]
        net.set_edge(*before, part, algebra)
        after = select_constraint(net, cfg, algebra=algebra)
        if after != before:
            seen_change = True
            break
    assert seen_change


def test_selection_returns_none_only_at_split_leaves(algebra):
    cfg = HeuristicConfig("Q8", "dynamic", "local")
    split = split_set("Q8", algebra)
    net = _post_pc_instance(3, n=10, d=5.0)
    edge = select_constraint(net, cfg, algebra=algebra)
    if edge is None:
        for i, j in net.nonuniversal_edges():
            assert net.get(i, j) in split.members


# ------------------------------------------------------------- consistency


def test_all_universal_network_solves_in_one_node(algebra):
    for split in ("H8", "C8", "Q8", "Bhat"):
        cfg = HeuristicConfig(split, "static", "local")
        out = consistency(Network(6), cfg, algebra=algebra)
        assert out.status == CONSISTENT
        assert out.visited_nodes == 1


def test_failing_triangle_is_inconsistent_at_the_root(algebra):
    net = Network(3)
    net.set_edge(0, 1, TPP)
    net.set_edge(1, 2, TPP)
    net.set_edge(0, 2, DC)
    out = consistency(net, H8_DYN_LOC, algebra=algebra)
    assert out.status == INCONSISTENT
    assert out.visited_nodes == 1


def test_solver_does_not_mutate_the_input_network(algebra):
    net, _ = generate(GenSpec("A", 10, 5.0, 4.0, 17))
    snapshot = net.m[:]
    consistency(net, H8_DYN_LOC, algebra=algebra)
    assert net.m == snapshot


def test_all_twenty_configs_agree_with_the_oracle(algebra):
    rng = random.Random(4)
    sat = unsat = 0
    for case in range(60):
        n = rng.randint(4, 6)
        # mix loose labels (mostly satisfiable) with tight dense draws
        # (mostly inconsistent) so both answers are exercised
        if case % 2:
            model, l, d = "A", 4.0, rng.uniform(2.0, n - 1.0)
        elif case % 4 == 0:
            model, l, d = "A", rng.uniform(1.0, 2.5), float(n - 1)
        else:
            model, l, d = "H", rng.uniform(2.0, 4.0), float(n - 1)
        net, _ = generate(GenSpec(model, n, d, l, rng.randrange(2**32)))
        truth = brute_force_consistent(net, algebra)
        sat += truth
        unsat += not truth
        for cfg in ALL_CONFIGS:
            out = consistency(net.copy(), cfg, algebra=algebra)
            expected = CONSISTENT if truth else INCONSISTENT
            assert out.status == expected, (case, cfg.label)
            assert out.visited_nodes >= 1
    assert sat and unsat


def test_node_counts_are_deterministic(algebra):
    for seed in range(5):
        net, _ = generate(GenSpec("A", 15, 8.0, 4.0, seed))
        for cfg in (H8_DYN_LOC, HeuristicConfig("Bhat", "static", "global")):
            a = consistency(net.copy(), cfg, algebra=algebra)
            b = consistency(net.copy(), cfg, algebra=algebra)
            assert a.status == b.status
            assert a.visited_nodes == b.visited_nodes


def test_budget_semantics(algebra):
    # find an instance needing several nodes, then cap below that
    for seed in range(30):
        net, _ = generate(GenSpec("A", 15, 9.0, 4.0, seed))
        full = consistency(net.copy(), H8_DYN_LOC, algebra=algebra)
        if full.visited_nodes >= 5:
            break
    else:
        pytest.skip("no multi-node instance found")
    for budget in (1, 2, full.visited_nodes - 1):
        capped = consistency(net.copy(), H8_DYN_LOC, budget=budget, algebra=algebra)
        assert capped.status == BUDGET_EXHAUSTED
        assert capped.visited_nodes == budget
        assert capped.budget == budget
    exact = consistency(
        net.copy(), H8_DYN_LOC, budget=full.visited_nodes, algebra=algebra
    )
    assert exact.status == full.status
    assert exact.visited_nodes == full.visited_nodes


def test_zero_budget_exhausts_before_the_root(algebra):
    out = consistency(Network(4), H8_DYN_LOC, budget=0, algebra=algebra)
    assert out.status == BUDGET_EXHAUSTED
    assert out.visited_nodes == 0


def test_budget_never_exceeded_across_sample(algebra):
    rng = random.Random(5)
    exhausted = 0
    for _ in range(40):
        net, _ = generate(
            GenSpec("H", 12, 6.0, 4.0, rng.randrange(2**32))
        )
        budget = rng.randint(1, 12)
        out = consistency(net.copy(), H8_DYN_LOC, budget=budget, algebra=algebra)
        assert out.visited_nodes <= budget
        exhausted += out.status == BUDGET_EXHAUSTED
    assert exhausted  # the cap must actually bind somewhere in the sample


def test_consistent_refinement_is_a_split_leaf(algebra):
    # on success the refined network must be path-consistent, inside the
    # split set edge-wise, and a subset of the original constraints
    rng = random.Random(6)
    checked = 0
    for _ in range(40):
        net, _ = generate(GenSpec("A", 8, 4.5, 4.0, rng.randrange(2**32)))
        for cfg in (
            H8_DYN_LOC,
            HeuristicConfig("B", "static", "local"),
            HeuristicConfig("C8", "dynamic", "global"),
        ):
            out = consistency(net.copy(), cfg, algebra=algebra)
            if out.status != CONSISTENT:
                continue
            assert out.refinement is not None
            checked += 1
            members = split_set(cfg.split, algebra).members
            refined = out.refinement
            n = refined.n
            for i in range(n):
                for j in range(i + 1, n):
                    mask = refined.get(i, j)
                    assert mask in members
                    assert mask & ~net.get(i, j) == 0
            rerun = path_consistency(refined.copy(), algebra)
            assert rerun.ok and rerun.revisions == 0
    assert checked > 20


def test_outcomes_record_config_and_wall_time(algebra):
    net, _ = generate(GenSpec("A", 10, 5.0, 4.0, 3))
    out = consistency(net, H8_DYN_LOC, budget=50, algebra=algebra)
    assert out.heuristic == H8_DYN_LOC
    assert out.budget == 50
    assert out.wall_time >= 0.0


def test_every_config_refutes_the_stored_propagation_blind_spot(algebra):
    """Search closes the gap on the witness that propagation accepts."""
    import pathlib

    path = pathlib.Path(__file__).parent / "data" / "witness-pc-incomplete.txt"
    net, _ = read_instance(str(path))
    assert path_consistency(net.copy(), algebra=algebra).ok
    for cfg in ALL_CONFIGS:
        out = consistency(net, cfg, algebra=algebra)
        assert out.status == INCONSISTENT, cfg.label
        assert out.visited_nodes >= 1
        assert out.refinement is None  # no model to return
