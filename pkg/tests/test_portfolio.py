"""Portfolio execution and combination-optimizer behavior."""

import csv
import io
import random

import pytest

from rcc8.generator import GenSpec, generate
from rcc8.network import path_consistency
from rcc8.portfolio import (
    DEFAULT_PLAN_CONFIGS,
    CombinationResult,
    PortfolioPlan,
    RunRecord,
    collect_record,
    combination_csv,
    default_plan,
    first_response_table,
    optimize_combination,
    read_plan,
    read_records,
    run_portfolio,
    write_plan,
    write_records,
)
from rcc8.solver import (
    ALL_CONFIGS,
    BUDGET_EXHAUSTED,
    CONSISTENT,
    INCONSISTENT,
    HeuristicConfig,
    consistency,
)

DECISIVE = (CONSISTENT, INCONSISTENT)


def _record(instance_id, cap, overrides):
    """RunRecord over all twenty configs; unlisted configs exhaust at cap."""
    results = tuple(
        (cfg, *overrides.get(cfg, (BUDGET_EXHAUSTED, cap))) for cfg in ALL_CONFIGS
    )
    return RunRecord(instance_id=instance_id, cap=cap, results=results)


# ------------------------------------------------------------------- plans


def test_plan_requires_one_positive_budget_per_config():
    cfgs = (HeuristicConfig("H8", "dynamic", "local"),)
    with pytest.raises(ValueError):
        PortfolioPlan(cfgs, (10, 20))
    with pytest.raises(ValueError):
        PortfolioPlan((), ())
    with pytest.raises(ValueError):
        PortfolioPlan(cfgs, (0,))
    assert PortfolioPlan(cfgs, (10,)).total_budget == 10


def test_default_plan_members_and_budgets():
    plan = default_plan(500)
    assert plan.configs == DEFAULT_PLAN_CONFIGS
    assert plan.budgets == (1000, 1000, 1000, 1000)
    assert plan.total_budget == 4000
    assert default_plan(2).budgets == (4, 4, 4, 4)
    expected = (
        HeuristicConfig("H8", "dynamic", "local"),
        HeuristicConfig("H8", "static", "global"),
        HeuristicConfig("C8", "dynamic", "local"),
        HeuristicConfig("Bhat", "static", "local"),
    )
    assert plan.configs == expected
    with pytest.raises(ValueError):
        default_plan(1)


# ---------------------------------------------------------------- execution


def test_portfolio_answers_at_the_root_when_propagation_refutes(algebra):
    net, _ = generate(GenSpec("A", 10, 9.0, 2.0, 0), algebra)
    assert not path_consistency(net.copy(), algebra=algebra).ok
    outcome, responder, total = run_portfolio(net, default_plan(10), algebra=algebra)
    assert outcome.status == INCONSISTENT
    assert responder == DEFAULT_PLAN_CONFIGS[0]
    assert total == 1
    assert outcome.visited_nodes == 1


def test_portfolio_reports_exhaustion_when_no_member_is_decisive(algebra):
    net, _ = generate(GenSpec("A", 12, 6.0, 4.0, 1), algebra)
    assert path_consistency(net.copy(), algebra=algebra).ok
    plan = PortfolioPlan(DEFAULT_PLAN_CONFIGS, (1, 1, 1, 1))
    outcome, responder, total = run_portfolio(net, plan, algebra=algebra)
    assert outcome.status == BUDGET_EXHAUSTED
    assert responder is None
    assert total == 4  # every member spent its single node


def test_portfolio_stops_at_the_first_decisive_member(algebra):
    net, _ = generate(GenSpec("A", 12, 6.0, 4.0, 1), algebra)
    solo = consistency(net, DEFAULT_PLAN_CONFIGS[0], algebra=algebra)
    assert solo.status in DECISIVE
    plan = default_plan(12)
    outcome, responder, total = run_portfolio(net, plan, algebra=algebra)
    assert outcome.status == solo.status
    assert responder == DEFAULT_PLAN_CONFIGS[0]
    assert total == solo.visited_nodes <= plan.budgets[0]


def test_live_portfolio_matches_replay_from_records(algebra):
    """A plan's outcome is predictable from per-config records alone."""
    rng = random.Random(11)
    plans = [
        default_plan(10),
        PortfolioPlan(tuple(ALL_CONFIGS[:3]), (5, 40, 200)),
        PortfolioPlan((ALL_CONFIGS[7], ALL_CONFIGS[12]), (2, 150)),
    ]
    checked = 0
    for case in range(8):
        net, _ = generate(
            GenSpec("A", 10, rng.uniform(4.0, 8.0), 4.0, rng.randrange(2**32)),
            algebra,
        )
        record = collect_record(net, f"i{case}", cap=200, algebra=algebra).as_map()
        for plan in plans:
            # prediction: first member whose recorded run fits its budget
            want_status, want_responder, want_total = BUDGET_EXHAUSTED, None, 0
            for cfg, budget in zip(plan.configs, plan.budgets):
                status, nodes = record[cfg]
                if status in DECISIVE and nodes <= budget:
                    want_status, want_responder = status, cfg
                    want_total += nodes
                    break
                want_total += budget
            outcome, responder, total = run_portfolio(net, plan, algebra=algebra)
            assert outcome.status == want_status
            assert responder == want_responder
            assert total == want_total
            checked += 1
    assert checked == 24


def test_collect_record_covers_every_config_within_cap(algebra):
    net, _ = generate(GenSpec("A", 10, 5.0, 4.0, 7), algebra)
    rec = collect_record(net, "x", cap=50, algebra=algebra)
    assert rec.instance_id == "x"
    assert rec.cap == 50
    assert set(rec.as_map()) == set(ALL_CONFIGS)
    for _, status, nodes in rec.results:
        assert status in DECISIVE + (BUDGET_EXHAUSTED,)
        assert 1 <= nodes <= 50


# ------------------------------------------------------------------- files


def test_records_csv_round_trips(tmp_path, algebra):
    nets = [generate(GenSpec("A", 8, 4.0, 4.0, s), algebra)[0] for s in range(3)]
    records = tuple(
        collect_record(net, f"inst-{k}", cap=30, algebra=algebra)
        for k, net in enumerate(nets)
    )
    text = write_records(records)
    assert read_records(text) == records
    path = tmp_path / "records.csv"
    write_records(records, str(path))
    assert read_records(str(path)) == records
    header = text.splitlines()[0]
    assert header == "instance_id,split,order,scope,status,visited_nodes,cap"


def test_records_reader_rejects_bad_input():
    with pytest.raises(ValueError, match="header"):
        read_records("instance_id,split\na,b\n")
    good = write_records(
        [_record("a", 10, {}), _record("b", 10, {})]
    )
    # same instance id with two different caps
    tampered = good.replace("b,B,static,local,budget-exhausted,10,10",
                            "a,B,static,local,budget-exhausted,10,99")
    assert tampered != good
    with pytest.raises(ValueError, match="mixed caps"):
        read_records(tampered)


def test_plan_file_round_trips_and_reports_bad_lines(tmp_path):
    plan = PortfolioPlan(DEFAULT_PLAN_CONFIGS, (10, 20, 30, 40))
    text = write_plan(plan)
    assert read_plan(text) == plan
    path = tmp_path / "plan.txt"
    write_plan(plan, str(path))
    assert read_plan(str(path)) == plan
    commented = "# a comment\n\n" + text
    assert read_plan(commented) == plan
    with pytest.raises(ValueError, match="line 2"):
        read_plan("H8 dynamic local 10\nH8 static\n")
    with pytest.raises(ValueError):
        read_plan("H8 dynamic local notanumber\n")


# ------------------------------------------------------- first responders


def test_first_response_credits_the_fastest_and_all_ties():
    a, b = ALL_CONFIGS[0], ALL_CONFIGS[1]
    records = [
        _record("i0", 100, {a: (CONSISTENT, 3), b: (CONSISTENT, 9)}),
        _record("i1", 100, {a: (INCONSISTENT, 4), b: (INCONSISTENT, 9)}),
    ]
    table = first_response_table(records)
    assert table[a] == (1.0, 1.0)
    assert table[b] == (1.0, 0.0)
    # a tie credits both members, so the column sums past 100%
    tied = [_record("i0", 100, {a: (CONSISTENT, 5), b: (CONSISTENT, 5)})]
    table = first_response_table(tied)
    assert table[a] == (1.0, 1.0)
    assert table[b] == (1.0, 1.0)
    assert sum(first for _, first in table.values()) > 1.0


def test_first_response_requires_records():
    with pytest.raises(ValueError):
        first_response_table([])


def test_first_response_rejects_incomplete_records():
    partial = RunRecord(
        instance_id="p",
        cap=10,
        results=((ALL_CONFIGS[0], BUDGET_EXHAUSTED, 10),),
    )
    with pytest.raises(ValueError, match="lacks"):
        first_response_table([partial])


# ------------------------------------------------------------- optimizer


def test_optimizer_pairs_complementary_configs():
    a, b = ALL_CONFIGS[0], ALL_CONFIGS[1]
    records = [
        _record("i1", 100, {a: (CONSISTENT, 50)}),
        _record("i2", 100, {a: (CONSISTENT, 50)}),
        _record("i3", 100, {b: (CONSISTENT, 50)}),
    ]
    result = optimize_combination(records, 100)
    assert result.solved == 3
    assert set(result.chosen) == {a, b}
    # at half the budget no pair fits, and a alone solves two
    half = optimize_combination(records, 50)
    assert half.solved == 2
    assert half.chosen == (a,)


def test_optimizer_prefers_fewer_configs_on_ties():
    a, b = ALL_CONFIGS[0], ALL_CONFIGS[1]
    records = [
        _record("i1", 100, {a: (CONSISTENT, 10), b: (CONSISTENT, 10)}),
        _record("i2", 100, {a: (CONSISTENT, 10), b: (CONSISTENT, 10)}),
    ]
    result = optimize_combination(records, 100)
    assert result.solved == 2
    assert result.chosen == (a,)  # {a}, {b}, {a,b} tie; fewest, then first


def test_optimizer_solved_counts_are_monotone_in_budget():
    a, b, c = ALL_CONFIGS[0], ALL_CONFIGS[1], ALL_CONFIGS[2]
    records = [
        _record("i1", 400, {a: (CONSISTENT, 30)}),
        _record("i2", 400, {b: (INCONSISTENT, 90)}),
        _record("i3", 400, {c: (CONSISTENT, 200)}),
        _record("i4", 400, {a: (CONSISTENT, 400)}),
    ]
    ladder = (30, 60, 180, 400)
    result = optimize_combination(records, ladder)
    solved = [s for _, s, _ in result.table]
    assert solved == sorted(solved)
    assert [b_ for b_, _, _ in result.table] == list(ladder)
    assert result.solved == solved[-1]
    assert isinstance(result, CombinationResult)


def test_optimizer_dominance_over_single_members(algebra):
    """The best subset at T is at least as good as any single at T/|H|."""
    rng = random.Random(23)
    records = []
    for k in range(6):
        net, _ = generate(
            GenSpec("A", 9, rng.uniform(4.0, 7.5), 4.0, rng.randrange(2**32)),
            algebra,
        )
        records.append(collect_record(net, f"r{k}", cap=240, algebra=algebra))
    result = optimize_combination(records, 240)
    share = 240 // max(1, len(result.chosen))
    for cfg in ALL_CONFIGS:
        alone = sum(
            1
            for rec in records
            for c, status, nodes in rec.results
            if c == cfg and status in DECISIVE and nodes <= share
        )
        assert result.solved >= alone


def test_optimizer_validates_budgets_and_caps():
    records = [_record("i1", 80, {ALL_CONFIGS[0]: (CONSISTENT, 10)})]
    with pytest.raises(ValueError, match="capped below"):
        optimize_combination(records, 100)
    with pytest.raises(ValueError, match="positive"):
        optimize_combination(records, (0,))
    with pytest.raises(ValueError, match="positive"):
        optimize_combination(records, ())
    with pytest.raises(ValueError, match="no records"):
        optimize_combination([], 10)


def test_combination_csv_shape(tmp_path):
    a = ALL_CONFIGS[0]
    records = [_record("i1", 100, {a: (CONSISTENT, 10)})]
    result = optimize_combination(records, (50, 100))
    text = combination_csv(result)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["budget", "solved", "combination"]
    assert rows[1] == ["50", "1", a.label]
    assert rows[2] == ["100", "1", a.label]
    path = tmp_path / "combo.csv"
    combination_csv(result, str(path))
    assert path.read_text() == text
