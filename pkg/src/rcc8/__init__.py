"""RCC-8 qualitative spatial constraint solving and experiments.

Layers, bottom to top: algebra (relations, composition, weights);
subclasses (tractable subsets and decompositions); network (matrices
and path consistency); generator (random models A/H and flaw
analysis); solver (backtracking search over split sets); portfolio
(heuristic combination); harness (sweeps, hard sets, reports).
"""

from .algebra import (BASE_NAMES, DC, EC, EQ, EMPTY, NTPP, NTPPI, PO, TPP,
                      TPPI, UNIVERSAL, Algebra, CompositionTableError,
                      WeightTable, default_algebra, format_relation,
                      iter_bases, load_algebra, parse_relation)
from .generator import (FlawReport, GenSpec, count_inconsistent_triples,
                        expected_connected_triples,
                        expected_inconsistent_triples, flaw_report, generate,
                        inconsistency_probability, sample_label,
                        solve_degree_threshold)
from .harness import (DataPoint, HardSet, SweepConfig, collect_hard,
                      crossover_degree, degree_grid, hard_manifest_csv,
                      instance_seed, percentile, read_sweep_csv, report,
                      strip_timing_columns, sweep, sweep_csv)
from .network import (DISCIPLINES, InstanceFormatError, Network, PcResult,
                      incremental_path_consistency, path_consistency,
                      read_instance, revise, undo_trail, write_instance)
from .portfolio import (CombinationResult, PortfolioPlan, RunRecord,
                        collect_record, combination_csv, default_plan,
                        first_response_table, optimize_combination,
                        read_plan, read_records, run_portfolio, write_plan,
                        write_records)
from .solver import (ALL_CONFIGS, BUDGET_EXHAUSTED, CONSISTENT, INCONSISTENT,
                     ConstrainednessScore, HeuristicConfig, SolveOutcome,
                     consistency, global_score, local_score, parse_config,
                     select_constraint, static_order)
from .subclasses import (SPLIT_NAMES, SplitSet, base_closure, closure,
                         in_c8, in_h8, in_np8, in_q8, membership, split_set,
                         subset_report)

__version__ = "0.1.0"
