"""Stable, legal, and efficiency-adjusted assignments for school choice.

The package solves one-to-many bipartite markets with strict preferences.
Entry points by module:

  model          instances, assignments, blocking pairs, the seat reduction
  gs             deferred acceptance (event-driven and round-traced)
  rotations      exposed rotations, rotation digraphs, elimination
  rotate_remove  linear-time walks to the legal optima and the legal subgraph
  eadam          priority waiving with consent, three equivalent mechanisms
  oracle         brute-force enumeration of stable and legal sets
  latin          markets whose mutual ranks form a Latin square
  benchgen       random market generators and the benchmark harness
  cli            the `legalassign` command
"""

from pathlib import Path

from .benchgen import (BenchError, BenchRecord, EqualityViolation, GenConfig,
                       MechanismTimeout, PlanCell, generate, run_bench,
                       sample_consent, write_csv)
from .eadam import (ConsentSet, EadamResult, is_constrained_efficient,
                    kesten_eadam, rotate_remove_consent, simplified_eadam,
                    underdemanded_schools)
from .engine import EngineCounters, EngineRun, school_side_run, student_side_run
from .gs import (GSCounters, GSResult, TracedGS, gs_school, gs_student,
                 gs_student_traced, interrupting_pairs)
from .latin import (LatinSquare, auxiliary_instance, diagonal_matching,
                    format_latin, instance_from_latin, latin_check, latin_stable,
                    parse_latin, ranking_matrix, xor_latin)
from .model import (Assignment, Instance, InvalidInstanceError, OneToOneReduction,
                    ParseError, UnstableAssignmentError, blocking_pairs, blocks,
                    dominates, is_blocking_pair, is_stable, parse_instance,
                    reduce_one_to_one)
from .oracle import (OracleCapError, blocking_digraph, enumerate_assignments,
                     enumerate_stable, legal_edges_brute, legal_fixed_point,
                     verify_legal_property)
from .rotate_remove import (LegalSubinstanceReport, legal_subinstance,
                            rotate_remove, school_optimal_legal, stable_edges,
                            student_optimal_legal)
from .rotations import (Rotation, RotationDigraph, all_rotations,
                        build_rotation_digraph, eliminate, exposed_rotations,
                        next_agent, sigma, sigma_inverse, successor)

__version__ = "0.1.0"


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled example file (ex1.inst ... ex9.matrix)."""
    return Path(__file__).with_name("fixtures") / name
