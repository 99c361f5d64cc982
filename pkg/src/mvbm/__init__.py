"""Mechanisms for maximum vertex-weighted bipartite b-matching and their strategic analysis."""

from .engine import AugmentingPath, SearchKind, apply_path, find_augmenting_path, solve
from .fixtures import fixture, fixture_ids, random_instance
from .instance import (EnumerationCapExceeded, Instance, InstanceError, Matching, Mode, Report,
                       ReportError, UtilityVector, dump_instance, load_instance, utilities,
                       validate_report)
from .mechanisms import Mechanism, MechanismKind, Outcome, best_single_edge_hide, run
from .oracle import brute_force_mvbm, exhaustive_instance_sweep
from .strategy import (best_response, check_group_sp, check_truthfulness,
                       classify_truthful_inputs, empirical_poa_pos, enumerate_equilibria,
                       fcfs_policies, fcfs_profile, verify_nash)

__version__ = "0.1.0"
