"""SAT-based preimage attack on step-reduced MD4 with automatically chosen relaxation constraints."""

from .md4 import chaining_trace, md4_k
from .encoder import TemplateCnf, VariableMap, encode_template, substitute_hash
from .relaxation import (RHO_1, RHO_2, RHO_DE, RHO_DOBBERTIN, SwitchVector,
                         active_steps, build_constraint_family, lambda_to_assumptions,
                         parse_lambda)
from .propagation import MuObjective, PropagationResult, UnitPropagator, up_closure
from .solver import SolverVerdict, Status, make_adapter
from .tabu import SearchConfig, neighborhood, run_search, shortlist
from .attack import AttackResult, CampaignReport, attack, run_campaign

__version__ = "0.1.0"
