"""cohap: offline hybrid conditional planning for collaborative assembly."""

from .adl import ParseError, parse_domain, pretty_print, validate
from .assembly import (AXES, AssemblyInstanceParams, bench_one, bench_sweep,
                       bench_workspace, default_instance, domain_text,
                       generate_instance, generate_instance_json, rows_to_csv,
                       sweep_params)
from .executor import (ExecutionError, ExecutionLog,
                       InteractiveOutcomeProvider, OutcomeProvider,
                       RandomOutcomeProvider, ScriptedOutcomeProvider,
                       prompt_text, run, serve_session)
from .feasibility import (FeasibilityOracle, Manipulator, Region, Workspace,
                          collision_free, load_workspace, reachable,
                          workspace_oracle)
from .grounding import BeliefState, GroundProblem, ground
from .instance import InstanceSpec, instance_to_json, parse_instance
from .planner import (Branch, PlannerConfig, SolveResult, Unsolvable,
                      expand_tree, plan_branch, solve)
from .plantree import (CSV_HEADER, Metrics, PlanTree, TreeNode, from_json,
                       metrics, replay_validate, to_dot, to_json)

__version__ = "0.1.0"

__all__ = [
    "ParseError", "parse_domain", "pretty_print", "validate",
    "AXES", "AssemblyInstanceParams", "bench_one", "bench_sweep",
    "bench_workspace", "default_instance", "domain_text",
    "generate_instance", "generate_instance_json", "rows_to_csv",
    "sweep_params",
    "ExecutionError", "ExecutionLog", "InteractiveOutcomeProvider",
    "OutcomeProvider", "RandomOutcomeProvider", "ScriptedOutcomeProvider",
    "prompt_text", "run", "serve_session",
    "FeasibilityOracle", "Manipulator", "Region", "Workspace",
    "collision_free", "load_workspace", "reachable", "workspace_oracle",
    "BeliefState", "GroundProblem", "ground",
    "InstanceSpec", "instance_to_json", "parse_instance",
    "Branch", "PlannerConfig", "SolveResult", "Unsolvable",
    "expand_tree", "plan_branch", "solve",
    "CSV_HEADER", "Metrics", "PlanTree", "TreeNode", "from_json",
    "metrics", "replay_validate", "to_dot", "to_json",
    "__version__",
]
