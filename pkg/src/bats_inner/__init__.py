"""Inner-code analysis and recoding-policy optimization for BATS codes on lossy line networks."""
from ._backend import BACKEND
from .analytics import (PathProfile, average_rank, efficiency, expected_packets, propagate,
                        sink_average_rank, total_transmissions)
from .bound import BoundResult, pu_objective, reg_inc_beta, solve_upper_bound
from .optimize import SolveReport, solve_centralized, solve_pa, solve_ps
from .sim import SimConfig, SimReport, run_simulation
from .tables import (CompressedTable, EpsGrid, LookupTable, build_clt, compress_table, load_table,
                     query_table, refine_table, save_table)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "PathProfile", "average_rank", "efficiency", "expected_packets", "propagate",
    "sink_average_rank", "total_transmissions", "BoundResult", "pu_objective", "reg_inc_beta",
    "solve_upper_bound", "SolveReport", "solve_centralized", "solve_pa", "solve_ps", "SimConfig",
    "SimReport", "run_simulation", "CompressedTable", "EpsGrid", "LookupTable", "build_clt",
    "compress_table", "load_table", "query_table", "refine_table", "save_table", "__version__",
]
