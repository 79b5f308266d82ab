"""Dense simplex LP solver and the cone/ball l1 splitting solver."""
from .simplex import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgramStd,
    SolverReport,
    dump_lp,
    solve_lp,
)
from .splitting import cone_ball_violation, solve_cone_ball_l1
