"""Majority dynamics on odd-degree graphs: simulation, Lyapunov functionals,
flip bounds and information retention."""

from .dynamics import (
    AsyncSchedule,
    Trajectory,
    count_flips,
    flip_counts,
    light_cone,
    limit_opinions,
    run_async,
    run_async_until_stable,
    run_sync_until_cycle,
    sample_async_schedule,
    step_sync,
)
from .errors import MajDynError, TheoremViolation, ValidationError
from .graph import (
    Graph,
    build_graph,
    complete_bipartite,
    cycle_graph,
    gen_gadget_graph,
    gen_lattice_family,
    gen_percolation_subgraph,
    gen_random_odd_graph,
    growth_moment,
    normalize_odd_degrees,
    path_graph,
    torus_graph,
    tree_ball,
    triangle_with_loops,
)
from .kernels import BACKEND
from .lyapunov import (
    EdgeWeighting,
    check_d_legal,
    drop_J,
    energy_report,
    flip_bound,
    lyapunov_L,
    make_weighting,
    monopoly_flip_budget,
)
from .retention import (
    Estimator,
    EstimatorResult,
    causal_radius,
    exact_delta,
    greedy_disjoint_balls,
    monte_carlo_delta,
    sample_world,
    select_W,
)

__version__ = "0.1.0"
