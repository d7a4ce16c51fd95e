"""Realize, verify and simulate weighted gossip processes with multiple consensus."""
from .estimator import GossipRealizer
from .exceptions import *  # noqa: F401,F403
from .graph import (
    DirectedCycle,
    Graph,
    check_simple,
    check_two_edge_connected,
    enumerate_cycles,
    node_coverage,
)
from .holonomy import (
    check_block_structure,
    cycle_matrix,
    transition_matrix,
    verify_holonomy,
    w_order,
)
from .partition import (
    IndexMap,
    IndexPartition,
    derived_graph,
    is_admissible,
    psi,
    realized_mixing_graph,
)
from .realization import (
    BetaPolicy,
    LocalMatrixSet,
    PermutationSpec,
    build_local_matrix,
    check_weights,
    default_betas,
    rate_matrix,
    realize_all,
)
from .simulation import (
    Scheduler,
    SimState,
    StopRule,
    cluster_spread,
    detect_limit_behavior,
    run,
    step,
)

__version__ = "0.1.0"
