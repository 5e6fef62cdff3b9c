"""Built-in demo: a five-aircraft VTOL formation under two alternating topologies.

The agent model is the classic linearized VTOL helicopter at the 135 kt
flight condition (states: horizontal velocity, vertical velocity, pitch rate,
pitch angle; inputs: collective and longitudinal cyclic).  The open loop is
unstable, which makes the formation a meaningful stress test: consensus must
come entirely from the coupling.

Two communication graphs alternate, modelling an unreliable 5 -> 4 link:
graph 1 is a chain rooted at aircraft 1, graph 2 re-routes through aircraft 2
as the temporary formation leader.  The graphs ship as data files; see
``data/vtol_graph_*.json``.

``REFERENCE`` holds the published solution of the same design inequalities
for comparison.  Those inequalities do not have unique solutions, so the
values computed here legitimately differ; they are reported side by side and
never asserted against each other.
"""

import json
from importlib import resources

import numpy as np

from . import topology

A = np.array(
    [
        [-0.0366, 0.0271, 0.0188, -0.4555],
        [0.0482, -1.01, 0.0024, -4.0208],
        [0.1002, 0.3681, -0.707, 1.420],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

B = np.array(
    [
        [0.4422, 0.1761],
        [3.5446, -7.5922],
        [-5.52, 4.49],
        [0.0, 0.0],
    ]
)

# Published gain for this benchmark (one feasible solution among many).
K_PUBLISHED = np.array(
    [
        [5.8206, 0.2978, -0.2615, -2.7967],
        [-1.1646, -0.4522, 0.0530, 2.0420],
    ]
)

# Published values for the same design, computed with a different inequality
# solver.  Comparison only: the certificates are not unique.
REFERENCE = {
    "lambda_max": 3.3225,
    "dwell_threshold": 0.4002,
    "alpha_min": 8.0,
}

BETA = 3.0
C_VALUE = 0.25
ALPHA = 8.1
DWELL = 0.5
HORIZON = 10.0
DT = 0.01
SEED = 12345
TOLERANCE = 1e-2
WINDOW = 2.0


def load_graphs():
    """The two demo topologies, read from the packaged data files."""
    graphs = []
    for name in ("vtol_graph_1.json", "vtol_graph_2.json"):
        with resources.files("switched_consensus.data").joinpath(name).open() as fh:
            graphs.append(topology.graph_from_dict(json.load(fh)))
    return topology.GraphSet(tuple(graphs))


def demo_config():
    """Demo run configuration as a plain config document."""
    graphs = load_graphs()
    return {
        "schema_version": 1,
        "system": {"a": A.tolist(), "b": B.tolist()},
        "graphs": [topology.graph_to_dict(g) for g in graphs],
        "switching": {"periodic": {"dwell": DWELL, "horizon": HORIZON}},
        "synthesis": {
            "beta": BETA,
            "c_values": [C_VALUE, C_VALUE],
            "alpha": ALPHA,
            "kappa0": 1e-3,
        },
        "simulation": {
            "seed": SEED,
            "dt": DT,
            "tolerance": TOLERANCE,
            "window": WINDOW,
        },
    }
