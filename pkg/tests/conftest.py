import numpy as np
import pytest

from switched_consensus import topology, vtol

# Reduced Laplacians of the two demo topologies, known in closed form
# (graph 1 is lower triangular after reduction, graph 2 block triangular).
LHAT_1 = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 1.0, 0.0],
        [1.0, 0.0, -1.0, 2.0],
    ]
)
LHAT_2 = np.array(
    [
        [2.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, -1.0, 1.0, 0.0],
        [1.0, -1.0, -1.0, 2.0],
    ]
)


@pytest.fixture(scope="session")
def vtol_graphs():
    return vtol.load_graphs()


@pytest.fixture(scope="session")
def vtol_reduced(vtol_graphs):
    return [
        topology.reduce_laplacian(topology.laplacian(g), pos)
        for pos, g in enumerate(vtol_graphs, start=1)
    ]


@pytest.fixture(scope="session")
def vtol_design(vtol_reduced):
    from switched_consensus import synthesis

    return synthesis.synthesize(
        vtol.A,
        vtol.B,
        vtol_reduced,
        vtol.BETA,
        c_values=[vtol.C_VALUE, vtol.C_VALUE],
        alpha=vtol.ALPHA,
    )


def random_spd(rng, n, shift=0.1):
    m = rng.normal(size=(n, n))
    return m @ m.T + shift * np.eye(n)


def random_stable(rng, n, gap=0.5):
    m = rng.normal(size=(n, n))
    return m - (np.linalg.eigvals(m).real.max() + gap) * np.eye(n)


def random_antistable(rng, n, gap=0.5):
    return -random_stable(rng, n, gap)


def draw_stabilizable(rng, max_n=5, pbh_floor=0.3):
    """Random stabilizable (a, b) with a comfortable controllability margin.

    Near-uncontrollable pairs make the Riccati solution arbitrarily large and
    its double-precision residual floor exceeds any fixed tolerance, so draws
    are filtered by the smallest PBH singular value.
    """
    from switched_consensus import linalg

    while True:
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(1, 3))
        a = rng.normal(size=(n, n))
        b = rng.normal(size=(n, m))
        margin = min(
            (
                np.linalg.svd(
                    np.hstack([lam * np.eye(n) - a, b.astype(complex)]),
                    compute_uv=False,
                )[-1]
                for lam in linalg.eigenvalues(a)
            ),
            default=np.inf,
        )
        if margin >= pbh_floor:
            return a, b
