"""Exact simulation of the switched closed-loop multi-agent system.

Each topology contributes a constant closed-loop matrix, so the trajectory
is a concatenation of linear flows: within an interval the state advances by
the matrix exponential of the active mode, and switches hand the (continuous)
state to the next mode.  No ODE stepping error enters; the sample grid only
chooses where the exact flow is observed.

The same propagation core also runs the reduced disagreement system, whose
trajectory must reproduce the disagreement of the full system - a structural
identity used as a cross-check throughout the test-suite.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import linalg, topology

# Abort threshold for diverging trajectories (infeasible designs blow up in
# finite time at double precision).
DIVERGENCE_CUTOFF = 1e12
# Acceptance threshold for the reduction-intertwining identity, relative to
# the closed-loop matrix scale.
INTERTWINE_RTOL = 1e-10

__all__ = [
    "LyapunovMonitor",
    "ReducedTrajectory",
    "SimulationDiverged",
    "SwitchedClosedLoop",
    "TrajectoryRecord",
    "build_closed_loop",
    "consensus_verdict",
    "disagreement",
    "lyapunov_monitor",
    "simulate",
    "simulate_reduced",
    "write_trajectory_csv",
]


class SimulationDiverged(RuntimeError):
    """Trajectory exceeded the divergence cutoff; carries the first bad time."""

    def __init__(self, t, norm):
        super().__init__(
            f"trajectory diverged at t={t:.6g} (state max-norm {norm:.3e} exceeds "
            f"{DIVERGENCE_CUTOFF:.1e})"
        )
        self.t = t
        self.norm = norm


@dataclass
class SwitchedClosedLoop:
    """Per-topology closed-loop matrices plus the switching signal.

    ``full_modes[i]`` drives the stacked state (size N*n), ``reduced_modes[i]``
    the disagreement vector (size (N-1)*n).  The two are intertwined by the
    disagreement map: ``Xi_n @ full == reduced @ Xi_n``.
    """

    a: np.ndarray
    b: np.ndarray
    k: np.ndarray
    alpha: float
    full_modes: list
    reduced_modes: list
    signal: topology.SwitchingSignal
    node_count: int
    state_dim: int


@dataclass
class TrajectoryRecord:
    """Sampled run of the switched system.

    Sample times are strictly increasing and include every switch instant;
    the stored topology index is right-continuous (the new mode at a switch).
    `switches` lists ``(t, old_index, new_index)`` so writers can also emit
    the left-sided limit.  The disagreement data is recomputable from the
    states at every sample.
    """

    times: np.ndarray
    states: np.ndarray
    errors: np.ndarray
    error_norms: np.ndarray
    indices: np.ndarray
    switches: list
    node_count: int
    state_dim: int

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")


@dataclass
class ReducedTrajectory:
    """Run of the reduced disagreement system (diagnostic / oracle path)."""

    times: np.ndarray
    errors: np.ndarray
    indices: np.ndarray
    switches: list


@dataclass
class LyapunovMonitor:
    """Per-topology energy traces V_i(t) = e^T (Q_i kron inv(P)) e.

    `interval_rates` holds the fitted exponential decay rate of the active
    trace on each interval (None when the trace is zero or too short);
    `switch_jumps` holds the observed energy jump ratio at each switch next
    to its theoretical bound.  The ratio never exceeds the bound - that is
    enforced, not just reported.
    """

    topology_indices: list
    values: np.ndarray
    interval_rates: list
    switch_jumps: list


def build_closed_loop(a, b, k_gain, alpha, graphs, signal):
    """Assemble the switched closed-loop matrices for a gain and graph set.

    Builds ``I_N kron A - alpha * (L_i kron B K)`` per topology along with the
    reduced counterparts using the reduced Laplacians, then verifies the
    intertwining identity between the two families.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k_gain = np.asarray(k_gain, dtype=float)
    if alpha < 0:
        raise ValueError(f"coupling strength must be non-negative, got {alpha}")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"state matrix must be square, got {a.shape}")
    if b.shape[0] != n:
        raise ValueError(f"input matrix has {b.shape[0]} rows, expected {n}")
    if k_gain.shape != (b.shape[1], n):
        raise ValueError(
            f"gain must be {b.shape[1]}x{n} to match (A, B), got {k_gain.shape}"
        )
    n_nodes = graphs.node_count
    signal.validate_against(len(graphs))
    bk = b @ k_gain
    xi_n = np.kron(topology.xi_matrix(n_nodes), np.eye(n))
    full_modes = []
    reduced_modes = []
    for g in graphs:
        lap = topology.laplacian(g)
        reduced = topology.reduce_laplacian(lap)
        full = np.kron(np.eye(n_nodes), a) - alpha * np.kron(lap, bk)
        red = np.kron(np.eye(n_nodes - 1), a) - alpha * np.kron(reduced.matrix, bk)
        residual = np.abs(xi_n @ full - red @ xi_n).max()
        scale = max(1.0, np.abs(full).max())
        if residual > INTERTWINE_RTOL * scale:
            raise ValueError(
                f"closed-loop assembly inconsistent: intertwining residual "
                f"{residual:.3e} exceeds {INTERTWINE_RTOL:.1e} * {scale:.3e}"
            )
        full_modes.append(full)
        reduced_modes.append(red)
    return SwitchedClosedLoop(
        a=a,
        b=b,
        k=k_gain,
        alpha=float(alpha),
        full_modes=full_modes,
        reduced_modes=reduced_modes,
        signal=signal,
        node_count=n_nodes,
        state_dim=n,
    )


def _grid_targets(t_start, t_end, dt):
    """Sample instants inside (t_start, t_end) on the global dt grid, plus t_end."""
    eps = 1e-9 * dt
    targets = []
    k = int(np.floor(t_start / dt + 1e-9)) + 1
    while k * dt < t_end - eps:
        if k * dt > t_start + eps:
            targets.append(k * dt)
        k += 1
    targets.append(t_end)
    return targets


def _propagate(modes, signal, z0, dt):
    """Piecewise-exact flow of ``z' = M_sigma(t) z`` sampled on the dt grid.

    Returns ``(times, trajectory, indices, switches)``.  Transition matrices
    are cached per (mode, step) pair; steps repeat heavily on a uniform grid.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = np.asarray(z0, dtype=float).ravel()
    dim = modes[0].shape[0]
    if z.shape != (dim,):
        raise ValueError(f"initial state has length {z.size}, expected {dim}")
    times = [0.0]
    trajectory = [z.copy()]
    indices = [int(signal.indices[0])]
    switches = []
    cache = {}
    t = 0.0
    bps = signal.breakpoints
    for j in range(signal.interval_count):
        mode = int(signal.indices[j])
        is_last = j + 1 >= signal.interval_count
        t_end = signal.horizon if is_last else float(bps[j + 1])
        for target in _grid_targets(float(bps[j]), t_end, dt):
            h = target - t
            key = (mode, h)
            phi = cache.get(key)
            if phi is None:
                phi = linalg.expm(modes[mode - 1] * h)
                cache[key] = phi
            z = phi @ z
            t = target
            peak = np.abs(z).max()
            if not np.isfinite(peak) or peak > DIVERGENCE_CUTOFF:
                raise SimulationDiverged(t, peak)
            at_switch = (not is_last) and target == t_end
            next_mode = int(signal.indices[j + 1]) if at_switch else mode
            times.append(t)
            trajectory.append(z.copy())
            indices.append(next_mode)
            if at_switch:
                switches.append((t, mode, next_mode))
    return (
        np.array(times),
        np.vstack(trajectory),
        np.array(indices, dtype=int),
        switches,
    )


def simulate(closed_loop, x0, dt):
    """Run the full stacked system from x0 and record the disagreement data."""
    n_nodes = closed_loop.node_count
    n = closed_loop.state_dim
    times, states, indices, switches = _propagate(
        closed_loop.full_modes, closed_loop.signal, x0, dt
    )
    xi_n = np.kron(topology.xi_matrix(n_nodes), np.eye(n))
    errors = states @ xi_n.T
    norms = np.linalg.norm(errors, axis=1)
    return TrajectoryRecord(
        times=times,
        states=states,
        errors=errors,
        error_norms=norms,
        indices=indices,
        switches=switches,
        node_count=n_nodes,
        state_dim=n,
    )


def simulate_reduced(closed_loop, e0, dt):
    """Run the reduced disagreement system from e0 with the same scheme."""
    times, errors, indices, switches = _propagate(
        closed_loop.reduced_modes, closed_loop.signal, e0, dt
    )
    return ReducedTrajectory(times, errors, indices, switches)


def disagreement(x, node_count, state_dim):
    """Blockwise offsets from the last agent and their Euclidean norm.

    ``e_i = x_i - x_N`` for i < N; equals ``(Xi kron I_n) x``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != node_count * state_dim:
        raise ValueError(
            f"state length {x.size} != node_count*state_dim = "
            f"{node_count * state_dim}"
        )
    blocks = x.reshape(node_count, state_dim)
    e = (blocks[:-1] - blocks[-1]).ravel()
    return e, float(np.linalg.norm(e))


def consensus_verdict(record, tol, window):
    """Finite-horizon consensus check on a recorded trajectory.

    Passes iff the final disagreement norm is below ``tol`` times the initial
    one and the peak norm over the final `window` seconds stays below the
    peak one window earlier (decay persistence).  A trajectory starting on
    the consensus subspace passes trivially.  Returns ``(verdict, ratio)``.
    """
    if tol <= 0 or window <= 0:
        raise ValueError("tol and window must be positive")
    norms = record.error_norms
    if norms.size == 0:
        raise ValueError("empty trajectory")
    if norms[0] == 0.0:
        return True, 0.0
    ratio = float(norms[-1] / norms[0])
    t_final = record.times[-1]
    w = min(window, t_final / 2.0)
    last = norms[record.times >= t_final - w]
    prev = norms[(record.times >= t_final - 2 * w) & (record.times < t_final - w)]
    if last.size == 0 or prev.size == 0:
        persistent = True
    elif prev.max() == 0.0:
        persistent = bool(last.max() == 0.0)
    else:
        persistent = bool(last.max() < prev.max())
    return bool(ratio <= tol and persistent), ratio


def lyapunov_monitor(record, certificates, p):
    """Per-topology energy traces with decay rates and switch-jump ratios.

    The observed jump ratio at each switch is checked against its algebraic
    bound (the largest generalized eigenvalue of the certificate pair); a
    violation indicates corrupted inputs and raises RuntimeError.
    """
    by_index = {cert.index: cert for cert in certificates}
    for idx in np.unique(record.indices):
        if int(idx) not in by_index:
            raise ValueError(f"no certificate for topology index {int(idx)}")
    order = sorted(by_index)
    p_inv = np.linalg.inv(np.asarray(p, dtype=float))
    p_inv = (p_inv + p_inv.T) / 2.0
    weights = [np.kron(by_index[i].q, p_inv) for i in order]
    values = np.column_stack(
        [np.einsum("sj,jk,sk->s", record.errors, w, record.errors) for w in weights]
    )
    col = {idx: pos for pos, idx in enumerate(order)}

    # Fitted exponential rate of the active trace on each switching interval.
    boundaries = [record.times[0]] + [t for t, _, _ in record.switches]
    boundaries.append(record.times[-1])
    interval_rates = []
    for a_t, b_t in zip(boundaries[:-1], boundaries[1:]):
        mask = (record.times >= a_t) & (record.times <= b_t)
        active = int(record.indices[np.argmax(record.times >= a_t)])
        v = values[mask, col[active]]
        tt = record.times[mask]
        if v.size >= 2 and np.all(v > 0):
            rate = float(np.polyfit(tt, np.log(v), 1)[0])
        else:
            rate = None
        interval_rates.append((float(a_t), float(b_t), active, rate))

    switch_jumps = []
    for t_s, old, new in record.switches:
        s = int(np.searchsorted(record.times, t_s))
        v_old = values[s, col[old]]
        v_new = values[s, col[new]]
        bound = linalg.max_generalized_eigenvalue(by_index[old].q, by_index[new].q)
        ratio = float(v_new / v_old) if v_old > 0 else None
        if ratio is not None and ratio > bound * (1 + 1e-9):
            raise RuntimeError(
                f"energy jump ratio {ratio:.12g} exceeds its algebraic bound "
                f"{bound:.12g} at t={t_s:.6g}; certificates do not match the run"
            )
        switch_jumps.append((float(t_s), old, new, ratio, float(bound)))
    return LyapunovMonitor(order, values, interval_rates, switch_jumps)


def _fmt(value):
    return repr(float(value))


def write_trajectory_csv(record, path, monitor=None):
    """Write the trajectory as CSV, one row per sample.

    Columns: ``t, topology, x_1_1 .. x_N_n, e_norm`` plus ``V_1 .. V_p`` when
    a monitor is given.  Switch instants produce two rows sharing t and x:
    first the outgoing topology, then the incoming one.  Floats are written
    with full round-trip precision.
    """
    header = ["t", "topology"]
    header += [
        f"x_{i + 1}_{j + 1}"
        for i in range(record.node_count)
        for j in range(record.state_dim)
    ]
    header.append("e_norm")
    if monitor is not None:
        header += [f"V_{i}" for i in monitor.topology_indices]
    switch_at = {t: (old, new) for t, old, new in record.switches}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s, t in enumerate(record.times):
            tail = [_fmt(v) for v in record.states[s]]
            tail.append(_fmt(record.error_norms[s]))
            if monitor is not None:
                tail += [_fmt(v) for v in monitor.values[s]]
            if t in switch_at:
                old, new = switch_at[t]
                writer.writerow([_fmt(t), old] + tail)
                writer.writerow([_fmt(t), new] + tail)
            else:
                writer.writerow([_fmt(t), int(record.indices[s])] + tail)
