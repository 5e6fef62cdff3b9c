"""Controller synthesis for consensus under switching directed topologies.

Builds the full certificate chain: a per-topology matrix inequality solved
through a shifted Lyapunov equation, a gain matrix obtained from an algebraic
Riccati reduction of the design inequality, the coupling-strength threshold,
the dwell-time threshold, and a per-switch margin check for an explicit
schedule.

Both matrix inequalities are solved constructively rather than through a
general-purpose SDP solver:

* For each topology, ``Lh^T Q + Q Lh > 2 c Q`` is satisfied by the unique
  solution of ``(Lh - c I)^T Q + Q (Lh - c I) = I``, which is positive
  definite because ``Lh - c I`` is antistable whenever c is below the
  antistability margin.  Its inequality margin is 1 by construction.
* ``A P + P A^T - B B^T + beta P < 0`` is satisfied by ``P = inv(X)`` where
  X solves the Riccati equation ``Abar^T X + X Abar - X B B^T X + I = 0``
  with ``Abar = A + (beta/2) I``; substituting back gives the left side
  exactly ``-P^2``, which is negative definite.  The gain is then
  ``K = (1/2) B^T inv(P) = (1/2) B^T X``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg, topology

DEFAULT_C_FRACTION = 0.9
DEFAULT_ALPHA_MARGIN = 1.05
DEFAULT_KAPPA0 = 1e-3

__all__ = [
    "GainDesign",
    "InfeasibleError",
    "ScheduleCheck",
    "ScheduleReport",
    "TopologyCertificate",
    "check_schedule",
    "choose_c",
    "coupling_threshold",
    "design_from_dict",
    "design_to_dict",
    "dwell_threshold",
    "max_feasible_beta",
    "solve_gain_lmi",
    "solve_topology_lmi",
    "synthesize",
]


class InfeasibleError(RuntimeError):
    """Design problem has no solution for the requested parameters."""


@dataclass
class TopologyCertificate:
    """Solution of the per-topology inequality for one communication graph.

    `lmi_margin` is the smallest eigenvalue of ``Lh^T Q + Q Lh - 2 c Q``,
    recomputed from Q after the solve; strict positivity certifies the
    inequality.
    """

    index: int
    c: float
    q: np.ndarray
    lmi_margin: float


@dataclass
class GainDesign:
    """Complete synthesized design with its feasibility certificates.

    Satisfies ``k == 0.5 * b.T @ inv(p)``, ``alpha > 2 / c0`` with
    ``c0 = min_i c_i``, and ``dwell_threshold == ln(lambda_max) / beta``
    whenever ``lambda_max > 1`` (0 otherwise).  `beta_bound` is the largest
    admissible beta for the gain inequality (infinite for controllable
    pairs).
    """

    beta: float
    p: np.ndarray
    k: np.ndarray
    alpha: float
    c0: float
    certificates: list = field(default_factory=list)
    lambda_max: float = 1.0
    dwell_threshold: float = 0.0
    beta_bound: float = math.inf

    @property
    def alpha_min(self):
        return 2.0 / self.c0


@dataclass
class ScheduleCheck:
    """Margin of the per-switch condition for one interval of a signal."""

    interval: int
    t_start: float
    t_end: float
    from_index: int
    to_index: int
    lambda_max: float
    margin: float
    passed: bool


@dataclass
class ScheduleReport:
    kappa0: float
    checks: list
    passed: bool


def choose_c(margin, fraction=DEFAULT_C_FRACTION):
    """Pick the per-topology scalar c strictly below the antistability margin."""
    if margin <= 0:
        raise InfeasibleError(
            f"antistability margin {margin:.6g} is not positive: the graph has "
            "no directed spanning tree, so no admissible c exists"
        )
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    return fraction * margin


def solve_topology_lmi(reduced, c):
    """Certificate Q for one topology: ``Lh^T Q + Q Lh > 2 c Q``.

    Q is the canonical solution of ``(Lh - c I)^T Q + Q (Lh - c I) = I``,
    positive definite by antistable Lyapunov theory.  The inequality margin
    is recomputed from Q and must come out strictly positive (it equals 1 up
    to solver residual).
    """
    lh = reduced.matrix
    margin = topology.antistability_margin(reduced)
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if c >= margin:
        raise InfeasibleError(
            f"c={c:.6g} is not below the antistability margin {margin:.6g} of "
            f"topology {reduced.source_index}; the shifted matrix is not antistable"
        )
    n = lh.shape[0]
    shifted = lh - c * np.eye(n)
    q = linalg.solve_lyapunov(shifted, np.eye(n))
    ok, cert = linalg.is_positive_definite(q)
    if not ok:
        raise InfeasibleError(
            f"certificate for topology {reduced.source_index} is not positive "
            f"definite (smallest eigenvalue {cert:.3e})"
        )
    gram = lh.T @ q + q @ lh - 2.0 * c * q
    lmi_margin = float(np.linalg.eigvalsh((gram + gram.T) / 2.0)[0])
    if lmi_margin <= 0:
        raise InfeasibleError(
            f"inequality margin {lmi_margin:.3e} is not positive for topology "
            f"{reduced.source_index}"
        )
    return TopologyCertificate(reduced.source_index, float(c), q, lmi_margin)


def max_feasible_beta(a, b):
    """Largest beta for which the gain inequality is feasible.

    PBH test: eigenvalues of `a` where ``[lambda I - a, b]`` loses rank are
    uncontrollable; the bound is ``min Re(-mode)`` over them.  Controllable
    pairs return ``inf`` (any beta > 0 is feasible).
    """
    modes = linalg.uncontrollable_modes(a, b)
    if not modes:
        return math.inf
    return min(-m.real for m in modes)


def solve_gain_lmi(a, b, beta):
    """Solve ``A P + P A^T - B B^T + beta P < 0`` for P > 0 and the gain K.

    Riccati reduction: with ``Abar = A + (beta/2) I``, the stabilizing
    solution X of ``Abar^T X + X Abar - X B B^T X + I = 0`` gives
    ``P = inv(X)`` and ``K = (1/2) B^T X``; the inequality's left side then
    equals ``-P^2``.  The largest eigenvalue of the left side is re-verified
    to be strictly negative before returning.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    bound = max_feasible_beta(a, b)
    if beta >= bound:
        modes = linalg.uncontrollable_modes(a, b)
        raise InfeasibleError(
            f"beta={beta:.6g} is infeasible: uncontrollable modes {modes} limit "
            f"beta to values below {bound:.6g}"
        )
    n = a.shape[0]
    abar = a + (beta / 2.0) * np.eye(n)
    x = linalg.solve_care(abar, b, np.eye(n))
    p = np.linalg.inv(x)
    p = (p + p.T) / 2.0
    k = 0.5 * b.T @ x
    expr = a @ p + p @ a.T - b @ b.T + beta * p
    top = float(np.linalg.eigvalsh((expr + expr.T) / 2.0)[-1])
    if top >= 0:
        raise InfeasibleError(
            f"gain inequality violated after solve: largest eigenvalue {top:.3e}"
        )
    return p, k


def coupling_threshold(certificates):
    """Lower bound 2 / min(c_i) that the coupling strength must exceed."""
    if not certificates:
        raise ValueError("need at least one topology certificate")
    return 2.0 / min(cert.c for cert in certificates)


def dwell_threshold(certificates, beta):
    """Dwell-time threshold from the worst certificate-pair eigenvalue ratio.

    Returns ``(lambda_max, tau_star)`` where lambda_max is the largest
    generalized eigenvalue of ``(Q_i, Q_j)`` over ordered pairs i != j and
    ``tau_star = ln(lambda_max) / beta``.  A single topology (or
    lambda_max <= 1) needs no dwell bound and returns tau_star = 0.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not certificates:
        raise ValueError("need at least one topology certificate")
    if len(certificates) == 1:
        return 1.0, 0.0
    lam = max(
        linalg.max_generalized_eigenvalue(ci.q, cj.q)
        for ci in certificates
        for cj in certificates
        if ci.index != cj.index
    )
    # Identical certificates give lam = 1 up to round-off; no dwell bound.
    tau = math.log(lam) / beta if lam > 1.0 + 1e-12 else 0.0
    return float(lam), float(tau)


def check_schedule(signal, certificates, beta, kappa0=DEFAULT_KAPPA0):
    """Per-interval margins of the switching condition for an explicit signal.

    For every breakpoint with a successor, the margin is
    ``beta * (t_{k+1} - t_k) - ln(lambda_max_k)`` with lambda_max_k the
    largest generalized eigenvalue of the outgoing/incoming certificate pair.
    The report passes iff every margin strictly exceeds kappa0.
    """
    by_index = {cert.index: cert for cert in certificates}
    for idx in np.unique(signal.indices):
        if int(idx) not in by_index:
            raise ValueError(f"no certificate for topology index {int(idx)}")
    checks = []
    t = signal.breakpoints
    for k in range(signal.interval_count - 1):
        i_from = int(signal.indices[k])
        i_to = int(signal.indices[k + 1])
        lam = linalg.max_generalized_eigenvalue(by_index[i_from].q, by_index[i_to].q)
        margin = beta * (t[k + 1] - t[k]) - math.log(lam)
        checks.append(
            ScheduleCheck(
                interval=k + 1,
                t_start=float(t[k]),
                t_end=float(t[k + 1]),
                from_index=i_from,
                to_index=i_to,
                lambda_max=float(lam),
                margin=float(margin),
                passed=margin > kappa0,
            )
        )
    return ScheduleReport(kappa0, checks, all(c.passed for c in checks))


def synthesize(
    a,
    b,
    reduced_laplacians,
    beta,
    c_values=None,
    c_fraction=DEFAULT_C_FRACTION,
    alpha=None,
    alpha_margin=DEFAULT_ALPHA_MARGIN,
):
    """Run the full synthesis chain and assemble a :class:`GainDesign`.

    `c_values` overrides the per-topology scalars (one per graph, or a single
    value applied to all); otherwise each is `c_fraction` of that topology's
    antistability margin.  `alpha` overrides the coupling strength; otherwise
    it is `alpha_margin` times the threshold ``2/c0``.
    """
    reduced = list(reduced_laplacians)
    if not reduced:
        raise ValueError("need at least one reduced Laplacian")
    margins = [topology.antistability_margin(r) for r in reduced]
    for r, margin in zip(reduced, margins):
        if margin <= 0:
            raise InfeasibleError(
                f"topology {r.source_index} has no directed spanning tree "
                f"(antistability margin {margin:.6g})"
            )
    if c_values is None:
        cs = [choose_c(m, c_fraction) for m in margins]
    else:
        cs = [float(c) for c in np.broadcast_to(c_values, (len(reduced),))]
    certificates = [solve_topology_lmi(r, c) for r, c in zip(reduced, cs)]
    alpha_min = coupling_threshold(certificates)
    if alpha is None:
        alpha = alpha_margin * alpha_min
    if alpha <= alpha_min:
        raise InfeasibleError(
            f"coupling strength alpha={alpha:.6g} must strictly exceed "
            f"2/c0 = {alpha_min:.6g}"
        )
    p, k = solve_gain_lmi(a, b, beta)
    lam, tau = dwell_threshold(certificates, beta)
    return GainDesign(
        beta=float(beta),
        p=p,
        k=k,
        alpha=float(alpha),
        c0=min(cs),
        certificates=certificates,
        lambda_max=lam,
        dwell_threshold=tau,
        beta_bound=max_feasible_beta(a, b),
    )


def design_to_dict(design, config_digest=None, reference=None):
    """Serialize a design to the synthesis-report document (plain JSON types).

    Matrices are nested row-major lists at full double precision.  An
    unbounded beta (controllable pair) serializes as null.  `reference`
    attaches externally published comparison values without mixing them into
    the computed fields.
    """
    doc = {
        "schema_version": 1,
        "beta": design.beta,
        "alpha": design.alpha,
        "alpha_min": design.alpha_min,
        "c0": design.c0,
        "beta_bound": None if math.isinf(design.beta_bound) else design.beta_bound,
        "gain": {"k": design.k.tolist(), "p": design.p.tolist()},
        "certificates": [
            {
                "index": cert.index,
                "c": cert.c,
                "q": cert.q.tolist(),
                "lmi_margin": cert.lmi_margin,
            }
            for cert in design.certificates
        ],
        "lambda_max": design.lambda_max,
        "dwell_threshold": design.dwell_threshold,
    }
    if config_digest is not None:
        doc["config_digest"] = config_digest
    if reference is not None:
        doc["reference"] = reference
    return doc


def design_from_dict(doc):
    """Rebuild a :class:`GainDesign` from a synthesis-report document."""
    try:
        certificates = [
            TopologyCertificate(
                index=int(c["index"]),
                c=float(c["c"]),
                q=np.asarray(c["q"], dtype=float),
                lmi_margin=float(c["lmi_margin"]),
            )
            for c in doc["certificates"]
        ]
        bound = doc.get("beta_bound")
        return GainDesign(
            beta=float(doc["beta"]),
            p=np.asarray(doc["gain"]["p"], dtype=float),
            k=np.asarray(doc["gain"]["k"], dtype=float),
            alpha=float(doc["alpha"]),
            c0=float(doc["c0"]),
            certificates=certificates,
            lambda_max=float(doc["lambda_max"]),
            dwell_threshold=float(doc["dwell_threshold"]),
            beta_bound=math.inf if bound is None else float(bound),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed synthesis report: {exc}") from exc
