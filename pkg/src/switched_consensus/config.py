"""Run configuration: a single JSON document driving the pipeline commands.

The document carries the agent model, the candidate topologies, the
switching specification, and the synthesis/simulation parameters.  Parsing
is strict: unknown switching kinds, conflicting alternatives (explicit
signal vs periodic spec, fixed x0 vs seed), and out-of-range scalars are
rejected with the offending field named.

A canonical digest over the synthesis inputs (system, graphs, synthesis
parameters) ties synthesis reports to the configuration they were computed
from, so stale reports are detected instead of silently re-verified.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import synthesis, topology

SCHEMA_VERSION = 1

__all__ = [
    "ConfigError",
    "RunConfig",
    "build_signal",
    "config_digest",
    "config_to_dict",
    "load_config",
    "make_x0",
    "parse_config",
]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    a: np.ndarray
    b: np.ndarray
    graphs: topology.GraphSet
    switching_kind: str  # "periodic" or "explicit"
    switching: dict
    beta: float
    c_values: list = None
    c_fraction: float = None
    alpha: float = None
    alpha_margin: float = None
    kappa0: float = synthesis.DEFAULT_KAPPA0
    x0: np.ndarray = None
    seed: int = None
    dt: float = 0.01
    tolerance: float = 1e-2
    window: float = 2.0
    gain: dict = None  # optional explicit {"k": ndarray, "alpha": float}
    out_dir: str = None
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)


def _require(doc, key, where):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return doc[key]


def _positive(value, where):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if not value > 0:
        raise ConfigError(f"{where}: must be positive, got {value}")
    return value


def _matrix(doc, where):
    try:
        m = np.asarray(doc, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a nested numeric array") from None
    if m.ndim != 2:
        raise ConfigError(f"{where}: expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigError(f"{where}: contains non-finite entries")
    return m


def parse_config(doc, base_dir="."):
    """Parse a configuration document into a validated :class:`RunConfig`.

    Graph entries may be inline documents or paths (resolved against
    `base_dir`).
    """
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )
    system = _require(doc, "system", "top level")
    a = _matrix(_require(system, "a", "system"), "system.a")
    b = _matrix(_require(system, "b", "system"), "system.b")
    if a.shape[0] != a.shape[1]:
        raise ConfigError(f"system.a: must be square, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ConfigError(
            f"system.b: row count {b.shape[0]} must match system.a order {a.shape[0]}"
        )

    graph_docs = _require(doc, "graphs", "top level")
    if not isinstance(graph_docs, list) or not graph_docs:
        raise ConfigError("graphs: expected a non-empty list")
    graphs = []
    for pos, entry in enumerate(graph_docs):
        where = f"graphs[{pos}]"
        try:
            if isinstance(entry, str):
                graphs.append(topology.load_graph(os.path.join(base_dir, entry)))
            elif isinstance(entry, dict):
                graphs.append(topology.graph_from_dict(entry))
            else:
                raise ConfigError(f"{where}: expected a path or an inline graph")
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    graph_set = topology.GraphSet(tuple(graphs))

    switching = _require(doc, "switching", "top level")
    kinds = [k for k in ("periodic", "explicit") if k in switching]
    if len(kinds) != 1:
        raise ConfigError(
            "switching: exactly one of 'periodic' or 'explicit' must be present"
        )
    kind = kinds[0]
    spec = dict(switching[kind])
    if kind == "periodic":
        spec["dwell"] = _positive(_require(spec, "dwell", "switching.periodic"),
                                  "switching.periodic.dwell")
        spec["horizon"] = _positive(
            _require(spec, "horizon", "switching.periodic"),
            "switching.periodic.horizon",
        )
    else:
        for key in ("breakpoints", "indices", "horizon"):
            _require(spec, key, "switching.explicit")
        spec["horizon"] = _positive(spec["horizon"], "switching.explicit.horizon")

    synth = _require(doc, "synthesis", "top level")
    beta = _positive(_require(synth, "beta", "synthesis"), "synthesis.beta")
    c_values = synth.get("c_values")
    c_fraction = synth.get("c_fraction")
    if c_values is not None and c_fraction is not None:
        raise ConfigError("synthesis: give c_values or c_fraction, not both")
    if c_values is not None:
        c_values = [
            _positive(c, f"synthesis.c_values[{i}]") for i, c in enumerate(c_values)
        ]
        if len(c_values) not in (1, len(graph_set)):
            raise ConfigError(
                f"synthesis.c_values: expected 1 or {len(graph_set)} values, "
                f"got {len(c_values)}"
            )
    if c_fraction is not None:
        c_fraction = float(c_fraction)
        if not 0 < c_fraction < 1:
            raise ConfigError(
                f"synthesis.c_fraction: must lie in (0, 1), got {c_fraction}"
            )
    alpha = synth.get("alpha")
    alpha_margin = synth.get("alpha_margin")
    if alpha is not None and alpha_margin is not None:
        raise ConfigError("synthesis: give alpha or alpha_margin, not both")
    if alpha is not None:
        alpha = _positive(alpha, "synthesis.alpha")
    if alpha_margin is not None:
        alpha_margin = float(alpha_margin)
        if alpha_margin <= 1:
            raise ConfigError(
                f"synthesis.alpha_margin: must exceed 1, got {alpha_margin}"
            )
    kappa0 = _positive(synth.get("kappa0", synthesis.DEFAULT_KAPPA0),
                       "synthesis.kappa0")

    sim = _require(doc, "simulation", "top level")
    x0 = sim.get("x0")
    seed = sim.get("seed")
    if (x0 is None) == (seed is None):
        raise ConfigError("simulation: exactly one of 'x0' or 'seed' must be given")
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).ravel()
        expected = graph_set.node_count * a.shape[0]
        if x0.size != expected:
            raise ConfigError(
                f"simulation.x0: expected length {expected} "
                f"(= nodes * state dim), got {x0.size}"
            )
    if seed is not None:
        seed = int(seed)
        if seed < 0:
            raise ConfigError(f"simulation.seed: must be non-negative, got {seed}")
    dt = _positive(sim.get("dt", 0.01), "simulation.dt")
    tolerance = _positive(sim.get("tolerance", 1e-2), "simulation.tolerance")
    window = _positive(sim.get("window", 2.0), "simulation.window")

    gain = doc.get("gain")
    if gain is not None:
        k = _matrix(_require(gain, "k", "gain"), "gain.k")
        if k.shape != (b.shape[1], a.shape[0]):
            raise ConfigError(
                f"gain.k: expected shape {(b.shape[1], a.shape[0])}, got {k.shape}"
            )
        gain = {"k": k, "alpha": _positive(_require(gain, "alpha", "gain"),
                                           "gain.alpha")}

    out = doc.get("output", {})
    out_dir = out.get("dir") if isinstance(out, dict) else None

    return RunConfig(
        a=a,
        b=b,
        graphs=graph_set,
        switching_kind=kind,
        switching=spec,
        beta=beta,
        c_values=c_values,
        c_fraction=c_fraction,
        alpha=alpha,
        alpha_margin=alpha_margin,
        kappa0=kappa0,
        x0=x0,
        seed=seed,
        dt=dt,
        tolerance=tolerance,
        window=window,
        gain=gain,
        out_dir=out_dir,
        schema_version=int(version),
    )


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}")
    return parse_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def config_to_dict(rc):
    """Canonical document for a config; parse(config_to_dict(rc)) == rc."""
    doc = {
        "schema_version": rc.schema_version,
        "system": {"a": rc.a.tolist(), "b": rc.b.tolist()},
        "graphs": [topology.graph_to_dict(g) for g in rc.graphs],
        "switching": {rc.switching_kind: dict(rc.switching)},
        "synthesis": {"beta": rc.beta, "kappa0": rc.kappa0},
        "simulation": {
            "dt": rc.dt,
            "tolerance": rc.tolerance,
            "window": rc.window,
        },
    }
    if rc.c_values is not None:
        doc["synthesis"]["c_values"] = list(rc.c_values)
    if rc.c_fraction is not None:
        doc["synthesis"]["c_fraction"] = rc.c_fraction
    if rc.alpha is not None:
        doc["synthesis"]["alpha"] = rc.alpha
    if rc.alpha_margin is not None:
        doc["synthesis"]["alpha_margin"] = rc.alpha_margin
    if rc.x0 is not None:
        doc["simulation"]["x0"] = rc.x0.tolist()
    if rc.seed is not None:
        doc["simulation"]["seed"] = rc.seed
    if rc.gain is not None:
        doc["gain"] = {"k": rc.gain["k"].tolist(), "alpha": rc.gain["alpha"]}
    if rc.out_dir is not None:
        doc["output"] = {"dir": rc.out_dir}
    return doc


def config_digest(rc):
    """Hex digest of the synthesis-relevant inputs (system, graphs, synthesis).

    Simulation and switching parameters are excluded on purpose: re-checking
    an existing design under a different schedule is a supported workflow,
    not a staleness error.
    """
    doc = config_to_dict(rc)
    payload = {
        "system": doc["system"],
        "graphs": doc["graphs"],
        "synthesis": doc["synthesis"],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def build_signal(rc):
    """Materialize the switching signal described by the configuration."""
    if rc.switching_kind == "periodic":
        signal = topology.periodic_signal(
            len(rc.graphs), rc.switching["dwell"], rc.switching["horizon"]
        )
    else:
        spec = rc.switching
        try:
            signal = topology.SwitchingSignal(
                np.asarray(spec["breakpoints"], dtype=float),
                np.asarray(spec["indices"], dtype=int),
                spec["horizon"],
                tau0=spec.get("tau0"),
                tau1=spec.get("tau1"),
            )
        except ValueError as exc:
            raise ConfigError(f"switching.explicit: {exc}") from exc
    try:
        signal.validate_against(len(rc.graphs))
    except ValueError as exc:
        raise ConfigError(f"switching: {exc}") from exc
    return signal


def make_x0(rc):
    """Initial condition: explicit vector, or seeded uniform [-1, 1] draws."""
    if rc.x0 is not None:
        return rc.x0.copy()
    size = rc.graphs.node_count * rc.a.shape[0]
    return np.random.default_rng(rc.seed).uniform(-1.0, 1.0, size=size)
