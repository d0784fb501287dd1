"""Scenario configuration (flat sectioned key=value text) and run records."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields

import numpy as np

from .coefficients import BenchmarkFamily
from .solver import InitialCondition, SolverConfig


class ScenarioError(ValueError):
    """Malformed scenario text."""


# (section, key) -> value type; "floats"/"ints" are comma-separated lists.
_SCHEMA = {
    "solver": {
        "dt": "float",
        "half_width": "int",
        "particles": "int",
        "delay": "float",
        "t_start": "float",
        "horizon": "float",
        "seed": "int",
    },
    "coefficients": {
        "alpha": "float",
        "beta": "float",
        "p": "float",
        "psi_bar": "float",
        "chi_bar": "float",
        "kappa_bar": "float",
        "g_amp": "float",
        "g_support_radius": "int",
        "decay_q": "float",
        "autonomous": "bool",
        "nu": "float",
        "lam": "float",
        "bdg_c1": "float",
    },
    "experiment": {
        "kind": "str",
        "record_every": "float",
        "fit_start": "float",
        "fit_end": "float",
        "eps_list": "floats",
        "tail_indices": "ints",
        "ic_a": "str",
        "ic_b": "str",
        "tol": "float",
    },
    "output": {
        "path": "str",
    },
}

_KINDS = ("simulate", "contract", "mix", "sweep-eps", "absorb", "tails",
          "certify", "picard-check")


@dataclass(frozen=True)
class ScenarioConfig:
    # solver block
    dt: float = 0.01
    half_width: int = 8
    particles: int = 512
    delay: float = 0.2
    t_start: float = 0.0
    horizon: float = 4.0
    seed: int = 0
    # coefficient block
    alpha: float = 1.0
    beta: float = 0.0
    p: float = 4.0
    psi_bar: float = 0.02
    chi_bar: float = 0.02
    kappa_bar: float = 0.02
    g_amp: float = 0.5
    g_support_radius: int = 2
    decay_q: float = 1.0
    autonomous: bool = False
    nu: float = 0.1
    lam: float = 10.0
    bdg_c1: float = 2.0
    # experiment block
    kind: str = "simulate"
    record_every: float = 0.05
    fit_start: float = 0.5
    fit_end: float = 2.0
    eps_list: tuple = ()
    tail_indices: tuple = ()
    ic_a: str = "zero"
    ic_b: str = "spike:1.0"
    tol: float = 1e-9
    # output block
    path: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ScenarioError(f"unknown experiment kind {self.kind!r}")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            dt=self.dt,
            half_width=self.half_width,
            particle_count=self.particles,
            delay=self.delay,
            t_start=self.t_start,
            seed=self.seed,
        )

    def benchmark(self) -> BenchmarkFamily:
        return BenchmarkFamily(
            alpha=self.alpha,
            beta=self.beta,
            p=self.p,
            psi_bar=self.psi_bar,
            chi_bar=self.chi_bar,
            kappa_bar=self.kappa_bar,
            g_amp=self.g_amp,
            g_support_radius=self.g_support_radius,
            decay_q=self.decay_q,
            autonomous=self.autonomous,
        )

    def initial_a(self) -> InitialCondition:
        return InitialCondition.from_spec(self.ic_a)

    def initial_b(self) -> InitialCondition:
        return InitialCondition.from_spec(self.ic_b)


_FIELD_SECTION = {key: section
                  for section, keys in _SCHEMA.items()
                  for key in keys}


def _convert(raw: str, typ: str, where: str):
    try:
        if typ == "float":
            return float(raw)
        if typ == "int":
            return int(raw)
        if typ == "bool":
            low = raw.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if typ == "str":
            return raw.strip()
        if typ == "floats":
            raw = raw.strip()
            return tuple(float(x) for x in raw.split(",")) if raw else ()
        if typ == "ints":
            raw = raw.strip()
            return tuple(int(x) for x in raw.split(",")) if raw else ()
    except ValueError as exc:
        raise ScenarioError(f"bad value for {where}: {raw!r}") from exc
    raise AssertionError(typ)


def parse_scenario(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"unparseable scenario: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ScenarioError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ScenarioError(f"unknown key {key!r} in [{section}]")
            values[key] = _convert(raw, _SCHEMA[section][key],
                                   f"[{section}] {key}")
    return ScenarioConfig(**values)


def _render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(v) if isinstance(v, float) else str(v)
                        for v in value)
    return str(value)


def render_scenario(sc: ScenarioConfig) -> str:
    out = io.StringIO()
    by_name = {f.name: getattr(sc, f.name) for f in fields(sc)}
    for section, keys in _SCHEMA.items():
        out.write(f"[{section}]\n")
        for key in keys:
            out.write(f"{key} = {_render_value(by_name[key])}\n")
        out.write("\n")
    return out.getvalue()


def scenario_hash(sc: ScenarioConfig) -> str:
    return hashlib.sha256(render_scenario(sc).encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    """Reproducible result of one experiment.

    scalars hold fitted quantities, certificate echoes and flags; series
    hold per-time-point metrics keyed by name, all aligned with series["t"].
    wall_clock is informational and never serialized, so reruns with the
    same scenario and seed produce byte-identical files.
    """

    kind: str
    scenario: str  # scenario hash
    seed: int
    scalars: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    wall_clock: float = 0.0


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_record(rec: RunRecord) -> str:
    lines = [f"kind={rec.kind} scenario={rec.scenario} seed={rec.seed}"]
    for key in rec.scalars:
        lines.append(f"{key}={_fmt(rec.scalars[key])}")
    return "\n".join(lines) + "\n"


def render_series_csv(rec: RunRecord) -> str:
    if not rec.series:
        return ""
    names = [k for k in rec.series if k != "t"]
    header = "t," + ",".join(names)
    t = np.asarray(rec.series["t"])
    cols = [np.asarray(rec.series[k]) for k in names]
    rows = [header]
    for j in range(len(t)):
        rows.append(",".join([repr(float(t[j]))]
                             + [repr(float(c[j])) for c in cols]))
    return "\n".join(rows) + "\n"


def write_records(rec: RunRecord, path: str) -> None:
    """Write `<path>.record` (key=value lines) and `<path>.csv` series."""
    with open(f"{path}.record", "w") as fh:
        fh.write(render_record(rec))
    csv = render_series_csv(rec)
    if csv:
        with open(f"{path}.csv", "w") as fh:
            fh.write(csv)
