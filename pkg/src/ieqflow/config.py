"""Flat ``key = value`` run configuration files.

The format is line oriented: one dotted key per line, ``#`` starts a
comment, blank lines are ignored. No quoting or escaping; values round-trip
bit-exactly. Example::

    equation = cahn-hilliard
    grid.dim = 2
    grid.n1 = 64
    grid.l1 = 6.283185307179586
    grid.n2 = 64
    grid.l2 = 6.283185307179586
    potential.kind = double-well
    physics.M = 1.0
    physics.epsilon = 0.5
    time.dt = 0.001
    time.t_final = 0.1
    time.snapshot_every = 50
    pcg.rel_tol = 1e-10
    ic.kind = seeded-noise
    ic.amplitude = 0.05
    ic.mean = 0.3
    ic.seed = 1234
    output_dir = runs/demo
"""

from __future__ import annotations

from dataclasses import dataclass

from .initial_conditions import IC_KINDS
from .krylov import PcgConfig
from .potentials import (
    DOUBLE_WELL,
    FLORY_HUGGINS,
    ZERO,
    PotentialSpec,
)
from .spectral import Grid

__all__ = ["ConfigError", "TimeParams", "IcParams", "RunConfig", "parse_run_config", "load_run_config"]

EQUATIONS = ("cahn-hilliard", "allen-cahn")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class TimeParams:
    dt: float
    t_final: float
    snapshot_every: int  # 0 disables periodic snapshots (final one is always written)


@dataclass(frozen=True)
class IcParams:
    kind: str
    amplitude: float
    mean: float
    seed: int | None


@dataclass(frozen=True)
class RunConfig:
    equation: str
    grid: Grid
    potential: PotentialSpec
    mobility: float
    epsilon: float
    time: TimeParams
    pcg: PcgConfig
    ic: IcParams
    output_dir: str


_KNOWN_KEYS = {
    "equation",
    "grid.dim",
    "grid.n1",
    "grid.n2",
    "grid.l1",
    "grid.l2",
    "potential.kind",
    "potential.theta",
    "potential.sigma",
    "potential.A",
    "potential.B",
    "physics.M",
    "physics.epsilon",
    "time.dt",
    "time.t_final",
    "time.snapshot_every",
    "pcg.rel_tol",
    "pcg.abs_tol",
    "pcg.max_iters",
    "ic.kind",
    "ic.amplitude",
    "ic.mean",
    "ic.seed",
    "output_dir",
}

_POTENTIAL_KINDS = {
    "double-well": DOUBLE_WELL,
    "flory-huggins": FLORY_HUGGINS,
    "zero": ZERO,
}


def _scan(text: str, name: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{name}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{name}:{lineno}: empty value for {key!r}")
        entries[key] = (value, lineno)
    return entries


class _Reader:
    def __init__(self, entries: dict[str, tuple[str, int]], name: str):
        self.entries = entries
        self.name = name

    def _fetch(self, key: str, convert, required: bool, default):
        if key not in self.entries:
            if required:
                raise ConfigError(f"{self.name}: missing required key {key!r}")
            return default
        value, lineno = self.entries[key]
        try:
            return convert(value)
        except ValueError as exc:
            raise ConfigError(f"{self.name}:{lineno}: bad value for {key!r}: {exc}") from exc

    def string(self, key, choices=None, required=False, default=None):
        def convert(value):
            if choices is not None and value not in choices:
                raise ValueError(f"expected one of {sorted(choices)}, got {value!r}")
            return value

        return self._fetch(key, convert, required, default)

    def number(self, key, required=False, default=None):
        return self._fetch(key, float, required, default)

    def integer(self, key, required=False, default=None):
        def convert(value):
            as_float = float(value)
            as_int = int(as_float)
            if as_int != as_float:
                raise ValueError(f"expected an integer, got {value!r}")
            return as_int

        return self._fetch(key, convert, required, default)


def parse_run_config(text: str, name: str = "<config>") -> RunConfig:
    reader = _Reader(_scan(text, name), name)

    equation = reader.string("equation", choices=EQUATIONS, required=True)

    dim = reader.integer("grid.dim", required=True)
    if dim not in (1, 2):
        raise ConfigError(f"{name}: grid.dim must be 1 or 2, got {dim}")
    n1 = reader.integer("grid.n1", required=True)
    l1 = reader.number("grid.l1", required=True)
    if dim == 2:
        n2 = reader.integer("grid.n2", required=True)
        l2 = reader.number("grid.l2", required=True)
        shape, lengths = (n1, n2), (l1, l2)
    else:
        shape, lengths = (n1,), (l1,)
    try:
        grid = Grid(shape, lengths)
    except ValueError as exc:
        raise ConfigError(f"{name}: invalid grid: {exc}") from exc

    kind = _POTENTIAL_KINDS[reader.string("potential.kind", choices=_POTENTIAL_KINDS, required=True)]
    default_a = 1.0 if kind == FLORY_HUGGINS else 0.0
    lower_bound = reader.number("potential.A", default=default_a)
    shift = reader.number("potential.B", default=lower_bound + 1.0)
    try:
        potential = PotentialSpec(
            kind=kind,
            theta=reader.number("potential.theta", default=2.0),
            sigma=reader.number("potential.sigma", default=0.01),
            lower_bound=lower_bound,
            shift=shift,
        )
    except ValueError as exc:
        raise ConfigError(f"{name}: invalid potential: {exc}") from exc

    mobility = reader.number("physics.M", default=1.0)
    epsilon = reader.number("physics.epsilon", default=1.0)
    if mobility <= 0 or epsilon <= 0:
        raise ConfigError(f"{name}: physics.M and physics.epsilon must be positive")

    dt = reader.number("time.dt", required=True)
    t_final = reader.number("time.t_final", required=True)
    snapshot_every = reader.integer("time.snapshot_every", default=0)
    if dt <= 0 or t_final <= 0:
        raise ConfigError(f"{name}: time.dt and time.t_final must be positive")
    if snapshot_every < 0:
        raise ConfigError(f"{name}: time.snapshot_every must be >= 1 (or 0 to disable)")

    try:
        pcg = PcgConfig(
            rel_tol=reader.number("pcg.rel_tol", default=1e-10),
            abs_tol=reader.number("pcg.abs_tol", default=1e-14),
            max_iters=reader.integer("pcg.max_iters", default=500),
        )
    except ValueError as exc:
        raise ConfigError(f"{name}: invalid pcg block: {exc}") from exc

    ic_kind = reader.string("ic.kind", choices=IC_KINDS, required=True)
    seed = reader.integer("ic.seed", default=None)
    if ic_kind == "seeded-noise" and seed is None:
        raise ConfigError(f"{name}: ic.kind = seeded-noise requires ic.seed")
    ic = IcParams(
        kind=ic_kind,
        amplitude=reader.number("ic.amplitude", default=0.1),
        mean=reader.number("ic.mean", default=0.0),
        seed=seed,
    )

    return RunConfig(
        equation=equation,
        grid=grid,
        potential=potential,
        mobility=mobility,
        epsilon=epsilon,
        time=TimeParams(dt=dt, t_final=t_final, snapshot_every=snapshot_every),
        pcg=pcg,
        ic=ic,
        output_dir=reader.string("output_dir", default="out"),
    )


def load_run_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_run_config(text, name=str(path))
