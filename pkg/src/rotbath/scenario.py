"""Declarative scenario files: grammar, validation, canonical printing.

A scenario is an INI-style text with ``[section]`` headers and
``key = value`` lines; ``#`` starts a comment anywhere.  Sections and keys
are fixed (unknown ones are rejected with the offending name and line);
``mode``, ``case`` and ``quantum`` are repeatable list keys.  Scalars are
typed per key: floats accept ``inf``, booleans are ``true``/``false``, and
two range forms exist, ``start:stop:count`` for energy grids and
``min:max`` for integer angular-momentum ranges.

The full grammar with defaults is documented in the README.  Parsing
applies every default, so ``parse_scenario(print_scenario(s)) == s``
exactly; the canonical text is also what run outputs embed and hash.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

RUN_KINDS = (
    "rates",
    "kinetics",
    "birthdeath",
    "gillespie",
    "thermo",
    "spectrum",
    "shear",
    "bh-ledger",
)
BATH_FAMILIES = ("ohmic", "flat", "hawking", "correlation")
STATISTICS = ("bose", "fermi")

#: kinds that evaluate field modes against a bath
MODE_KINDS = ("rates", "kinetics", "birthdeath", "gillespie", "thermo", "spectrum")


class ScenarioError(ValueError):
    """Configuration problem, with the source line (and column when syntactic)."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class BathConfig:
    family: str = "ohmic"
    beta: float = 1.0
    omega_rot: float = 0.0
    amplitude: float = 1.0
    exponent: float = 1.0
    cutoff: float = 10.0
    level: float = 1.0
    formfactor: float = 1.0
    file: str | None = None


@dataclass(frozen=True)
class ExplicitMode:
    omega: float
    m: int
    alpha: str = "0"
    statistics: str = "bose"


@dataclass(frozen=True)
class ModeGrid:
    omega_start: float
    omega_stop: float
    omega_count: int
    m_min: int
    m_max: int
    statistics: str = "bose"
    alpha: str = "0"


@dataclass(frozen=True)
class RunConfig:
    kind: str
    t_max: float = 10.0
    points: int = 200
    seed: int | None = None
    n_traj: int = 1000
    kappa: float = 0.0
    tail_tol: float = 1e-10
    ceiling: float = 1e12
    nbar0: float | None = None
    n0: int | None = None
    bins: int = 50
    snapshots: int = 5
    sample_paths: int = 0
    fd_step: float | None = None


@dataclass(frozen=True)
class ShearCase:
    V: float
    v: float
    k: float = 1.0


@dataclass(frozen=True)
class QuantumLine:
    omega: float
    m: int
    count: int


@dataclass(frozen=True)
class QuantaConfig:
    entries: tuple[QuantumLine, ...]
    t_hawking: float = 1.0


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    plots: bool = False


@dataclass(frozen=True)
class Scenario:
    run: RunConfig
    bath: BathConfig = field(default_factory=BathConfig)
    modes: tuple[ExplicitMode, ...] | ModeGrid | None = None
    shear: tuple[ShearCase, ...] = ()
    quanta: QuantaConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)


# ---------------------------------------------------------------------------
# Low-level line parsing
# ---------------------------------------------------------------------------

_SECTIONS = ("bath", "modes", "run", "shear", "quanta", "output")
_KEYS = {
    "bath": {"family", "beta", "omega_rot", "amplitude", "exponent", "cutoff",
             "level", "formfactor", "file"},
    "modes": {"mode", "omega", "m", "statistics", "alpha"},
    "run": {"kind", "t_max", "points", "seed", "n_traj", "kappa", "tail_tol",
            "ceiling", "nbar0", "n0", "bins", "snapshots", "sample_paths", "fd_step"},
    "shear": {"case"},
    "quanta": {"quantum", "t_h"},
    "output": {"dir", "plots"},
}
_REPEATABLE = {"mode", "case", "quantum"}


def _tokenize(text: str):
    """Yield (section, key, value, line_number) entries; raise on bad syntax."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ScenarioError("malformed section header", lineno, col)
            name = stripped[1:-1].strip()
            if name not in _SECTIONS:
                raise ScenarioError(f"unknown section [{name}]", lineno)
            section = name
            continue
        if "=" not in stripped:
            raise ScenarioError("expected 'key = value' or '[section]'", lineno, col)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ScenarioError("expected 'key = value'", lineno, col)
        if section is None:
            raise ScenarioError(f"key {key!r} appears before any [section]", lineno, col)
        if key not in _KEYS[section]:
            raise ScenarioError(f"unknown key {key!r} in [{section}]", lineno)
        yield section, key, value, lineno


def _float(value: str, key: str, line: int) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ScenarioError(f"{key}: not a number: {value!r}", line) from None
    if math.isnan(x):
        raise ScenarioError(f"{key}: NaN is not allowed", line)
    return x


def _int(value: str, key: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"{key}: not an integer: {value!r}", line) from None


def _bool(value: str, key: str, line: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    raise ScenarioError(f"{key}: expected true/false, got {value!r}", line)


def _parts(value: str) -> list[str]:
    return [p.strip() for p in value.split(",")]


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate one scenario; defaults are materialized."""
    single: dict[tuple[str, str], tuple[str, int]] = {}
    repeated: dict[str, list[tuple[str, int]]] = {k: [] for k in _REPEATABLE}
    for section, key, value, line in _tokenize(text):
        if key in _REPEATABLE:
            repeated[key].append((value, line))
        else:
            if (section, key) in single:
                raise ScenarioError(f"duplicate key {key!r} in [{section}]", line)
            single[(section, key)] = (value, line)

    def get(section: str, key: str):
        return single.get((section, key))

    # --- run -------------------------------------------------------------
    kind_entry = get("run", "kind")
    if kind_entry is None:
        raise ScenarioError("missing required key 'kind' in [run]")
    kind, kind_line = kind_entry
    if kind not in RUN_KINDS:
        raise ScenarioError(f"kind: expected one of {', '.join(RUN_KINDS)}", kind_line)

    run = RunConfig(kind=kind)
    numeric_run = {
        "t_max": (_float, "t_max"),
        "kappa": (_float, "kappa"),
        "tail_tol": (_float, "tail_tol"),
        "ceiling": (_float, "ceiling"),
        "nbar0": (_float, "nbar0"),
        "fd_step": (_float, "fd_step"),
        "points": (_int, "points"),
        "seed": (_int, "seed"),
        "n_traj": (_int, "n_traj"),
        "n0": (_int, "n0"),
        "bins": (_int, "bins"),
        "snapshots": (_int, "snapshots"),
        "sample_paths": (_int, "sample_paths"),
    }
    for key, (conv, attr) in numeric_run.items():
        entry = get("run", key)
        if entry is not None:
            run = replace(run, **{attr: conv(entry[0], key, entry[1])})

    def bad(key, msg, entry=None):
        raise ScenarioError(f"{key}: {msg}", entry[1] if entry else None)

    if run.t_max <= 0.0:
        bad("t_max", "must be positive", get("run", "t_max"))
    if run.points < 2:
        bad("points", "must be at least 2", get("run", "points"))
    if run.kappa < 0.0:
        bad("kappa", "must be >= 0", get("run", "kappa"))
    if run.tail_tol <= 0.0:
        bad("tail_tol", "must be positive", get("run", "tail_tol"))
    if run.ceiling <= 0.0:
        bad("ceiling", "must be positive", get("run", "ceiling"))
    if run.n_traj < 1:
        bad("n_traj", "must be >= 1", get("run", "n_traj"))
    if run.bins < 1:
        bad("bins", "must be >= 1", get("run", "bins"))
    if run.snapshots < 2:
        bad("snapshots", "must be >= 2", get("run", "snapshots"))
    if run.sample_paths < 0:
        bad("sample_paths", "must be >= 0", get("run", "sample_paths"))
    if run.nbar0 is not None and run.nbar0 < 0.0:
        bad("nbar0", "must be >= 0", get("run", "nbar0"))
    if run.n0 is not None and run.n0 < 0:
        bad("n0", "must be >= 0", get("run", "n0"))
    if run.fd_step is not None and run.fd_step <= 0.0:
        bad("fd_step", "must be positive", get("run", "fd_step"))
    if run.nbar0 is not None and run.n0 is not None:
        raise ScenarioError("give either nbar0 or n0, not both")
    if kind == "gillespie" and run.seed is None:
        raise ScenarioError("gillespie runs require an explicit seed in [run]")

    # --- bath ------------------------------------------------------------
    bath = BathConfig()
    entry = get("bath", "family")
    if entry is not None:
        if entry[0] not in BATH_FAMILIES:
            raise ScenarioError(
                f"family: expected one of {', '.join(BATH_FAMILIES)}", entry[1]
            )
        bath = replace(bath, family=entry[0])
    for key in ("beta", "omega_rot", "amplitude", "exponent", "cutoff", "level", "formfactor"):
        entry = get("bath", key)
        if entry is not None:
            bath = replace(bath, **{key: _float(entry[0], key, entry[1])})
    entry = get("bath", "file")
    if entry is not None:
        bath = replace(bath, file=entry[0])
    if not (bath.beta > 0.0):
        bad("beta", "must be > 0 (inf allowed)", get("bath", "beta"))
    if bath.omega_rot < 0.0:
        bad("omega_rot", "must be >= 0", get("bath", "omega_rot"))
    if bath.family == "correlation" and bath.file is None:
        raise ScenarioError("correlation bath requires 'file' in [bath]")

    # --- modes -----------------------------------------------------------
    statistics = "bose"
    entry = get("modes", "statistics")
    if entry is not None:
        if entry[0] not in STATISTICS:
            raise ScenarioError("statistics: expected bose or fermi", entry[1])
        statistics = entry[0]
    alpha = "0"
    entry = get("modes", "alpha")
    if entry is not None:
        alpha = entry[0]

    modes: tuple[ExplicitMode, ...] | ModeGrid | None = None
    grid_keys = [k for k in ("omega", "m") if get("modes", k) is not None]
    if repeated["mode"] and grid_keys:
        raise ScenarioError("[modes] mixes explicit 'mode' lines with grid keys")
    if repeated["mode"]:
        explicit = []
        for value, line in repeated["mode"]:
            parts = _parts(value)
            if not 2 <= len(parts) <= 4:
                raise ScenarioError("mode: expected 'omega, m[, alpha[, statistics]]'", line)
            omega = _float(parts[0], "mode.omega", line)
            m = _int(parts[1], "mode.m", line)
            a = parts[2] if len(parts) >= 3 else alpha
            stat = parts[3] if len(parts) == 4 else statistics
            if stat not in STATISTICS:
                raise ScenarioError("mode: statistics must be bose or fermi", line)
            if omega < 0.0:
                raise ScenarioError("mode: omega must be >= 0", line)
            explicit.append(ExplicitMode(omega, m, a, stat))
        modes = tuple(explicit)
    elif grid_keys:
        if len(grid_keys) != 2:
            raise ScenarioError("[modes] grid needs both 'omega' and 'm'")
        value, line = get("modes", "omega")
        parts = value.split(":")
        if len(parts) != 3:
            raise ScenarioError("omega: expected 'start:stop:count'", line)
        omega_start = _float(parts[0], "omega", line)
        omega_stop = _float(parts[1], "omega", line)
        omega_count = _int(parts[2], "omega", line)
        if omega_start < 0.0 or omega_stop < omega_start or omega_count < 1:
            raise ScenarioError("omega: need 0 <= start <= stop and count >= 1", line)
        value, line = get("modes", "m")
        parts = value.split(":")
        if len(parts) != 2:
            raise ScenarioError("m: expected 'min:max'", line)
        m_min = _int(parts[0], "m", line)
        m_max = _int(parts[1], "m", line)
        if m_max < m_min:
            raise ScenarioError("m: need min <= max", line)
        modes = ModeGrid(omega_start, omega_stop, omega_count, m_min, m_max, statistics, alpha)

    if kind in MODE_KINDS and modes is None:
        raise ScenarioError(f"{kind} runs need a [modes] section (mode lines or a grid)")

    # --- shear -----------------------------------------------------------
    shear = []
    for value, line in repeated["case"]:
        parts = _parts(value)
        if not 2 <= len(parts) <= 3:
            raise ScenarioError("case: expected 'V, v[, k]'", line)
        V = _float(parts[0], "case.V", line)
        v = _float(parts[1], "case.v", line)
        k = _float(parts[2], "case.k", line) if len(parts) == 3 else 1.0
        if V <= 0.0 or v <= 0.0 or k <= 0.0:
            raise ScenarioError("case: V, v, k must be positive", line)
        shear.append(ShearCase(V, v, k))
    if kind == "shear" and not shear:
        raise ScenarioError("shear runs need at least one 'case' in [shear]")

    # --- quanta ----------------------------------------------------------
    quanta = None
    quantum_lines = []
    for value, line in repeated["quantum"]:
        parts = _parts(value)
        if len(parts) != 3:
            raise ScenarioError("quantum: expected 'omega, m, count'", line)
        omega = _float(parts[0], "quantum.omega", line)
        m = _int(parts[1], "quantum.m", line)
        count = _int(parts[2], "quantum.count", line)
        if omega < 0.0 or count < 0:
            raise ScenarioError("quantum: omega and count must be >= 0", line)
        quantum_lines.append(QuantumLine(omega, m, count))
    t_h_entry = get("quanta", "t_h")
    if quantum_lines or t_h_entry is not None:
        t_h = _float(t_h_entry[0], "t_h", t_h_entry[1]) if t_h_entry else 1.0
        if t_h <= 0.0:
            bad("t_h", "must be positive", t_h_entry)
        quanta = QuantaConfig(tuple(quantum_lines), t_h)
    if kind == "bh-ledger" and (quanta is None or not quanta.entries):
        raise ScenarioError("bh-ledger runs need 'quantum' lines in [quanta]")

    # --- output ----------------------------------------------------------
    output = OutputConfig()
    entry = get("output", "dir")
    if entry is not None:
        output = replace(output, dir=entry[0])
    entry = get("output", "plots")
    if entry is not None:
        output = replace(output, plots=_bool(entry[0], "plots", entry[1]))

    return Scenario(run=run, bath=bath, modes=modes, shear=tuple(shear),
                    quanta=quanta, output=output)


# ---------------------------------------------------------------------------
# Canonical printing
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def print_scenario(s: Scenario) -> str:
    """Canonical text form; parsing it reproduces ``s`` exactly."""
    lines = ["[bath]"]
    for key in ("family", "beta", "omega_rot", "amplitude", "exponent",
                "cutoff", "level", "formfactor"):
        lines.append(f"{key} = {_fmt(getattr(s.bath, key))}")
    if s.bath.file is not None:
        lines.append(f"file = {s.bath.file}")

    if s.modes is not None:
        lines.append("")
        lines.append("[modes]")
        if isinstance(s.modes, ModeGrid):
            g = s.modes
            lines.append(f"omega = {_fmt(g.omega_start)}:{_fmt(g.omega_stop)}:{g.omega_count}")
            lines.append(f"m = {g.m_min}:{g.m_max}")
            lines.append(f"statistics = {g.statistics}")
            lines.append(f"alpha = {g.alpha}")
        else:
            for mode in s.modes:
                lines.append(
                    f"mode = {_fmt(mode.omega)}, {mode.m}, {mode.alpha}, {mode.statistics}"
                )

    lines.append("")
    lines.append("[run]")
    lines.append(f"kind = {s.run.kind}")
    for key in ("t_max", "points", "seed", "n_traj", "kappa", "tail_tol", "ceiling",
                "nbar0", "n0", "bins", "snapshots", "sample_paths", "fd_step"):
        value = getattr(s.run, key)
        if value is None:
            continue
        lines.append(f"{key} = {_fmt(value)}")

    if s.shear:
        lines.append("")
        lines.append("[shear]")
        for case in s.shear:
            lines.append(f"case = {_fmt(case.V)}, {_fmt(case.v)}, {_fmt(case.k)}")

    if s.quanta is not None:
        lines.append("")
        lines.append("[quanta]")
        for q in s.quanta.entries:
            lines.append(f"quantum = {_fmt(q.omega)}, {q.m}, {q.count}")
        lines.append(f"t_h = {_fmt(s.quanta.t_hawking)}")

    lines.append("")
    lines.append("[output]")
    lines.append(f"dir = {s.output.dir}")
    lines.append(f"plots = {_fmt(s.output.plots)}")
    return "\n".join(lines) + "\n"


def scenario_hash(s: Scenario) -> str:
    """SHA-256 of the canonical text; identifies the run in output headers."""
    return hashlib.sha256(print_scenario(s).encode()).hexdigest()
