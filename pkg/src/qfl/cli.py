"""``qfl`` command-line runner: scenario configs in, deterministic tables out."""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import audit, oracles
from .dynamics import MixedState, PureState, adiabatic_decay, default_horizon, initial_state, propagate
from .errors import ConfigError, NumericalError
from .metrology import (
    maximize_qfi_over_time,
    qfi_matrix_steady,
    qfi_time_series,
    sld_residual,
    steady_pair,
    qfi,
)
from .model import CavityQubitParams, FeedbackParams, QubitModelParams, qubit_liouvillian
from .qmat import eigvalsh

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

ANGLE_LITERALS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/3": math.pi / 3, "pi/4": math.pi / 4}
FM_SCAN_CAP = 1000.0  # in units of 1/gamma


# --- tables -----------------------------------------------------------------


@dataclass
class ScanTable:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} cells, table has {len(self.columns)} columns")


def format_number(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return f"{x:#.12g}"


def _is_complex(v) -> bool:
    return isinstance(v, (complex, np.complexfloating))


def _expand(table: ScanTable) -> tuple[list[str], list[list]]:
    """Split complex columns into <name>_re / <name>_im."""
    complex_cols = {j for j in range(len(table.columns)) if any(_is_complex(r[j]) for r in table.rows)}
    names: list[str] = []
    for j, c in enumerate(table.columns):
        names.extend([f"{c}_re", f"{c}_im"] if j in complex_cols else [c])
    rows = []
    for r in table.rows:
        out = []
        for j, v in enumerate(r):
            if j in complex_cols:
                z = complex(v) if v is not None else None
                out.extend([None, None] if z is None else [z.real, z.imag])
            else:
                out.append(v)
        rows.append(out)
    return names, rows


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_number(v)


def _json_cell(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    text = format_number(v)
    return text if math.isfinite(float(v)) else "null"


def render_table(table: ScanTable, fmt: str = "csv") -> str:
    names, rows = _expand(table)
    if fmt == "csv":
        lines = [",".join(names)]
        lines += [",".join(_csv_cell(v) for v in r) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        cols = "[" + ", ".join(json.dumps(n) for n in names) + "]"
        body = ",\n    ".join("[" + ", ".join(_json_cell(v) for v in r) + "]" for r in rows)
        return '{\n  "columns": ' + cols + ',\n  "rows": [\n    ' + body + "\n  ]\n}\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_table(table: ScanTable, fmt: str = "csv", destination: str | None = None) -> None:
    """Write ``table`` to a path, or to stdout when destination is None or "-"."""
    text = render_table(table, fmt)
    if destination in (None, "-"):
        sys.stdout.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- configuration ------------------------------------------------------------


def parse_angle(text: str, key: str) -> float:
    s = str(text).strip().lower().replace(" ", "")
    if s in ANGLE_LITERALS:
        return ANGLE_LITERALS[s]
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse angle {text!r} (use radians or pi, pi/2, pi/3, pi/4)") from None


@dataclass(frozen=True)
class Scenario:
    gamma: float = 0.1
    omega: float = 0.0
    A: float = math.pi
    beta: float = 0.0
    initial: PureState | MixedState = PureState(math.pi / 4)
    t_max: float = 100.0
    dt: float = 0.01
    output_every: int = 100
    angle_text: dict = field(default_factory=dict, compare=False)

    @property
    def model(self) -> QubitModelParams:
        return QubitModelParams(self.gamma, self.omega)

    @property
    def feedback(self) -> FeedbackParams:
        return FeedbackParams(self.A, self.beta)

    def times(self) -> np.ndarray:
        spacing = self.dt * self.output_every
        n = int(math.floor(self.t_max / spacing + 1e-9))
        return spacing * np.arange(n + 1)

    def to_ini(self) -> str:
        def angle(name, value):
            return self.angle_text.get(name, repr(value))

        lines = [
            "[model]",
            f"gamma = {self.gamma!r}",
            f"omega = {self.omega!r}",
            "",
            "[feedback]",
            f"A = {angle('A', self.A)}",
            f"beta = {angle('beta', self.beta)}",
            "",
            "[initial]",
        ]
        if isinstance(self.initial, PureState):
            lines += ["kind = pure", f"theta = {angle('theta', self.initial.theta)}"]
        else:
            lines += ["kind = mixed", f"epsilon = {self.initial.epsilon!r}"]
        lines += [
            "",
            "[run]",
            f"t_max = {self.t_max!r}",
            f"dt = {self.dt!r}",
            f"output_every = {self.output_every}",
        ]
        return "\n".join(lines) + "\n"


_SCHEMA = {
    "model": {"gamma", "omega"},
    "feedback": {"A", "beta"},
    "initial": {"kind", "theta", "epsilon"},
    "run": {"t_max", "dt", "output_every"},
}


def _number(sec, key, text, cast=float):
    try:
        return cast(text)
    except ValueError:
        raise ConfigError(f"{sec}.{key}: expected a number, got {text!r}") from None


def parse_config(text: str) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#", ";"),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")

    def need(sec, key):
        if not cp.has_option(sec, key):
            raise ConfigError(f"missing required key {sec}.{key}")
        return cp.get(sec, key).strip()

    angle_text = {}
    gamma = _number("model", "gamma", need("model", "gamma"))
    omega = _number("model", "omega", need("model", "omega"))
    a_txt, b_txt = need("feedback", "A"), need("feedback", "beta")
    A, beta = parse_angle(a_txt, "feedback.A"), parse_angle(b_txt, "feedback.beta")
    angle_text.update(A=a_txt, beta=b_txt)

    kind = need("initial", "kind").lower()
    if kind == "pure":
        if cp.has_option("initial", "epsilon"):
            raise ConfigError("initial.epsilon is not allowed for kind = pure")
        th_txt = need("initial", "theta")
        init = PureState(parse_angle(th_txt, "initial.theta"))
        angle_text["theta"] = th_txt
    elif kind == "mixed":
        if cp.has_option("initial", "theta"):
            raise ConfigError("initial.theta is not allowed for kind = mixed")
        eps = _number("initial", "epsilon", need("initial", "epsilon"))
        if not 0 <= eps < 1:
            raise ConfigError(f"initial.epsilon must lie in [0, 1), got {eps}")
        init = MixedState(eps)
    else:
        raise ConfigError(f"initial.kind must be 'pure' or 'mixed', got {kind!r}")

    t_max = _number("run", "t_max", need("run", "t_max"))
    dt = _number("run", "dt", need("run", "dt"))
    every = _number("run", "output_every", need("run", "output_every"), int)
    if gamma < 0:
        raise ConfigError(f"model.gamma must be >= 0, got {gamma}")
    if omega < 0:
        raise ConfigError(f"model.omega must be >= 0, got {omega}")
    if not dt > 0:
        raise ConfigError(f"run.dt must be > 0, got {dt}")
    if t_max < 0:
        raise ConfigError(f"run.t_max must be >= 0, got {t_max}")
    if every < 1:
        raise ConfigError(f"run.output_every must be >= 1, got {every}")
    return Scenario(gamma, omega, A, beta, init, t_max, dt, every, angle_text)


def load_scenario(path: str | None) -> Scenario:
    if path is None:
        return Scenario()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


# --- subcommands --------------------------------------------------------------


def _grid_map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _clip_eig(x: float) -> float:
    return 0.0 if -1e-10 <= x < 0 else x


def cmd_evolve(sc: Scenario, args) -> ScanTable:
    L = qubit_liouvillian(sc.model, sc.feedback)
    times = sc.times()
    states = propagate(L, initial_state(sc.initial), times, dt=sc.dt)
    rows = []
    for t, rho in zip(times, states):
        w = eigvalsh(rho)
        rows.append((float(t), rho[0, 0].real, complex(rho[0, 1]), _clip_eig(w[0]), w[-1],
                     float(np.trace(rho @ rho).real)))
    return ScanTable(["t", "rho_ee", "rho_eg", "eig_min", "eig_max", "purity"], rows)


def qfi_oracle_for(sc: Scenario) -> Callable[[float], float] | None:
    """The closed form that applies to the scenario, if any."""
    if sc.omega != 0 or sc.beta != 0:
        return None
    off = math.isclose(math.cos(sc.A) ** 2, 1.0, abs_tol=1e-12)
    g = sc.gamma
    if isinstance(sc.initial, PureState):
        if not math.isclose(sc.initial.theta, math.pi / 4, abs_tol=1e-12):
            return None
        if off:
            return lambda t: oracles.qfi_no_feedback(t, g)
        if math.isclose(math.cos(sc.A), 0.0, abs_tol=1e-12):
            return lambda t: oracles.qfi_dephasing_case(t, g) if t > 0 else 0.0
        return None
    if off:
        eps = sc.initial.epsilon
        return lambda t: oracles.qfi_mixed_limits(t, g, eps, "no-feedback")
    return None


def cmd_qfi(sc: Scenario, args) -> ScanTable:
    times = sc.times()
    from .dynamics import propagate_with_sensitivity
    from .model import qubit_liouvillian_dgamma

    L = qubit_liouvillian(sc.model, sc.feedback)
    dL = qubit_liouvillian_dgamma(sc.model, sc.feedback)
    pairs = propagate_with_sensitivity(L, dL, initial_state(sc.initial), times, dt=sc.dt)
    oracle = qfi_oracle_for(sc)
    rows = []
    for t, p in zip(times, pairs):
        res = qfi(p)
        rows.append((float(t), res.value, None if oracle is None else oracle(float(t)),
                     sld_residual(p, res.sld)))
    return ScanTable(["t", "qfi_numeric", "qfi_oracle", "sld_residual"], rows)


def fm_window(gamma: float, A: float) -> tuple[float, float]:
    return 0.0, min(default_horizon(gamma, A), FM_SCAN_CAP / gamma)


def cmd_fm_scan(sc: Scenario, args) -> ScanTable:
    a_grid = np.linspace(args.a_min, args.a_max, args.a_steps)

    def point(A):
        res = maximize_qfi_over_time(sc.model, FeedbackParams(float(A), sc.beta), sc.initial,
                                     fm_window(sc.gamma, float(A)), dt=sc.dt)
        return float(A), res.f_max, res.t_star

    return ScanTable(["A", "f_max", "t_star"], _grid_map(point, a_grid, args.jobs))


def cmd_steady_scan(sc: Scenario, args) -> ScanTable:
    grid = np.linspace(args.omega_min, args.omega_max, args.omega_steps)

    def point(omega):
        pair = steady_pair(sc.gamma, float(omega), sc.feedback)
        return float(omega), qfi(pair).value, pair.rho[0, 0].real, complex(pair.rho[0, 1])

    return ScanTable(["omega", "qfi_steady", "rho_ee", "rho_eg"], _grid_map(point, grid, args.jobs))


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def cmd_qfim(sc: Scenario, args) -> ScanTable:
    points = [(g, k) for g in _floats(args.g, "--g") for k in _floats(args.kappa, "--kappa")]
    omega = sc.omega if sc.omega > 0 else 0.1

    def point(gk):
        g, k = gk
        F = qfi_matrix_steady(g, k, omega, sc.feedback).entries
        return g, k, F[0, 0], F[0, 1], F[1, 1], float(np.linalg.det(F))

    return ScanTable(["g", "kappa", "f_gg", "f_gk", "f_kk", "det"], _grid_map(point, points, args.jobs))


def cmd_adiabatic(sc: Scenario, args) -> ScanTable:
    points = [(g, k, int(n)) for g in _floats(args.g, "--g") for k in _floats(args.kappa, "--kappa")
              for n in _floats(args.nmax, "--nmax")]

    def point(p):
        g, k, n = p
        fit = adiabatic_decay(CavityQubitParams(g=g, kappa=k, n_max=n))
        return g, k, n, fit.rate, g * g / k, fit.rate / (g * g / k), fit.max_residual

    return ScanTable(["g", "kappa", "n_max", "rate_fit", "rate_eliminated", "ratio", "fit_residual"],
                     _grid_map(point, points, args.jobs))


def cmd_oracle(sc: Scenario, args) -> ScanTable:
    g, A = sc.gamma, sc.A
    eps = sc.initial.epsilon if isinstance(sc.initial, MixedState) else None
    rows = []
    for t in sc.times():
        t = float(t)
        ee, eg = oracles.rho_with_feedback(t, g, A)
        pos = t > 0
        rows.append((
            t, ee, eg,
            oracles.qfi_no_feedback(t, g),
            oracles.qfi_dephasing_case(t, g) if pos else 0.0,
            oracles.qfi_longtime_feedback(t, g),
            None if eps is None else oracles.qfi_mixed_as_printed(t, g, eps) if pos else None,
            None if eps is None else oracles.qfi_mixed_limits(t, g, eps, "small-t"),
            None if eps is None else oracles.qfi_mixed_limits(t, g, eps, "long-t"),
            None if eps is None else oracles.qfi_mixed_limits(t, g, eps, "no-feedback"),
        ))
    cols = ["t", "rho_ee", "rho_eg", "qfi_no_feedback", "qfi_dephasing", "qfi_longtime_feedback",
            "qfi_mixed_as_printed", "qfi_mixed_small_t", "qfi_mixed_long_t", "qfi_mixed_no_feedback"]
    return ScanTable(cols, rows)


def cmd_verify(sc: Scenario, args) -> tuple[ScanTable, int]:
    checks = audit.run_audit()
    table = ScanTable(audit.COLUMNS, audit.audit_rows(checks))
    return table, EXIT_OK if audit.audit_passed(checks) else EXIT_NUMERIC


COMMANDS = {
    "evolve": cmd_evolve,
    "qfi": cmd_qfi,
    "fm-scan": cmd_fm_scan,
    "steady-scan": cmd_steady_scan,
    "qfim": cmd_qfim,
    "adiabatic": cmd_adiabatic,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfl", description="Quantum Fisher information of a feedback-controlled qubit.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="INI scenario file with [model] [feedback] [initial] [run]")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for grid evaluation")
    p.add_argument("--dump-config", action="store_true", help="print the resolved scenario and exit")
    p.add_argument("--a-min", default="0")
    p.add_argument("--a-max", default="pi")
    p.add_argument("--a-steps", type=int, default=37)
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=1.0)
    p.add_argument("--omega-steps", type=int, default=101)
    p.add_argument("--g", default="0.02")
    p.add_argument("--kappa", default="1.0")
    p.add_argument("--nmax", default="2")
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config)
        if args.dump_config:
            text = sc.to_ini()
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        args.a_min = parse_angle(args.a_min, "--a-min")
        args.a_max = parse_angle(args.a_max, "--a-max")
        if args.a_steps < 1 or args.omega_steps < 1:
            raise ConfigError("--a-steps and --omega-steps must be >= 1")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        result = COMMANDS[args.command](sc, args)
        table, code = result if isinstance(result, tuple) else (result, EXIT_OK)
    except ConfigError as exc:
        print(f"qfl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError) as exc:
        print(f"qfl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qfl: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        write_table(table, args.format, args.out)
    except OSError as exc:
        print(f"qfl: cannot write {exc.filename or args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_NUMERIC
    return code


def main() -> None:
    sys.exit(run())
