"""Command-line front end.

Every command reads an optional JSON config (``--config``) and then applies
flag overrides.  Exit codes: 0 success, 1 a check failed, 2 bad usage or
config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import adversary, protocol, solver, verify
from .config import FORMATS, RunConfig
from .errors import CoinFlipError, ConfigError
from .fock import FockBasis

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

HONEST_TOL = 1e-10
ORACLE_TOL = 1e-9

SWEEP_FIELDS = (
    "d_km", "x", "y", "z", "p_h", "p_ab", "p_d_quantum", "p_d_classical",
    "l_one", "advantage", "converged", "error",
)

# flag name -> (RunConfig field, type)
PARAM_FLAGS = {
    "--x": ("x", float),
    "--y": ("y", float),
    "--z": ("z", float),
    "--eta-t": ("eta_t", float),
    "--eta-f-a": ("eta_f_a", float),
    "--eta-f-b": ("eta_f_b", float),
    "--eta-d-a": ("eta_d_a", float),
    "--eta-d-b": ("eta_d_b", float),
    "--p-dc": ("p_dc", float),
    "--detector-eff": ("detector_eff", float),
    "--distance-km": ("distance_km", float),
    "--attenuation": ("attenuation_db_per_km", float),
    "--switch-time-ns": ("switch_time_ns", float),
    "--group-velocity": ("group_velocity_km_per_s", float),
    "--d-min": ("d_min", float),
    "--d-max": ("d_max", float),
    "--d-step": ("d_step", float),
    "--truncation": ("truncation", int),
}


class CommandFailed(Exception):
    """A check inside a command failed; maps to exit code 1."""


# formatting -------------------------------------------------------------------


def fmt(value: Any) -> str:
    """Locale-independent scalar formatting with 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def to_csv(rows: Sequence[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([fmt(row.get(f)) for f in fields])
    return buf.getvalue()


def to_table(rows: Sequence[dict], fields: Sequence[str]) -> str:
    cells = [list(fields)] + [[fmt(r.get(f)) for f in fields] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(fields))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def render(fmt_name: str, rows: list[dict], fields: Sequence[str], payload: Any = None) -> str:
    if fmt_name == "csv":
        return to_csv(rows, fields)
    if fmt_name == "json":
        return to_json(rows if payload is None else payload)
    return to_table(rows, fields)


# commands ---------------------------------------------------------------------


def cmd_honest(cfg: RunConfig) -> tuple[str, int]:
    params, losses = cfg.protocol_params(), cfg.loss_budget()
    closed = protocol.honest_closed_form(params, losses)
    try:
        simulated = protocol.honest_simulated(params, losses, cfg.honest_basis())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dev = closed.max_deviation(simulated)
    fields = ("source", "p_alice_wins", "p_bob_wins", "p_abort")
    rows = [
        {"source": "closed_form", **closed.to_dict()},
        {"source": "simulated", **simulated.to_dict()},
    ]
    payload = {
        "params": {"x": params.x, "y": params.y, "z": params.z},
        "closed_form": closed.to_dict(),
        "simulated": simulated.to_dict(),
        "max_deviation": dev,
    }
    fmt_name = cfg.output_format()
    text = render(fmt_name, rows, fields, payload)
    if fmt_name == "table":
        text += f"max deviation: {dev:.3e}\n"
    return text, EXIT_OK if dev <= HONEST_TOL else EXIT_FAIL


def cmd_cheat(cfg: RunConfig) -> tuple[str, int]:
    params, losses = cfg.protocol_params(), cfg.loss_budget()
    report = adversary.cheat_report(params, losses)
    row: dict[str, Any] = {
        "x": params.x,
        "y": params.y,
        "z": params.z,
        "p_d_alice": report.p_d_alice,
        "p_d_bob": report.p_d_bob,
        "l_one": report.l_one,
        "epsilon": report.bias,
    }
    status = EXIT_OK
    if cfg.oracle:
        cap = cfg.truncation or report.l_one + 2
        try:
            value, state = adversary.alice_cheat_bruteforce(params, losses, FockBasis(3, cap))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        analytic = adversary.alice_optimal_state(params, losses, FockBasis(2, cap))
        dev = abs(value - report.p_d_alice)
        row.update(
            oracle_value=value,
            oracle_deviation=dev,
            oracle_fidelity=state.fidelity_with_pure(analytic),
        )
        if dev > ORACLE_TOL:
            status = EXIT_FAIL
    fields = list(row)
    fmt_name = cfg.output_format()
    return render(fmt_name, [row], fields, row), status


def cmd_solve(cfg: RunConfig) -> tuple[str, int]:
    losses = cfg.loss_budget()
    result = solver.solve_fair_balanced(cfg.solver_z(), losses)
    row = result.to_dict()
    fields = list(row)
    return render(cfg.output_format(), [row], fields, row), EXIT_OK


def sweep_rows(rows: Sequence[solver.SweepRow]) -> list[dict]:
    out = []
    for r in rows:
        d = {"d_km": r.d_km, "error": r.error}
        if r.ok:
            d.update({k: v for k, v in r.result.to_dict().items() if k in SWEEP_FIELDS})
        out.append(d)
    return out


def cmd_sweep(cfg: RunConfig, workers: int = 1) -> tuple[str, int]:
    try:
        rows = solver.sweep(
            cfg.sweep_distances(),
            cfg.solver_z(),
            cfg.sweep_detector_eff(),
            cfg.link_model(0.0),
            workers=workers,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    data = sweep_rows(rows)
    fmt_name = cfg.output_format("csv")
    text = render(fmt_name, data, SWEEP_FIELDS)
    if fmt_name == "table":
        cross = solver.crossover_distance(rows)
        text += f"crossover: {'none' if cross is None else fmt(cross) + ' km'}\n"
    return text, EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def cmd_scf(cfg: RunConfig) -> tuple[str, int]:
    row = adversary.scf_solve().to_dict()
    return render(cfg.output_format(), [row], list(row), row), EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    results = verify.run_all()
    rows = [
        {"module": r.module, "check": r.name, "status": "PASS" if r.passed else "FAIL", "detail": r.detail}
        for r in results
    ]
    n_pass = sum(r.passed for r in results)
    n_fail = len(results) - n_pass
    payload = {"passed": n_pass, "failed": n_fail, "checks": rows}
    fmt_name = cfg.output_format()
    text = render(fmt_name, rows, ("module", "check", "status", "detail"), payload)
    if fmt_name == "table":
        text += f"{n_pass} passed, {n_fail} failed\n"
    return text, EXIT_OK if n_fail == 0 else EXIT_FAIL


COMMANDS = {
    "honest": (cmd_honest, "honest run: closed form vs Fock simulation"),
    "cheat": (cmd_cheat, "cheating probabilities (with --oracle: eigen check)"),
    "solve": (cmd_solve, "fair and balanced operating point"),
    "sweep": (cmd_sweep, "solved operating points over distance"),
    "scf": (cmd_scf, "strong coin flip parameters and bias"),
    "verify": (cmd_verify, "run the invariant suite"),
}


# argument handling ------------------------------------------------------------


def _distances(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad distance list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--oracle", action="store_true", default=None,
                        help="also run the brute-force eigen oracle")
    for flag, (dest, typ) in PARAM_FLAGS.items():
        common.add_argument(flag, dest=dest, type=typ, metavar=dest.upper())
    common.add_argument("--distances", type=_distances, help="comma-separated distances in km")

    parser = argparse.ArgumentParser(
        prog="photonic-coinflip",
        description="Single-photon weak coin flipping: honest, cheating and solved operating points.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "sweep":
            p.add_argument("--workers", type=int, default=1, help="parallel solver threads")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {dest: getattr(args, dest) for dest, _ in PARAM_FLAGS.values()}
    overrides.update(distances=args.distances, format=args.format, out=args.out, oracle=args.oracle)
    return cfg.with_overrides(**overrides)


def write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        cfg = config_from_args(args)
        if args.command == "sweep":
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            text, status = func(cfg, workers=args.workers)
        else:
            text, status = func(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CoinFlipError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        write_output(text, cfg.out)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return status


if __name__ == "__main__":
    sys.exit(main())
