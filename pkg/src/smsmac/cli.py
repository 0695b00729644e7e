"""Command-line front end.

Every subcommand writes an RFC-4180 CSV whose first lines are ``#``-prefixed
manifest comments (subcommand, resolved config, seed, version, timestamp).
Only the timestamp varies between reruns, so the CSV body is reproducible.

Exit codes: 0 success, 2 a bound hypothesis fails, 3 a numerical tolerance
was missed, 4 bad configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from .bound import asymptotic_limit, fig2_value, general_bound, theorem2_bound
from .channel import DiscreteMac, GaussianMac, Var, identity_action, is_symmetric, shift_action, translation_action
from .config import ConfigError, channel_from_section, config_hash, load_config, protocol_from_sections
from .infoq import conditional_mi, renyi_cmi, renyi_cmi_down
from .simproto import proper_coalitions, run_experiment

EXIT_OK, EXIT_INFEASIBLE, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4
SCHEMA_VERSION = 1
PRECISION = 9


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class _Parser(argparse.ArgumentParser):
    # usage errors share the config-error exit code; 2 is reserved
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        s = f"{x:.{PRECISION}f}"
        return "0." + "0" * PRECISION if s == "-0." + "0" * PRECISION else s
    return "" if x is None else str(x)


def _coalition_label(J) -> str:
    return "{" + " ".join(str(j) for j in J) + "}"


def _parse_coalitions(text: str | None, c: int) -> list[tuple[int, ...]] | None:
    """``"1;2;1,2"`` -> ``[(1,), (2,), (1, 2)]``."""
    if text is None:
        return None
    out = []
    for part in text.split(";"):
        try:
            J = tuple(sorted(int(t) for t in part.replace(" ", ",").split(",") if t))
        except ValueError as exc:
            raise ConfigError(f"bad coalition {part!r}") from exc
        if not J or len(J) >= c or min(J) < 1 or max(J) > c:
            raise ConfigError(f"coalition {part!r} is not a nonempty proper subset of 1..{c}")
        out.append(J)
    return out


def _parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ConfigError(f"--grid expects a:b:n, got {text!r}") from exc
    if a > b or n < 1 or (n == 1 and a != b):
        raise ConfigError("--grid needs a <= b and n >= 2 (or n = 1 with a = b)")
    return np.linspace(a, b, n)


def _manifest(sub: str, resolved: dict, seed) -> list[str]:
    return [
        f"# smsmac-csv schema={sub}/{SCHEMA_VERSION}",
        f"# subcommand: {sub}",
        f"# config: {json.dumps(resolved, sort_keys=True, separators=(',', ':'))}",
        f"# seed: {'' if seed is None else seed}",
        f"# version: {_version()}",
        f"# timestamp: {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
    ]


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _emit(args, sub, resolved, header, rows, append=False) -> None:
    head = "".join(line + "\r\n" for line in _manifest(sub, resolved, getattr(args, "seed", None)))
    out = getattr(args, "out", None)
    if out is None:
        sys.stdout.write(head + _csv_text([header, *rows]))
        return
    path = Path(out)
    if append and path.exists() and path.stat().st_size > 0:
        existing = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
        if existing and existing[0] != _csv_text([header]).rstrip("\r\n"):
            raise ConfigError(f"{out} has a different header; write to a new file")
        with path.open("a", newline="") as fh:
            fh.write(head + _csv_text(rows))
        return
    with path.open("w", newline="") as fh:
        fh.write(head + _csv_text([header, *rows]))


def _unit(args) -> tuple[str, float]:
    return ("bits", 1 / math.log(2)) if args.bits else ("nats", 1.0)


def _channel(args):
    cfg = load_config(args.config)
    if "channel" not in cfg:
        raise ConfigError("config has no [channel] section")
    return cfg, channel_from_section(cfg["channel"])


def _channel_params(mac) -> tuple:
    if isinstance(mac, GaussianMac):
        return mac.E, mac.v, getattr(mac, "p", mac.q), mac.c
    return None, None, mac.q, mac.c


# subcommands -----------------------------------------------------------------


def cmd_bound(args) -> int:
    cfg, mac = _channel(args)
    rep = theorem2_bound(mac, tol=args.tol)
    unit, k = _unit(args)
    E, v, p, c = _channel_params(mac)
    header = ["row", "J", "i", "E", "v", "p", "c", f"iw_{unit}", f"term1_{unit}", f"term2_{unit}",
              f"term3_{unit}", f"min_{unit}", "bound_nats", "bound_bits", "h1", "h2", "h3", "status"]
    rows = []
    for t in rep.terms:
        rows.append(["term", _coalition_label(t.J), t.i, E, v, p, c, rep.iw * k, t.term1 * k,
                     t.term2 * k, t.term3 * k, t.min * k, None, None, *t.hypotheses,
                     "ok" if all(t.hypotheses) else "infeasible"])
    status = "flagged" if rep.flagged else ("guaranteed" if rep.guaranteed else "infeasible")
    am = rep.argmin
    rows.append(["bound", _coalition_label(am.J), am.i, E, v, p, c, rep.iw * k, None, None, None,
                 rep.bound * k, rep.bound, rep.bound / math.log(2), *rep.hypotheses, status])
    _emit(args, "bound", cfg, header, rows)
    if rep.flagged:
        return EXIT_NUMERIC
    return EXIT_OK if rep.guaranteed else EXIT_INFEASIBLE


def cmd_fig2(args) -> int:
    grid = _parse_grid(args.grid)
    if args.v <= 0:
        raise ConfigError("--v must be positive")
    unit, k = _unit(args)
    header = ["E", "v", f"value_{unit}", f"error_{unit}", "flagged"]
    if args.general:
        header.append(f"general_{unit}")
    rows, flagged = [], False
    for E in grid:
        est = fig2_value(float(E), args.v, tol=args.tol)
        row = [float(E), args.v, est.value * k, est.error * k, est.flagged]
        flagged |= est.flagged
        if args.general:
            g = general_bound(float(E), args.v, 2, 3, tol=args.tol)
            row.append(g.value * k)
            flagged |= g.flagged
        rows.append(row)
    resolved = {"grid": args.grid, "v": args.v, "general": args.general, "tol": args.tol}
    _emit(args, "fig2", resolved, header, rows)
    return EXIT_NUMERIC if flagged else EXIT_OK


def cmd_asymptote(args) -> int:
    if args.p < 2:
        raise ConfigError("--p must be at least 2")
    unit, k = _unit(args)
    _emit(args, "asymptote", {"p": args.p}, ["p", f"limit_{unit}"], [[args.p, asymptotic_limit(args.p) * k]])
    return EXIT_OK


def cmd_check_symmetric(args) -> int:
    cfg, mac = _channel(args)
    if isinstance(mac, DiscreteMac):
        action, name = translation_action(mac.q, mac.l), "translation"
    elif args.action == "identity":
        action, name = identity_action(mac.q, mac.l), "identity"
    else:
        pts = mac.points
        action, name = shift_action(mac.q, mac.l, lambda a: pts[a]), "lift"
    holds, worst = is_symmetric(mac, action, tol=args.tol)
    _emit(args, "check-symmetric", cfg, ["action", "symmetric", "worst_violation"], [[name, holds, worst]])
    return EXIT_OK


def cmd_renyi(args) -> int:
    cfg, mac = _channel(args)
    if args.s is None or args.s <= 0 or args.s >= 1:
        raise ConfigError("--s must lie in (0, 1)")
    try:
        targets = [Var.parse(t) for t in args.target.split(",")]
        given = [Var.parse(t) for t in args.given.split(",")] if args.given else []
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    s = args.s
    unit, k = _unit(args)
    shannon = conditional_mi(mac, targets, given, tol=args.tol)
    up = renyi_cmi(s, mac, targets, given, tol=args.tol)
    down = renyi_cmi_down(s, mac, targets, given, tol=args.tol)
    dual = renyi_cmi_down(s / (1 - s), mac, targets, given, tol=args.tol)
    header = ["s", "target", "given", f"mi_{unit}", f"renyi_{unit}", f"renyi_down_{unit}",
              f"renyi_down_dual_{unit}", "flagged"]
    flagged = any(e.flagged for e in (shannon, up, down, dual))
    row = [s, args.target, args.given or "", shannon.value * k, up.value * k, down.value * k,
           dual.value * k, flagged]
    resolved = dict(cfg, query={"s": s, "target": args.target, "given": args.given or ""})
    _emit(args, "renyi", resolved, header, [row])
    return EXIT_NUMERIC if flagged else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    try:
        pc = protocol_from_sections(cfg, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    args.seed = pc.seed
    coal = _parse_coalitions(args.coalition, pc.c)
    targets = proper_coalitions(pc.c) if coal is None else coal
    res = run_experiment(pc, coalition_list=targets, decoder=args.decoder)
    unit, k = _unit(args)
    resolved = dict(cfg, run={"seed": pc.seed, "decoder": args.decoder,
                              "coalitions": [list(J) for J in targets]})
    header = ["config_hash", "seed", "decoder", "trials", "errors", "error_rate", "ci_low", "ci_high"]
    row = [config_hash(resolved), pc.seed, args.decoder, res.trials, res.errors, res.error_rate,
           res.ci_low, res.ci_high]
    for J in targets:
        lab = "leakage_" + "_".join(map(str, J))
        header += [f"{lab}_{unit}", f"{lab}_se_{unit}"]
        est = res.leakage[tuple(J)]
        row += [est.value * k, est.error * k]
    _emit(args, "simulate", resolved, header, [row], append=True)
    return EXIT_OK


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--bits", action="store_true", help="report information in bits")
    common.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance (nats)")

    p = _Parser(prog="smsmac", description="Secure modulo-sum MAC bounds and simulation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", parents=[common], help="three-term lower bound for a channel")
    b.add_argument("--config", required=True, help="INI file or bundled config name")
    b.set_defaults(func=cmd_bound)

    f = sub.add_parser("fig2", parents=[common], help="p=2, c=3 Gaussian curve over an E grid")
    f.add_argument("--grid", default="0:8:81", help="E range as a:b:n (default 0:8:81)")
    f.add_argument("--v", type=float, default=1.0, help="noise variance")
    f.add_argument("--general", action="store_true", help="add the integer-sum formula column")
    f.set_defaults(func=cmd_fig2)

    a = sub.add_parser("asymptote", parents=[common], help="large-E limit for alphabet size p")
    a.add_argument("--p", type=int, default=2)
    a.set_defaults(func=cmd_asymptote)

    s = sub.add_parser("check-symmetric", parents=[common], help="test channel symmetry")
    s.add_argument("--config", required=True)
    s.add_argument("--action", choices=["lift", "identity"], default="lift",
                   help="output map for Gaussian channels (discrete channels use translation)")
    s.set_defaults(func=cmd_check_symmetric)

    r = sub.add_parser("renyi", parents=[common], help="Renyi conditional informations")
    r.add_argument("--config", required=True)
    r.add_argument("--s", type=float, required=True)
    r.add_argument("--target", default="X1", help="comma list such as X1 or X2-X3,X1")
    r.add_argument("--given", default="", help="comma list of conditioning variables")
    r.set_defaults(func=cmd_renyi)

    m = sub.add_parser("simulate", parents=[common], help="run the protocol simulator")
    m.add_argument("--config", required=True)
    m.add_argument("--seed", type=int, help="override the config seed")
    m.add_argument("--coalition", help="coalitions to probe, e.g. '1;2;1,2'")
    m.add_argument("--decoder", choices=["full", "sum"], default="full")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"smsmac: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
