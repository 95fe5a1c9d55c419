"""Command-line front end.

    hyperqss sweep --sweep 0:300:1 --out rates.csv --chart rates.svg
    hyperqss point --distance 50 --alpha-convention full --variant recomputed
    hyperqss simulate --distance 10 --p 1e-2 --pd 1e-3 --pulses 1000000 --seed 42
    hyperqss verify-table
    hyperqss timing

Parameters come from (lowest to highest priority) the built-in defaults, a
``key=value`` config file (``--config`` or ``$HYPERQSS_CONFIG``) and flags.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from . import keyrate, montecarlo, table
from .photonics import ChannelParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

CSV_COLUMNS = (
    "L_km", "Q0", "Q1", "Q2", "Tt", "Qt", "QCt", "Et", "e1", "Rt", "Rt_clamped", "Rt_baseline",
)

# config-file / flag name -> ChannelParams field
_PARAM_KEYS = {
    "p": "p",
    "pd": "pd",
    "etac": "eta_c",
    "etad": "eta_d",
    "beta": "beta",
    "fp": "F_P",
    "fm": "F_M",
    "f": "f",
}
_SWITCH_KEYS = {
    "alpha-convention": "alpha_convention",
    "alpha_convention": "alpha_convention",
    "variant": "gain_variant",
    "e1-fidelity": "e1_fidelity",
    "e1_fidelity": "e1_fidelity",
    "multipair": "multipair",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 1 instead of argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise UsageError(f"expected on/off, got {text!r}")


def read_config(path: str) -> dict[str, object]:
    """Parse a flat ``key=value`` file into ChannelParams keyword arguments."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out: dict[str, object] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key in _PARAM_KEYS:
            try:
                out[_PARAM_KEYS[key]] = float(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: {key} needs a number, got {value!r}") from None
        elif key in _SWITCH_KEYS:
            field = _SWITCH_KEYS[key]
            out[field] = _on_off(value) if field in ("e1_fidelity", "multipair") else value
        else:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel parameters")
    g.add_argument("--config", metavar="PATH", help="key=value parameter file")
    g.add_argument("--p", type=float, help="pair emission probability per pulse")
    g.add_argument("--pd", type=float, help="dark-count probability per detector")
    g.add_argument("--etac", type=float, help="coupling efficiency")
    g.add_argument("--etad", type=float, help="detector efficiency")
    g.add_argument("--beta", type=float, help="fiber loss (dB/km)")
    g.add_argument("--fp", type=float, help="polarization GHZ fidelity")
    g.add_argument("--fm", type=float, help="momentum GHZ fidelity")
    g.add_argument("--f", type=float, help="error-correction inefficiency")
    g.add_argument("--alpha-convention", choices=("quarter", "full"))
    g.add_argument("--variant", choices=("printed", "recomputed"))
    g.add_argument("--e1-fidelity", choices=("on", "off"))
    g.add_argument("--multipair", choices=("on", "off"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperqss", description="Hyperentangled GHZ secret-sharing analyzer")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="key rate versus distance as CSV")
    _add_param_flags(sw)
    sw.add_argument("--sweep", default="0:300:1", metavar="START:STOP:STEP")
    sw.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
    sw.add_argument("--chart", metavar="PATH", help="write an SVG rate chart")

    pt = sub.add_parser("point", help="full gain/error breakdown at one distance")
    _add_param_flags(pt)
    pt.add_argument("--distance", type=float, default=0.0, metavar="KM")
    pt.add_argument("--out", metavar="PATH")

    sim = sub.add_parser("simulate", help="Monte Carlo run of the protocol")
    _add_param_flags(sim)
    sim.add_argument("--distance", type=float, default=0.0, metavar="KM")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--pulses", type=int, default=1_000_000)
    sim.add_argument("--attack", choices=("none", "intercept-resend"), default="none")
    sim.add_argument("--resend", default="HL", help="Eve's resend state (HL, VR, DD, DL, HD)")
    sim.add_argument("--check-fraction", type=float, default=0.1)
    sim.add_argument("--threshold", type=float, default=0.11)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", metavar="PATH")
    sim.add_argument("--histogram", metavar="PATH", help="CSV of counts per detector triple")

    vt = sub.add_parser("verify-table", help="check the detector table partition")
    vt.add_argument("--out", metavar="PATH")

    tm = sub.add_parser("timing", help="communication-time saving")
    tm.add_argument("--t1", type=float, default=1.0)
    tm.add_argument("--t2", type=float, default=None, help="default: sqrt(3) * t1")
    tm.add_argument("--out", metavar="PATH")
    return parser


def params_from_args(args: argparse.Namespace, distance: float = 0.0) -> ChannelParams:
    kwargs: dict[str, object] = {}
    config = args.config or os.environ.get("HYPERQSS_CONFIG")
    if config:
        kwargs.update(read_config(config))
    for flag, fld in _PARAM_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[fld] = value
    if args.alpha_convention:
        kwargs["alpha_convention"] = args.alpha_convention
    if args.variant:
        kwargs["gain_variant"] = args.variant
    if args.e1_fidelity:
        kwargs["e1_fidelity"] = _on_off(args.e1_fidelity)
    if args.multipair:
        kwargs["multipair"] = _on_off(args.multipair)
    kwargs["L"] = distance
    try:
        return ChannelParams(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_sweep(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--sweep needs START:STOP:STEP, got {text!r}") from None
    if step <= 0:
        raise UsageError("sweep step must be positive")
    if start > stop:
        raise UsageError("sweep start must not exceed stop")
    if start < 0:
        raise UsageError("distances must be non-negative")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + i * step for i in range(n + 1)]


def _fmt(x: float) -> str:
    return f"{x:.5e}"


def sweep_csv(params: ChannelParams, distances: Sequence[float]) -> str:
    lines = [f"# {params.switches()}", ",".join(CSV_COLUMNS)]
    for L in distances:
        try:
            r = keyrate.key_rate(params.with_(L=L))
        except keyrate.DegeneratePointError as exc:
            raise keyrate.DegeneratePointError(f"L={L:g} km: {exc}") from None
        b = r.breakdown
        row = (L, b.Q0, b.Q1, b.Q2, b.Tt, b.Qt, b.QCt, r.Et, r.e1, r.Rt, r.Rt_clamped, r.Rt_baseline)
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_chart(path: str, params: ChannelParams, distances: Sequence[float]) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    points = keyrate.sweep(params, distances)
    ours = [(r.L, r.Rt) for r in points if r.Rt > 0]
    base = [(r.L, r.Rt_baseline) for r in points if r.Rt_baseline > 0]
    with matplotlib.rc_context({"svg.hashsalt": "hyperqss", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        if ours:
            ax.semilogy(*zip(*ours), label="hyperentangled QSS")
        if base:
            ax.semilogy(*zip(*base), "--", label="basis-choice GHZ QSS")
        ax.set_xlabel("distance L (km)")
        ax.set_ylabel("key rate per pulse")
        ax.set_title(params.switches(), fontsize=7)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def point_report(params: ChannelParams) -> str:
    r = keyrate.key_rate(params)
    b = r.breakdown
    lines = [
        f"# hyperqss point L={params.L:g} km",
        f"# {params.switches()}",
    ]
    for name, value in b.as_dict().items():
        lines.append(f"{name:10s} {value:.6e}")
    lines += [
        f"{'Et':10s} {r.Et:.6e}",
        f"{'e1':10s} {r.e1:.6e}",
        f"{'Rt':10s} {r.Rt:.6e}",
        f"{'Rt_clamped':10s} {r.Rt_clamped:.6e}",
        f"{'Rt_base':10s} {r.Rt_baseline:.6e}",
    ]
    return "\n".join(lines) + "\n"


def timing_report(t1: float, t2: float | None) -> str:
    t2 = math.sqrt(3) * t1 if t2 is None else t2
    saving = keyrate.timing_saving(t1, t2)
    return (
        f"t1={t1:g} t2={t2:.6g}\n"
        f"hyperentangled: t1+t2 = {t1 + t2:.6g}\n"
        f"basis-choice:   2t1+4t2 = {2 * t1 + 4 * t2:.6g}\n"
        f"saving {saving * 100:.1f}%\n"
    )


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _run(args: argparse.Namespace) -> int:
    if args.command == "verify-table":
        report = table.verify_partition()
        text = str(report) + f"\nchecksum {table.table_checksum()}\n"
        _emit(text, args.out)
        return EXIT_OK if report.ok else EXIT_FAILED

    if args.command == "timing":
        try:
            _emit(timing_report(args.t1, args.t2), args.out)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return EXIT_OK

    if args.command == "sweep":
        distances = parse_sweep(args.sweep)
        params = params_from_args(args)
        try:
            text = sweep_csv(params, distances)
        except keyrate.DegeneratePointError as exc:
            print(f"hyperqss: degenerate point: {exc}", file=sys.stderr)
            return EXIT_FAILED
        _emit(text, args.out)
        if args.chart:
            write_chart(args.chart, params, distances)
        return EXIT_OK

    if args.command == "point":
        if args.distance < 0:
            raise UsageError("distance must be non-negative")
        params = params_from_args(args, args.distance)
        try:
            _emit(point_report(params), args.out)
        except keyrate.DegeneratePointError as exc:
            print(f"hyperqss: degenerate point: {exc}", file=sys.stderr)
            return EXIT_FAILED
        return EXIT_OK

    if args.command == "simulate":
        if args.distance < 0:
            raise UsageError("distance must be non-negative")
        params = params_from_args(args, args.distance)
        try:
            config = montecarlo.RunConfig(
                n_pulses=args.pulses,
                check_fraction=args.check_fraction,
                error_threshold=args.threshold,
                seed=args.seed,
                attack=args.attack,
                resend=args.resend,
                workers=args.workers,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = montecarlo.run(config, params)
        _emit(report.to_text(), args.out)
        if args.histogram:
            _emit(report.histogram_csv(), args.histogram)
        return EXIT_FAILED if report.aborted else EXIT_OK

    raise UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except UsageError as exc:
        print(f"hyperqss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hyperqss: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
