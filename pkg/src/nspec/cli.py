"""Command-line interface: ``nspec <subcommand> [flags]``.

Every subcommand accepts ``--config file.json`` whose keys are the flag
destinations (``omega1``, ``gamma_d``, ``band_grid`` ...). Values from the
file replace built-in defaults; flags given on the command line win over
both. Data goes to stdout (or ``--output``), diagnostics to stderr.

Exit status: 0 on success, 2 for usage errors, 1 when the computation fails.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .dressed import DriveConfig, solve
from .errors import NSpecError
from .fitting import PowerSeries, confidence_band, fit_height, fit_splitting, load_series
from .obe import DecayConfig, probe_absorption_spectrum
from .spectrum import LineshapeConfig, SpectrumModel, find_peaks, synthesize, trajectory_vs_delta2, weights_vs_ratio
from .zeeman import SCHEMES, analyse_scheme, build_coupling_graph, effective_n_parameters, transform_basis


def fmt(x) -> str:
    # + 0.0 turns negative zero into zero
    return format(float(x) + 0.0, ".10g")


def thread_count() -> int:
    """Worker threads for sweeps: the CPU count, capped by ``NSPEC_THREADS``."""
    n = os.cpu_count() or 1
    raw = os.environ.get("NSPEC_THREADS")
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise NSpecError(f"NSPEC_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise NSpecError("NSPEC_THREADS must be >= 1")
        n = min(n, cap)
    return n


def make_grid(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step!r}")
    if stop < start:
        raise ValueError(f"grid stop {stop!r} is below start {start!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------- commands


def _drive(args) -> DriveConfig:
    return DriveConfig(args.omega1, args.omega2, args.delta1, args.delta2)


def cmd_eigen(args) -> str:
    sol = solve(_drive(args))
    rows = [
        (nu + 1, e, a, *vec)
        for nu, (e, a, vec) in enumerate(zip(sol.energies, sol.weights, sol.vectors))
    ]
    if args.format == "json":
        return json_text(
            {
                "energies_mhz": sol.energies.tolist(),
                "weights": sol.weights.tolist(),
                "vectors_acd": sol.vectors.tolist(),
                "degenerate": sol.degenerate,
            }
        )
    return csv_text(["nu", "energy_mhz", "weight", "amp_a", "amp_c", "amp_d"], rows)


def cmd_spectrum(args) -> str:
    grid = make_grid(args.start, args.stop, args.step)
    model = SpectrumModel(
        _drive(args),
        LineshapeConfig(args.fwhm, args.broadening),
        uncoupled_height=args.uncoupled_height,
        uncoupled_center=args.uncoupled_center,
        global_shift=args.shift,
        coupled_scale=args.scale,
    )
    values = synthesize(model, grid)
    return _spectrum_output(args, grid, values)


def _spectrum_output(args, grid, values) -> str:
    if args.format == "json":
        peaks = find_peaks(grid, values) if grid.size >= 3 else []
        return json_text(
            {
                "delta_p_mhz": grid.tolist(),
                "absorption": values.tolist(),
                "peaks": [{"center_mhz": p.center, "height": p.height} for p in peaks],
            }
        )
    return csv_text(["delta_p_mhz", "absorption"], zip(grid, values))


def cmd_trajectory(args) -> str:
    grid = make_grid(args.start, args.stop, args.step)
    energies = trajectory_vs_delta2(args.omega1, args.omega2, args.delta1, grid)
    return csv_text(["delta2_mhz", "e1_mhz", "e2_mhz", "e3_mhz"], (np.r_[x, e] for x, e in zip(grid, energies)))


def cmd_weights(args) -> str:
    grid = make_grid(args.start, args.stop, args.step)
    energies, weights = weights_vs_ratio(grid)
    return csv_text(
        ["ratio", "e1_norm", "e2_norm", "e3_norm", "a1", "a2", "a3"],
        (np.r_[r, e, a] for r, e, a in zip(grid, energies, weights)),
    )


def cmd_fit(args) -> str:
    data: PowerSeries = load_series(args.input)
    if args.model == "splitting":
        result = fit_splitting(data, delta=args.delta)
    else:
        if args.omega1 is None or args.k is None:
            raise _UsageError("--model height needs --omega1 and --k")
        result = fit_height(data, args.omega1, args.k)
    report = result.to_dict()
    if args.band_grid > 0:
        top = args.band_max if args.band_max is not None else float(data.p2.max())
        grid = np.linspace(0.0, top, args.band_grid)
        lo, hi = confidence_band(result, grid)
        report["band"] = {
            "p2_mw": grid.tolist(),
            "center": result.predict(grid).tolist(),
            "lower": lo.tolist(),
            "upper": hi.tolist(),
        }
    if args.model == "height":
        report["three_photon_fraction_at_max"] = float(result.model.three_photon_fraction(float(data.p2.max())))
    return json_text(report)


def cmd_zeeman(args) -> str:
    graph = build_coupling_graph(SCHEMES[args.scheme])
    if args.scheme == "orthogonal":
        graph = transform_basis(graph)
    decomp = analyse_scheme(args.scheme)
    out = {
        "scheme": args.scheme,
        "states": [str(s) for s in graph.states],
        "edges": [e.to_dict() for e in graph.edges],
        "decomposition": decomp.to_dict(),
    }
    if decomp.n_components and args.omega1 is not None and args.omega2 is not None:
        eff = effective_n_parameters(decomp, {"C1": args.omega1, "C2": args.omega2})
        out["effective_n"] = {
            "omega1_mhz": [d.omega1 for d in eff.drives],
            "omega2_mhz": [d.omega2 for d in eff.drives],
            "splitting_mhz": eff.splittings,
            "spread": eff.spread,
        }
    return json_text(out)


def cmd_obe(args) -> str:
    grid = make_grid(args.start, args.stop, args.step)
    decay = DecayConfig(
        gamma_d=args.gamma_d,
        gamma_c=args.gamma_c,
        d_to_a=args.d_to_a,
        d_to_b=1.0 - args.d_to_a,
        c_to_a=args.c_to_a,
        c_to_b=1.0 - args.c_to_a,
        ground_dephasing=args.ground_dephasing,
        repump=args.repump,
    )
    values = probe_absorption_spectrum(_drive(args), decay, grid, omega_p=args.omega_p, workers=thread_count())
    return _spectrum_output(args, grid, values)


# ------------------------------------------------------------------ parser


class _UsageError(Exception):
    pass


def _add_common(p, formats=("csv",)):
    p.add_argument("--config", metavar="FILE", help="JSON file of option values")
    p.add_argument("-o", "--output", metavar="PATH", help="write data here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_drive(p, delta2=True):
    p.add_argument("--omega1", type=float, help="first coupling Rabi frequency (MHz)")
    p.add_argument("--omega2", type=float, help="second coupling Rabi frequency (MHz)")
    p.add_argument("--delta1", type=float, default=0.0, help="first coupling detuning (MHz)")
    if delta2:
        p.add_argument("--delta2", type=float, default=0.0, help="second coupling detuning (MHz)")


def _add_grid(p, start, stop, step, what):
    p.add_argument("--start", type=float, default=start, help=f"first {what}")
    p.add_argument("--stop", type=float, default=stop, help=f"last {what} (inclusive)")
    p.add_argument("--step", type=float, default=step, help="grid spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nspec", description="Doubly dressed N-system spectroscopy.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("eigen", help="dressed energies, weights and vectors")
    _add_common(p, ("csv", "json"))
    for name in ("omega1", "omega2", "delta1", "delta2"):
        p.add_argument(f"--{name}", type=float, help="MHz")
    p.set_defaults(func=cmd_eigen, required=("omega1", "omega2", "delta1", "delta2"))

    p = sub.add_parser("spectrum", help="weak-probe absorption spectrum from dressed states")
    _add_common(p, ("csv", "json"))
    _add_drive(p)
    _add_grid(p, -100.0, 100.0, 0.2, "probe detuning (MHz)")
    p.add_argument("--fwhm", type=float, default=6.0, help="natural linewidth (MHz)")
    p.add_argument("--broadening", type=float, default=1.0, help="linewidth multiplier >= 1")
    p.add_argument("--uncoupled-height", type=float, default=0.0)
    p.add_argument("--uncoupled-center", type=float, default=0.0, help="MHz")
    p.add_argument("--shift", type=float, default=0.0, help="global frequency displacement (MHz)")
    p.add_argument("--scale", type=float, default=1.0, help="overall scale of the coupled peaks")
    p.set_defaults(func=cmd_spectrum, required=("omega1", "omega2"))

    p = sub.add_parser("trajectory", help="dressed energies against the second detuning")
    _add_common(p)
    _add_drive(p, delta2=False)
    _add_grid(p, -80.0, 80.0, 0.5, "second-field detuning (MHz)")
    p.set_defaults(func=cmd_trajectory, required=("omega1", "omega2"))

    p = sub.add_parser("weights", help="resonant energies and weights against omega2/omega1")
    _add_common(p)
    _add_grid(p, 0.0, 3.0, 0.05, "Rabi ratio")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("fit", help="fit splitting or central height against power")
    _add_common(p, ("json",))
    p.add_argument("input", nargs="?", help="CSV with header p2_mw,value[,sigma]")
    p.add_argument("--model", choices=("splitting", "height"), default="splitting")
    p.add_argument("--omega1", type=float, default=None, help="fixed omega1 for --model height (MHz)")
    p.add_argument("--k", type=float, default=None, help="fixed k for --model height (MHz/mW^0.5)")
    p.add_argument("--delta", type=float, default=0.0, help="common detuning for the bias estimate (MHz)")
    p.add_argument("--band-grid", type=int, default=50, help="number of confidence-band samples (0: none)")
    p.add_argument("--band-max", type=float, default=None, help="upper power of the band grid (mW)")
    p.set_defaults(func=cmd_fit, required=("input",))

    p = sub.add_parser("zeeman", help="Zeeman coupling graph and its N decomposition")
    _add_common(p, ("json",))
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="orthogonal")
    p.add_argument("--omega1", type=float, default=None, help="base C1 Rabi frequency for effective N parameters")
    p.add_argument("--omega2", type=float, default=None, help="base C2 Rabi frequency for effective N parameters")
    p.set_defaults(func=cmd_zeeman)

    p = sub.add_parser("obe", help="steady-state Bloch-equation probe spectrum")
    _add_common(p, ("csv", "json"))
    _add_drive(p)
    _add_grid(p, -60.0, 60.0, 0.2, "probe detuning (MHz)")
    p.add_argument("--gamma-d", type=float, default=6.0, help="decay rate of d (MHz)")
    p.add_argument("--gamma-c", type=float, default=5.7, help="decay rate of c (MHz)")
    p.add_argument("--d-to-a", type=float, default=0.5, help="fraction of d decay into a (rest into b)")
    p.add_argument("--c-to-a", type=float, default=1.0, help="fraction of c decay into a (rest into b)")
    p.add_argument("--ground-dephasing", type=float, default=0.0, help="a-b coherence decay rate (MHz)")
    p.add_argument("--repump", type=float, default=0.0, help="incoherent a -> b rate (MHz)")
    p.add_argument("--omega-p", type=float, default=None, help="probe Rabi frequency (default gamma_d/20)")
    p.set_defaults(func=cmd_obe, required=("omega1", "omega2"))
    return parser


def _subparser(parser, name) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, path: str):
    """Install values from a JSON config file as defaults of ``sub``."""
    try:
        values = json.loads(Path(path).read_text())
    except OSError as exc:
        sub.error(f"cannot read config {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        sub.error(f"config {path} is not valid JSON: {exc}")
    if not isinstance(values, dict):
        sub.error(f"config {path} must hold a JSON object")
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    converted = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None:
            sub.error(f"config {path}: unknown option {key!r}")
        if value is not None:
            if isinstance(value, (dict, list, bool)):
                sub.error(f"config {path}: {key} must be a scalar")
            if action.type is None:
                if not isinstance(value, str):
                    sub.error(f"config {path}: {key} must be a string")
            elif action.type is int and isinstance(value, float) and not value.is_integer():
                sub.error(f"config {path}: {key} must be an integer")
            else:
                try:
                    value = action.type(value)
                except (TypeError, ValueError):
                    sub.error(f"config {path}: bad value for {key}: {value!r}")
        if action.choices is not None and value not in action.choices:
            sub.error(f"config {path}: {key} must be one of {sorted(action.choices)}")
        converted[key] = value
    sub.set_defaults(**converted)


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    sub = _subparser(parser, args.command)
    if args.config:
        _apply_config(sub, args.config)
        args = parser.parse_args(argv)
    missing = [k for k in getattr(args, "required", ()) if getattr(args, k) is None]
    if missing:
        flags = ", ".join(k if k == "input" else "--" + k.replace("_", "-") for k in missing)
        sub.error(f"missing required values: {flags}")
    return args


def main(argv=None) -> int:
    args = parse(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            text = args.func(args)
    except _UsageError as exc:
        _subparser(build_parser(), args.command).error(str(exc))
    except (NSpecError, ValueError, ArithmeticError, OSError) as exc:
        print(f"nspec {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            print(f"nspec {args.command}: error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
