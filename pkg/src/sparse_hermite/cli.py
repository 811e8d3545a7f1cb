"""Command-line driver for the numerical studies.

    python -m sparse_hermite norms --out results/
    python -m sparse_hermite counts --family hc --M 4 --wmax 6 --out results/
    python -m sparse_hermite converge --desk --q 3 --seed 1 --out results/
    python -m sparse_hermite dimsweep --desk --q 2 --M 10,20 --seed 1 --out results/

Settings are resolved in the order: built-in defaults, ``--desk`` presets,
``--config`` file (``key = value`` lines, ``#`` comments), explicit flags.
Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .collocation import ModelEvaluationError
from .experiments import (
    DESK,
    ConfigError,
    ExperimentConfig,
    cmd_converge,
    cmd_counts,
    cmd_dimsweep,
    cmd_norms,
)
from .hermite import QuadratureError
from .lognormal import LognormalModelError

# config-file / flag name -> (ExperimentConfig field or extra setting, parser)
_KEYS = {
    "q": ("q", float),
    "sigma": ("sigma", float),
    "M": ("M", str),
    "mref": ("M_ref", int),
    "nmc": ("n_mc", int),
    "seed": ("seed", int),
    "nmax": ("n_max", int),
    "buffer": ("m_buffer", int),
    "algo": ("algo", str),
    "nx": ("nx", int),
    "family": ("family", str),
    "wmax": ("w_max", int),
    "imax": ("i_max", int),
    "numax": ("nu_max", int),
    "out": ("out", str),
}


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key = value`` file into setting names."""
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            settings[name] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return settings


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for flag, (_, conv) in _KEYS.items():
        common.add_argument(f"--{flag}", type=conv, default=None)
    common.add_argument("--desk", action="store_true", help="laptop-scale presets")
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--emit-plots", action="store_true", help="write gnuplot scripts")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="sparse_hermite", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("norms", parents=[common], help="interpolation norms of Hermite polynomials")
    sub.add_parser("counts", parents=[common], help="sparse-grid sizes of TD/HC sets")
    sub.add_parser("converge", parents=[common], help="convergence study on the lognormal problem")
    sub.add_parser("dimsweep", parents=[common], help="convergence curves for several M")
    return p


def _settings(args) -> dict:
    settings = {}
    if args.desk:
        settings.update(DESK)
    if args.config:
        settings.update(read_config(args.config))
    for flag, (name, _) in _KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            settings[name] = value
    return settings


def _int_list(text) -> list[int]:
    try:
        return [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


_PLOT = """set logscale xy
set datafile separator ','
set key autotitle columnhead
set xlabel '{xlabel}'
set ylabel '{ylabel}'
plot {series}
"""


def _emit_plot(path: Path, xlabel: str, ylabel: str, series: list[str]) -> None:
    path.write_text(_PLOT.format(xlabel=xlabel, ylabel=ylabel, series=", \\\n     ".join(series)))


def _experiment_config(s: dict) -> ExperimentConfig:
    fields = {k: v for k, v in s.items() if k in ExperimentConfig.__dataclass_fields__}
    if "M" in fields:
        fields["M"] = _int_list(fields["M"])[0]
    try:
        return ExperimentConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        s = _settings(args)
        out = Path(s.get("out") or ".")
        if args.command == "norms":
            cmd_norms(s.get("i_max", 39), s.get("nu_max", 39), out)
            if args.emit_plots:
                (out / "norms.gp").write_text(
                    "set datafile separator ','\nset xlabel 'nu'\nset ylabel 'i'\n"
                    "splot 'norms.csv' using 2:1:3 with points title 'norm_U', \\\n"
                    "      'norms.csv' using 2:1:4 with points title 'norm_Delta'\n"
                )
        elif args.command == "counts":
            M = _int_list(s.get("M", "2"))[0]
            rows = cmd_counts(s.get("family", "td"), M, s.get("w_max", 6), out)
            if args.emit_plots:
                _emit_plot(
                    out / "counts.gp", "|Lambda|", "points",
                    ["'counts.csv' using 2:3 with linespoints", "'counts.csv' using 2:4 with lines"],
                )
            for row in rows:
                print(*row)
        elif args.command == "converge":
            cfg = _experiment_config({**s, "out": str(out)})
            res = cmd_converge(cfg)
            print(f"fit window N={res.fit_window[0]}..{res.fit_window[1]}")
            for measure, rate in res.rates.items():
                print(f"rate vs {measure}: {rate:.3f}")
            if args.emit_plots:
                name = f"converge_{cfg.tag}.csv"
                series = [f"'{name}' using 2:5 with linespoints"]
                if res.best_n_term is not None:
                    series.append("'bestnterm.csv' using 1:2 with lines")
                _emit_plot(out / f"converge_{cfg.tag}.gp", "|Lambda_N|", "error", series)
        elif args.command == "dimsweep":
            Ms = _int_list(s.pop("M", "10,20,40,80,120,160"))
            base = _experiment_config({**s, "M_ref": max(Ms), "out": str(out)})
            results = cmd_dimsweep(base, Ms)
            for M, res in results.items():
                print(f"M={M}: final error {res.records[-1].error:.6g}")
            if args.emit_plots:
                _emit_plot(
                    out / "dimsweep.gp", "|Lambda_N|", "error",
                    [f"'dimsweep_M{M}.csv' using 2:5 with linespoints title 'M={M}'" for M in Ms],
                )
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (
        ModelEvaluationError,
        LognormalModelError,
        QuadratureError,
        FloatingPointError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
