"""Command-line interface.

Every command prints CSV or JSON to stdout, or to ``--out``. Defaults are the
primrose example: 160 crossovers in 400 meioses, mass 11/12 at rho = 1/2, a
flat linked prior, and L = 1.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import ConvergenceError, LinkageError
from .inference import (
    bayes_factor_test,
    log_likelihood,
    log_marginal_continuous,
    marginal_approx_haldane,
    marginal_exact_haldane,
    posterior_density,
)
from .model import CrossCount, FlatHaldane, MixturePrior, prior_from_dict
from .montecarlo import (
    FIGURE1_BINS,
    FIGURE1_SAMPLES,
    SeededStream,
    figure1,
    sample_prior,
    write_histogram_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

COMMANDS = (
    "likelihood",
    "marginal",
    "bayes-factor",
    "prior-density",
    "prior-sample",
    "posterior-density",
    "figure1",
)
DATA_COMMANDS = {"likelihood", "marginal", "bayes-factor", "posterior-density"}

PRIMROSE_N = 400
PRIMROSE_Y = 160
PRIMROSE_POINT_MASS = 11.0 / 12.0
DEFAULT_SEED = 42
DEFAULT_GRID = 1000


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    data: Optional[CrossCount] = None
    prior_spec: Optional[Dict[str, Any]] = None
    point_mass_weight: float = PRIMROSE_POINT_MASS
    point_mass_location: float = 0.5
    method: str = "exact"
    rho: Optional[float] = None
    grid: int = DEFAULT_GRID
    seed: int = DEFAULT_SEED
    stream_id: int = 0
    n_samples: Optional[int] = None
    bins: int = FIGURE1_BINS
    L: float = 1.0
    output_path: Optional[str] = None
    output_format: Optional[str] = None
    plot_path: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command in DATA_COMMANDS and self.data is None:
            raise UsageError(f"'{self.command}' needs data (--n and --y)")
        if self.output_format not in (None, "csv", "json"):
            raise UsageError(f"unknown output format {self.output_format!r}")
        if self.grid < 2:
            raise UsageError("--grid needs at least 2 points")

    def prior(self):
        return prior_from_dict(self.prior_spec) if self.prior_spec is not None else FlatHaldane()

    def mixture(self) -> MixturePrior:
        return MixturePrior(self.point_mass_weight, self.prior(), self.point_mass_location)


def _num(x) -> float:
    return float(x)


def _render(records: List[Dict[str, Any]], fmt: str, single: bool) -> str:
    if fmt == "json":
        payload = records[0] if single else records
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(records[0])
    writer.writerow(columns)
    for rec in records:
        writer.writerow(["" if rec[c] is None else repr(rec[c]) if isinstance(rec[c], float) else rec[c] for c in columns])
    return buf.getvalue()


def _grid(prior, n: int) -> np.ndarray:
    lo, hi = prior.support()
    if prior.is_proper:
        return np.linspace(lo, hi, n)
    # Improper densities blow up at rho = 0; report the open interior.
    return np.linspace(lo, hi, n + 1)[1:]


def _cmd_likelihood(cfg: RunConfig):
    rhos = [cfg.rho] if cfg.rho is not None else list(np.linspace(0.0, 0.5, cfg.grid))
    records = []
    for r in rhos:
        ll = log_likelihood(cfg.data, r)
        records.append({"rho": _num(r), "log_likelihood": ll.log, "likelihood": ll.value()})
    return records, cfg.rho is not None, "json" if cfg.rho is not None else "csv"


def _cmd_marginal(cfg: RunConfig):
    mixture = cfg.mixture()
    if cfg.method == "approx":
        result = marginal_approx_haldane(cfg.data, mixture)
    elif cfg.method == "exact":
        result = marginal_exact_haldane(cfg.data, mixture)
    elif cfg.method == "quadrature":
        cont = log_marginal_continuous(cfg.data, mixture.continuous)
        # Weighted like the closed forms so all three methods are comparable.
        w = mixture.continuous_weight
        log_w = math.log(w) if w > 0 else -math.inf
        record = {
            "method": cont.method,
            "log_marginal": cont.log_marginal.log + log_w,
            "marginal": cont.log_marginal.value() * w,
            "error_estimate": cont.error_estimate * w,
        }
        return [record], True, "json"
    else:
        raise UsageError(f"unknown marginal method {cfg.method!r}")
    record = {
        "method": result.method,
        "log_marginal": result.log_marginal.log,
        "marginal": result.value(),
        "error_estimate": result.error_estimate,
    }
    return [record], True, "json"


def _cmd_bayes_factor(cfg: RunConfig):
    mixture = cfg.mixture()
    test = bayes_factor_test(cfg.data, mixture)
    exact = approx = None
    if isinstance(mixture.continuous, FlatHaldane):
        exact = marginal_exact_haldane(cfg.data, mixture).log_marginal.log
        approx = marginal_approx_haldane(cfg.data, mixture).log_marginal.log
    record = {
        "log_bf": test.log_bayes_factor,
        "bf": test.bayes_factor,
        "prior_odds": test.prior_odds,
        "posterior_odds": test.posterior_odds,
        "posterior_prob_linked": test.posterior_prob_linked,
        "log_marginal_exact": exact,
        "log_marginal_approx": approx,
        "log_marginal_linked": test.log_marginal_linked.log,
        "log_likelihood_unlinked": test.log_likelihood_unlinked.log,
        "log_marginal_mixture": test.log_marginal_mixture.log,
    }
    return [record], True, "json"


def _cmd_prior_density(cfg: RunConfig):
    prior = cfg.prior()
    rho = _grid(prior, cfg.grid)
    dens = np.asarray(prior.density(rho), dtype=float)
    if cfg.plot_path:
        from .plotting import plot_curve

        plot_curve(rho, dens, cfg.plot_path, label=prior.type_name)
    return [{"rho": _num(r), "density": _num(d)} for r, d in zip(rho, dens)], False, "csv"


def _cmd_posterior_density(cfg: RunConfig):
    prior = cfg.prior()
    rho = np.array([cfg.rho]) if cfg.rho is not None else _grid(prior, cfg.grid)
    dens = np.atleast_1d(posterior_density(cfg.data, prior, rho))
    if cfg.plot_path:
        from .plotting import plot_curve

        plot_curve(rho, dens, cfg.plot_path, ylabel="posterior density", label=prior.type_name)
    records = [{"rho": _num(r), "density": _num(d)} for r, d in zip(rho, dens)]
    return records, cfg.rho is not None, "json" if cfg.rho is not None else "csv"


def _cmd_prior_sample(cfg: RunConfig):
    stream = SeededStream(cfg.seed, cfg.stream_id)
    samples = sample_prior(stream, cfg.prior(), cfg.n_samples or 1000)
    return [{"rho": _num(s)} for s in samples], False, "csv"


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        if cfg.command == "figure1":
            hist, _ = figure1(SeededStream(cfg.seed, cfg.stream_id), cfg.n_samples or FIGURE1_SAMPLES, cfg.bins, cfg.L)
            if cfg.output_format == "json":
                text = json.dumps(
                    {
                        "bin_edges": [float(e) for e in hist.bin_edges],
                        "counts": [int(c) for c in hist.counts],
                        "densities": [float(d) for d in hist.densities],
                        "n_samples": hist.n_samples,
                    },
                    indent=2,
                ) + "\n"
            else:
                text = write_histogram_csv(hist, None, cfg.L)
            _emit(text, cfg.output_path)
            if cfg.plot_path:
                from .plotting import plot_histogram

                plot_histogram(hist, cfg.plot_path, cfg.L)
            return EXIT_OK
        handler = {
            "likelihood": _cmd_likelihood,
            "marginal": _cmd_marginal,
            "bayes-factor": _cmd_bayes_factor,
            "prior-density": _cmd_prior_density,
            "prior-sample": _cmd_prior_sample,
            "posterior-density": _cmd_posterior_density,
        }[cfg.command]
        records, single, default_fmt = handler(cfg)
        _emit(_render(records, cfg.output_format or default_fmt, single), cfg.output_path)
        return EXIT_OK
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, LinkageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _json_object(text: str) -> Dict[str, Any]:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"malformed JSON: {exc}") from None
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkagebf",
        description="Bayes factor tests for genetic linkage from crossover counts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--n", type=int, default=PRIMROSE_N, help="number of meioses (default 400)")
    data.add_argument("--y", type=int, default=PRIMROSE_Y, help="number of crossovers (default 160)")

    prior = argparse.ArgumentParser(add_help=False)
    prior.add_argument(
        "--prior",
        type=_json_object,
        default=None,
        help='continuous prior as JSON, e.g. \'{"type":"haldane_distance","L":1}\' (default flat)',
    )

    mixture = argparse.ArgumentParser(add_help=False)
    mixture.add_argument("--point-mass-weight", type=float, default=PRIMROSE_POINT_MASS)
    mixture.add_argument("--point-mass-location", type=float, default=0.5)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", dest="output_path", default=None, help="write here instead of stdout")
    output.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of grid points")

    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--plot", dest="plot_path", default=None, help="also render a PNG figure here")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=DEFAULT_SEED)
    seeded.add_argument("--stream-id", type=int, default=0)
    seeded.add_argument("--n-samples", type=int, default=None)

    p = sub.add_parser("likelihood", parents=[data, grid, output], help="binomial likelihood")
    p.add_argument("--rho", type=float, default=None, help="single rate; omit for a grid over [0, 1/2]")

    p = sub.add_parser("marginal", parents=[data, prior, mixture, output], help="linked marginal likelihood")
    p.add_argument("--method", choices=("exact", "approx", "quadrature"), default="exact")

    sub.add_parser("bayes-factor", parents=[data, prior, mixture, output], help="linked vs unlinked test")
    sub.add_parser("prior-density", parents=[prior, grid, plot, output], help="prior density over its support")
    sub.add_parser("prior-sample", parents=[prior, seeded, output], help="seeded draws from a prior")

    p = sub.add_parser("posterior-density", parents=[data, prior, grid, plot, output], help="posterior density of rho")
    p.add_argument("--rho", type=float, default=None)

    p = sub.add_parser("figure1", parents=[seeded, plot, output], help="simulated rate histogram vs analytic prior")
    p.add_argument("--bins", type=int, default=FIGURE1_BINS)
    p.add_argument("--L", type=float, default=1.0, help="chromosome length in Morgan")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    ns = vars(args)
    data = None
    if "n" in ns:
        data = CrossCount(ns["n"], ns["y"])
    fields = {k: v for k, v in ns.items() if k in RunConfig.__dataclass_fields__ and v is not None}
    fields.pop("command", None)
    if "prior" in ns:
        fields["prior_spec"] = ns["prior"]
    return RunConfig(command=args.command, data=data, **fields)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        # Validate the prior up front so malformed specs are usage errors.
        if cfg.prior_spec is not None:
            cfg.prior()
    except (UsageError, LinkageError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
