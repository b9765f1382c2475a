"""Command-line entry point.

Subcommands: stats, fit, profile, project, simulate, oracle.  Every
output embeds the resolved configuration (including the seed and RNG
algorithm) as comment or JSON metadata; re-running a command with the
same inputs and seed reproduces the output byte for byte apart from the
timestamp line.

Exit codes: 0 success, 2 formula/model errors, 3 input file errors,
4 estimation failures, 5 degeneracy warning escalated by
--degeneracy-error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import estimate, formula, io, oracle, sampler, terms
from .graph import Attributes, ColumnTypeError, project

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_INPUT = 3
EXIT_ESTIMATION = 4
EXIT_DEGENERACY = 5

DEFAULT_GRID = [round(0.1 * g, 10) for g in range(11)]


def _num(value) -> str:
    """Full-precision decimal text for a scalar."""
    return repr(float(value))


def _config_json(args: argparse.Namespace, model_text: str | None) -> str:
    skip = {"func", "out"}
    resolved = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    if model_text is not None:
        resolved["model"] = model_text
    resolved["rng"] = sampler.RNG_ALGORITHM
    return json.dumps(resolved, sort_keys=True, default=str)


def _emit(args, filename: str, text: str, config: str) -> None:
    stamp = datetime.now(timezone.utc).isoformat()
    body = f"# config: {config}\n# timestamp: {stamp}\n{text}"
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)


def _load_inputs(args) -> tuple:
    net = io.load_network(args.network)
    attrs1 = (
        io.load_attributes(args.attrs1, 1, net.n1, net.n2) if getattr(args, "attrs1", None) else None
    )
    attrs2 = (
        io.load_attributes(args.attrs2, 2, net.n1, net.n2) if getattr(args, "attrs2", None) else None
    )
    return net, Attributes(mode1=attrs1, mode2=attrs2)


def _read_model(args) -> tuple[terms.ModelSpec, str]:
    text = args.model
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8").strip()
    spec = formula.parse(text)
    return spec, formula.format_spec(spec)


def _sampler_control(args) -> sampler.SamplerControl:
    return sampler.SamplerControl(
        burn_in=args.burnin,
        interval=args.interval,
        sample_size=args.samplesize,
        seed=args.seed,
        proposal=args.proposal,
    )


def _parse_floats(text: str) -> list[float]:
    return [float(f) for f in text.split(",") if f.strip() != ""]


def _fit_json(fit: estimate.FitResult, config: str) -> str:
    record = {
        "config": json.loads(config),
        "method": fit.method,
        "names": fit.names,
        "theta": [float(t) for t in fit.theta],
        "std_errors": [float(s) for s in fit.std_errors],
        "p_values": [float(p) for p in fit.p_values],
        "covariance": [[float(v) for v in row] for row in fit.covariance],
        "loglik": fit.loglik,
        "loglik_sd": fit.loglik_sd,
        "diagnostics": fit.diagnostics,
        "formula": fit.formula,
    }
    return json.dumps(record, indent=2, sort_keys=True, default=str)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    net, attrs = _load_inputs(args)
    spec, canonical = _read_model(args)
    model = terms.bind(spec, net, attrs)
    values = model.stats(net)
    lines = ["statistic,value"]
    lines += [f"{name},{_num(value)}" for name, value in zip(model.names, values)]
    _emit(args, "stats.csv", "\n".join(lines) + "\n", _config_json(args, canonical))
    return EXIT_OK


def cmd_project(args) -> int:
    net, _ = _load_inputs(args)
    proj = project(net, args.mode)
    lines = [f"{a} {b} {w}" for (a, b), w in sorted(proj.weights.items())]
    _emit(args, f"projection_mode{args.mode}.txt", "\n".join(lines) + ("\n" if lines else ""), _config_json(args, None))
    return EXIT_OK


def cmd_fit(args) -> int:
    net, attrs = _load_inputs(args)
    spec, canonical = _read_model(args)
    config = _config_json(args, canonical)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.method == "mple":
            fit = estimate.mple(spec, net, attrs, formula=canonical)
        else:
            control = estimate.FitControl(sampler=_sampler_control(args))
            fit = estimate.mcmcmle(spec, net, attrs, control=control, formula=canonical)
    for warning in caught:
        print(f"warning: {warning.message}", file=sys.stderr)
    _emit(args, "fit.txt", fit.summary() + "\n", config)
    if args.out:
        stamp = datetime.now(timezone.utc).isoformat()
        record = json.loads(_fit_json(fit, config))
        record["timestamp"] = stamp
        (Path(args.out) / "fit.json").write_text(
            json.dumps(record, indent=2, sort_keys=True, default=str) + "\n",
            encoding="utf-8",
        )
    else:
        sys.stdout.write(_fit_json(fit, config) + "\n")
    if args.degeneracy_error and any(
        isinstance(w.message, estimate.DegeneracyWarning) for w in caught
    ):
        print("degeneracy warning escalated to error", file=sys.stderr)
        return EXIT_DEGENERACY
    return EXIT_OK


def _profile_rows(points: list[estimate.ProfilePoint], homophily_prefix: tuple[str, ...]) -> list[str]:
    rows = []
    for point in points:
        if point.fit is None:
            rows.append(
                f"{point.kind},{point.value:g},,,,,,,failed: {point.error}"
            )
            continue
        fit = point.fit
        mc_sd = fit.diagnostics.get("mc_sd", [0.0] * len(fit.names))
        for j, (name, est, se, p) in enumerate(
            zip(fit.names, fit.theta, fit.std_errors, fit.p_values)
        ):
            if not name.startswith(homophily_prefix):
                continue
            rows.append(
                f"{point.kind},{point.value:g},{name},{_num(est)},{_num(se)},"
                f"{_num(mc_sd[j])},{_num(p)},{_num(fit.loglik)},{_num(fit.loglik_sd)},ok"
            )
    return rows


def cmd_profile(args) -> int:
    net, attrs = _load_inputs(args)
    spec, canonical = _read_model(args)
    config = _config_json(args, canonical)
    control = estimate.FitControl(sampler=_sampler_control(args))
    grids: list[tuple[str, list[float]]] = []
    if args.alpha_grid:
        grids.append(("alpha", DEFAULT_GRID if args.alpha_grid == "default" else _parse_floats(args.alpha_grid)))
    if args.beta_grid:
        grids.append(("beta", DEFAULT_GRID if args.beta_grid == "default" else _parse_floats(args.beta_grid)))
    if not grids:
        grids = [("alpha", DEFAULT_GRID), ("beta", DEFAULT_GRID)]
    header = "kind,exponent,stat,coef,coef_se,coef_mc_sd,p_value,loglik,loglik_sd,status"
    rows = [header]
    for which, grid in grids:
        points = estimate.profile(
            spec, which, grid, net, attrs, control=control, method=args.method
        )
        rows += _profile_rows(points, ("b1nodematch", "b2nodematch"))
    _emit(args, "profile.csv", "\n".join(rows) + "\n", config)
    return EXIT_OK


def cmd_simulate(args) -> int:
    net, attrs = _load_inputs(args)
    spec, canonical = _read_model(args)
    config = _config_json(args, canonical)
    theta = _parse_floats(args.theta)
    control = _sampler_control(args)
    sample = sampler.simulate(spec, attrs, theta, net, control)
    lines = [",".join(sample.names)]
    lines += [",".join(_num(v) for v in row) for row in sample.stats]
    _emit(args, "sample.csv", "\n".join(lines) + "\n", config)
    if args.save_final_network:
        io.save_network(
            args.save_final_network,
            sample.final_network,
            comments=[f"config: {config}"],
        )
    return EXIT_OK


def cmd_oracle(args) -> int:
    net, attrs = _load_inputs(args)
    spec, canonical = _read_model(args)
    config = _config_json(args, canonical)
    model = oracle.ExactModel(spec, attrs, net.n1, net.n2)
    if args.what == "kappa":
        theta = _parse_floats(args.theta)
        value = oracle.exact_kappa(model, theta)
        _emit(args, "kappa.txt", f"log_kappa,{_num(value)}\n", config)
        return EXIT_OK
    if args.what == "mle":
        theta_hat = oracle.exact_mle(model, net)
        loglik = oracle.exact_loglik(model, theta_hat, net)
        lines = ["statistic,estimate"]
        lines += [f"{n},{_num(v)}" for n, v in zip(model.names, theta_hat)]
        lines.append(f"loglik,{_num(loglik)}")
        _emit(args, "exact_mle.csv", "\n".join(lines) + "\n", config)
        return EXIT_OK
    theta = _parse_floats(args.theta)
    dist = oracle.exact_dyad_distribution(model, theta)
    lines = ["state,probability"]
    lines += [f"{code},{_num(p)}" for code, p in enumerate(dist.probabilities)]
    lines.append("dyad_i,dyad_k,marginal")
    lines += [
        f"{i},{k},{_num(m)}" for (i, k), m in zip(dist.dyads, dist.marginals)
    ]
    _emit(args, "distribution.csv", "\n".join(lines) + "\n", config)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser construction and dispatch
# ---------------------------------------------------------------------------


def _add_io_args(p: argparse.ArgumentParser, attrs: bool = True) -> None:
    p.add_argument("--network", required=True, help="edge-list file")
    if attrs:
        p.add_argument("--attrs1", help="mode-1 attribute file")
        p.add_argument("--attrs2", help="mode-2 attribute file")
    p.add_argument("--out", help="output directory (default: stdout)")


def _add_sampler_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--interval", type=int, default=1024)
    p.add_argument("--samplesize", type=int, default=1000)
    p.add_argument("--proposal", choices=["tnt", "uniform"], default="tnt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bipergm",
        description="bipartite exponential-family random graph models",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("stats", help="evaluate model statistics on a network")
    _add_io_args(p)
    p.add_argument("--model", required=True, help='formula, e.g. \'edges + b1cov("x")\', or @file')
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="fit model coefficients")
    _add_io_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=["mple", "mcmcmle"], default="mcmcmle")
    p.add_argument("--degeneracy-error", action="store_true")
    _add_sampler_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("profile", help="profile likelihood over the homophily exponent")
    _add_io_args(p)
    p.add_argument("--model", required=True, help="formula with one exponent-free nodematch term")
    p.add_argument("--method", choices=["mple", "mcmcmle"], default="mcmcmle")
    p.add_argument("--alpha-grid", help="comma-separated values or 'default'")
    p.add_argument("--beta-grid", help="comma-separated values or 'default'")
    _add_sampler_args(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("project", help="one-mode weighted projection")
    _add_io_args(p, attrs=False)
    p.add_argument("--mode", type=int, choices=[1, 2], required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("simulate", help="draw networks and emit statistic samples")
    _add_io_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--theta", required=True, help="comma-separated coefficients")
    p.add_argument("--save-final-network", help="write the final network as an edge list")
    _add_sampler_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact enumeration on tiny networks")
    _add_io_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--what", choices=["kappa", "mle", "distribution"], required=True)
    p.add_argument("--theta", default="", help="comma-separated coefficients (kappa/distribution)")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except formula.FormulaSyntaxError as exc:
        print(f"error: formula: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (io.FileFormatError, OSError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (KeyError, ColumnTypeError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except oracle.SizeCapError as exc:
        print(f"error: estimation: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except estimate.EstimationError as exc:
        print(f"error: estimation: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
