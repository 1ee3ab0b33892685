"""Command line: ``frechetnet {fit, project-sweep, check-activation, gradcheck}``.

Exit codes: 0 success, 1 validation failure, 2 numerical failure (divergence
or a failed check), 3 I/O failure. Artifacts go to ``--out``; CSV and report
bodies depend only on the inputs and the seed, and the wall-clock time of a
run is kept in ``run.json``.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

from . import activation as act_mod
from . import data as data_mod
from . import experiments as exp
from .errors import DimensionError, DivergenceError, ParseError, ValidationError
from .network import InitScheme
from .training import CompactBox, TrainConfig, sample_compact

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class CheckFailed(Exception):
    pass


def _floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {text!r}")
    return vals


def _box(text: str) -> tuple[float, float]:
    c, p = _floats(text, 2)
    return c, p


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if not vals or any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _init(text: str) -> InitScheme:
    try:
        return InitScheme.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_activation(p: argparse.ArgumentParser, default: str = "rank_one") -> None:
    p.add_argument("--activation", default=default, choices=sorted(act_mod.VARIANTS),
                   help="builtin activation variant (default: %(default)s)")
    p.add_argument("--activation-config", type=Path, metavar="PATH",
                   help="JSON activation document; overrides --activation")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dim", type=int, default=64, help="ambient dimension D (default: %(default)s)")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frechetnet", description="Batch experiments with networks on Frechet-space coefficient models.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="train a network on a builtin target or a dataset file")
    _add_common(fit)
    _add_activation(fit)
    fit.add_argument("--neurons", type=int, default=8, help="hidden neurons M")
    fit.add_argument("--layers", type=int, default=1, help="n > 1 builds a deep net of n layers")
    fit.add_argument("--box", type=_box, default=(1.0, 1.0), metavar="c,p",
                     help="sampling box s_k = c k^-p (default: 1,1)")
    fit.add_argument("--train-size", type=int, default=512)
    fit.add_argument("--test-size", type=int, default=512)
    fit.add_argument("--epochs", type=int, default=100)
    fit.add_argument("--lr", type=float, default=1e-2)
    fit.add_argument("--optimizer", default="adaptive", choices=("sgd", "momentum", "adaptive"))
    fit.add_argument("--target", default="linear",
                     help="linear, quadratic, softplus_linear or a coefficient CSV path")
    fit.add_argument("--init", type=_init, default=InitScheme(), metavar="SCHEME",
                     help="fan_in or uniform(a), optionally ', hidden=h, bias=c' (default: fan_in)")
    fit.add_argument("--batch-size", type=int)
    fit.add_argument("--final-layer-only", action="store_true", help="train the output weights only")
    fit.add_argument("--threads", type=int, default=1)
    fit.add_argument("--wall-clock", action="store_true", help="add a wall_ms column to metrics.csv")

    sweep = sub.add_parser("project-sweep", help="deviation of projected networks from the full one")
    _add_common(sweep)
    _add_activation(sweep)
    sweep.add_argument("--model", type=Path, help="model document; a random net is drawn if absent")
    sweep.add_argument("--neurons", type=int, default=8)
    sweep.add_argument("--project-dims", type=_ints, default=[4, 8, 16, 32, 64], metavar="N1,N2,...")
    sweep.add_argument("--box", type=_box, default=(1.0, 1.0), metavar="c,p")
    sweep.add_argument("--test-size", type=int, default=512, help="cloud size")
    sweep.add_argument("--delta", type=float, default=exp.DEFAULT_DELTA)

    check = sub.add_parser("check-activation", help="verify the declared activation properties")
    _add_common(check)
    _add_activation(check, default="separating_bump")
    check.add_argument("--samples", type=int, default=10_000)
    check.add_argument("--lambda-max", type=float, default=1e6)

    gc = sub.add_parser("gradcheck", help="analytic gradients against central differences")
    _add_common(gc)
    gc.add_argument("--activation", default="all", choices=["all", *sorted(act_mod.VARIANTS)])
    gc.add_argument("--activation-config", type=Path, metavar="PATH")
    gc.add_argument("--project-dims", type=_ints, default=None, metavar="N1,N2,...",
                    help="dimensions to test (default: --dim)")
    gc.add_argument("--nets", type=int, default=20)
    gc.add_argument("--samples", type=int, default=8)
    gc.add_argument("--corrupt-jacobian", action="store_true", help=argparse.SUPPRESS)
    return parser


# -- helpers -------------------------------------------------------------------


def _load_activation(args, dim: int):
    if args.activation_config is not None:
        doc = json.loads(args.activation_config.read_text(encoding="utf-8"))
        act = act_mod.activation_from_dict(doc)
        if act.dim is not None and act.dim != dim:
            raise DimensionError(f"activation has dimension {act.dim}, run uses --dim {dim}")
        return act
    return act_mod.default_activation(args.activation, dim)


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8", newline="")


def _run_meta(args, out: Path) -> None:
    meta = {}
    for key, value in vars(args).items():
        if isinstance(value, tuple):
            value = list(value)
        elif not isinstance(value, (int, float, bool, type(None), list)):
            value = str(value)
        meta[key] = value
    meta["finished"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    _write_json(out / "run.json", meta)


# -- commands ------------------------------------------------------------------


def cmd_fit(args) -> int:
    act = _load_activation(args, args.dim)
    spec = exp.FitSpec(
        dim=args.dim, activation=act, neurons=args.neurons, layers=args.layers, box=args.box,
        train_size=args.train_size, test_size=args.test_size, target=args.target, init=args.init,
        train=TrainConfig(args.optimizer, args.lr, args.epochs, batch_size=args.batch_size,
                          seed=args.seed, train_final_layer_only=args.final_layer_only,
                          threads=args.threads),
    )
    outcome = exp.run_fit(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    data_mod.save_model(args.out / "model.json", outcome.result.net)
    data_mod.save_metrics_csv(args.out / "metrics.csv", outcome.result.history, args.wall_clock)
    _run_meta(args, args.out)
    print(f"train_loss={outcome.train_loss!r} test_sup_error={outcome.test_sup_error!r}")
    return EXIT_OK


def cmd_project_sweep(args) -> int:
    if args.model is not None:
        net = data_mod.load_model(args.model)
    else:
        net = exp.random_shallow(args.dim, _load_activation(args, args.dim), args.neurons, args.seed)
    box = CompactBox.from_rule(*args.box, net.dim)
    cloud = sample_compact(box, args.test_size, args.seed, "sweep")
    rows = exp.project_sweep(net, args.project_dims, cloud)
    args.out.mkdir(parents=True, exist_ok=True)
    data_mod.save_sweep_csv(args.out / "sweep.csv", rows)
    n_star = exp.measured_n_star(rows, args.delta)
    _run_meta(args, args.out)
    for n, d in rows:
        print(f"N={n} sup_deviation={d!r}")
    print(f"n_star={n_star} delta={args.delta!r}")
    return EXIT_OK


def cmd_check_activation(args) -> int:
    act = _load_activation(args, args.dim)
    report = exp.check_activation(act, args.dim, args.seed, samples=args.samples, lam_max=args.lambda_max)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "check_report.json", report)
    _run_meta(args, args.out)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
    if not report["passed"]:
        raise CheckFailed("an activation check failed")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    dims = args.project_dims or [args.dim]
    if args.activation_config is not None:
        doc = json.loads(args.activation_config.read_text(encoding="utf-8"))
        acts = {doc.get("kind", "config"): act_mod.activation_from_dict(doc)}
    else:
        names = sorted(act_mod.VARIANTS) if args.activation == "all" else [args.activation]
        acts = {k: (lambda d, k=k: act_mod.default_activation(k, d)) for k in names}
    report = exp.gradcheck(acts, dims, args.nets, args.seed, samples=args.samples,
                           corrupt=args.corrupt_jacobian)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "gradcheck_report.json", report)
    _run_meta(args, args.out)
    print(f"max_rel_error={report['max_rel_error']!r} tolerance={report['tolerance']!r}")
    if not report["passed"]:
        raise CheckFailed("gradient check failed")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "project-sweep": cmd_project_sweep,
    "check-activation": cmd_check_activation,
    "gradcheck": cmd_gradcheck,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DivergenceError, CheckFailed, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParseError, ValidationError, DimensionError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
