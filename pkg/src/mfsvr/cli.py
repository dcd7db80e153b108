"""Command-line entry point: ``mfsvr {sweep,cv,doe,fit,predict}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .benchmarks import get_family
from .cosvr import DEFAULT_GAMMA, MultiFidelityData, fit_cosvr
from .errors import DataError, MfsvrError
from .experiments import load_config, load_dataset, run_cv, run_sweep, sample_valid, write_result
from .gwo import GwoConfig
from .io import load_model, read_samples, save_model, write_samples, write_table
from .lssvr import bounding_box

logger = logging.getLogger("mfsvr")


def _add_gwo_args(p):
    p.add_argument("--population", type=int, default=30, help="grey wolves (default 30)")
    p.add_argument("--iterations", type=int, default=200, help="GWO iterations (default 200)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="ridge weight (default 1e4)")
    p.add_argument("--objective", choices=("training", "loo"), default="training")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfsvr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an m-sweep study from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("cv", help="k-fold CV of Co_SVR and LS-SVR on external LF/HF tables")
    p.add_argument("--lf", required=True)
    p.add_argument("--hf", required=True)
    p.add_argument("--test", help="separate HF test table (default: held-out HF rows)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True)
    _add_gwo_args(p)

    p = sub.add_parser("doe", help="write a Latin hypercube design for a benchmark family")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--fidelity", choices=("hf", "lf", "none"), default="hf", help="'none' writes inputs only")
    p.add_argument("--m", type=float, default=0.0, help="correlation knob for --fidelity lf")
    p.add_argument("--domain", default=None, help="domain preset (default: the declared domain)")

    p = sub.add_parser("fit", help="fit Co_SVR to LF/HF sample tables")
    p.add_argument("--lf", required=True)
    p.add_argument("--hf", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--history-out", help="write the GWO convergence history as CSV")
    _add_gwo_args(p)

    p = sub.add_parser("predict", help="predict HF responses with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    return parser


def _cmd_sweep(args):
    result = run_sweep(load_config(args.config), n_jobs=args.jobs)
    for path in write_result(result, args.out):
        logger.info("wrote %s", path)


def _cmd_cv(args):
    data = load_dataset(args.lf, args.hf, args.test)
    result = run_cv(
        data,
        folds=args.folds,
        seed=args.seed,
        gwo_population=args.population,
        gwo_iterations=args.iterations,
        gamma=args.gamma,
        objective=args.objective,
    )
    write_result(result, args.out)


def _cmd_doe(args):
    fam = get_family(args.family)
    box = fam.domain_for(args.domain)
    need = "both" if args.fidelity == "lf" else "hf"
    pts, resampled = sample_valid(fam, box, args.n, args.seed, need)
    if resampled:
        logger.info("resampled %d non-evaluable points", resampled)
    y = None
    if args.fidelity == "hf":
        y = fam.hf(pts)
    elif args.fidelity == "lf":
        y = fam.lf(pts, args.m)
    write_samples(args.out, pts, y)


def _cmd_fit(args):
    lf = read_samples(args.lf)
    hf = read_samples(args.hf)
    if lf.dim != hf.dim:
        raise DataError(f"LF table has {lf.dim} inputs, HF table has {hf.dim}")
    box = bounding_box(lf.points, hf.points)
    data = MultiFidelityData(lf.to_samples(box), hf.to_samples(box))
    cfg = GwoConfig(args.population, args.iterations, args.seed)
    model = fit_cosvr(data, gwo_cfg=cfg, gamma=args.gamma, objective=args.objective)
    if model.meta["all_penalty"]:
        logger.warning("no hyperparameters produced a well-conditioned system")
    save_model(model, args.model_out)
    if args.history_out:
        write_table(
            args.history_out,
            [["iteration", "best_score"]] + [[i + 1, repr(v)] for i, v in enumerate(model.meta["history"])],
        )
    logger.info("HF training RMSE %.6g", model.meta["best_score"])


def _cmd_predict(args):
    model = load_model(args.model)
    table = read_samples(args.points, require_response=False)
    dim = model.training.dim
    pts = table.points
    names = table.input_names
    if pts.shape[1] == dim + 1:
        pts, names = pts[:, :dim], names[:dim]
    elif pts.shape[1] != dim:
        raise DataError(f"points table has {pts.shape[1]} columns, model expects {dim} inputs")
    y = np.atleast_1d(model.predict(pts))
    write_samples(args.out, pts, y, input_names=names, units=table.units)


_COMMANDS = {"sweep": _cmd_sweep, "cv": _cmd_cv, "doe": _cmd_doe, "fit": _cmd_fit, "predict": _cmd_predict}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _COMMANDS[args.command](args)
    except MfsvrError as exc:
        print(f"mfsvr {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
