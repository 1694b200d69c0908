"""Command-line interface: simulate, fit, metrics, export-graph, replicate-study.

Failures print one line ``error: <ErrorClass>: <message>`` to stderr and
exit with the class's code (2 usage/config, 3 domain, 4 numerical or
stability).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import FitConfig, load_config, read_known_effects
from .dist import make_rng
from .exceptions import ConfigurationError, SagraphError
from .gibbs import posterior_summary, read_chain, run_gibbs, select_edges, write_chain
from .graph import build_chain_graph, export_graph
from .lattice import WeightPair, build_weights, read_layout, strip_layout, write_layout
from .metrics import f1, frobenius, rmse
from .params import KnownMask, Symmetric, Triangular
from .simulate import NETWORK_KINDS, read_truth, simulate_dataset, write_truth
from .study import aggregate, preset_cells, run_study, write_records

__all__ = ["main", "build_parser"]

logger = logging.getLogger("sagraph")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_config(args) -> tuple[FitConfig, int]:
    cfg, cfg_seed = load_config(getattr(args, "config", None))
    changes = {}
    for name in ("iterations", "burn_in", "prior", "restriction", "tau", "mh_step"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    if getattr(args, "greedy_accept", False):
        changes["greedy_accept"] = True
    if getattr(args, "known_effects", None):
        changes["known_effects"] = read_known_effects(args.known_effects)
    if changes:
        cfg = FitConfig.from_dict({**cfg.to_dict(), **changes})
    seed = args.seed if args.seed is not None else (cfg_seed if cfg_seed is not None else 0)
    return cfg, int(seed)


def _write_matrix_csv(path: Path, x: np.ndarray) -> None:
    with path.open("w") as fh:
        fh.write(",".join(f"v{j + 1}" for j in range(x.shape[1])) + "\n")
        for row in x:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _read_data(path: str) -> np.ndarray:
    p = Path(path)
    try:
        header = p.open().readline().strip().split(",")
        x = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read data {path}: {exc}") from exc
    if header != [f"v{j + 1}" for j in range(x.shape[1])]:
        raise ConfigurationError(f"{path}: header must be v1..vp")
    return x


def _read_square(path: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read weight matrix {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    cfg, seed = _resolve_config(args)
    out = _out_dir(args)
    p = args.p
    if cfg.restriction == "symmetric":
        restriction = Symmetric()
    elif cfg.restriction == "triangular":
        restriction = Triangular(cfg.orientation)
    else:
        restriction = KnownMask.from_records(p, cfg.known_effects)
    layout = read_layout(args.layout) if args.layout else strip_layout(args.n)
    data = simulate_dataset(layout.n, p, args.network, restriction, sparse=cfg.is_normal_gamma,
                            rng=make_rng(seed), tau=cfg.tau, edge_prob=args.edge_prob, layout=layout)
    _write_matrix_csv(out / "X.csv", data.x)
    write_layout(layout, out / "layout.csv")
    write_truth(out / "truth.json", data.effects, data.theta, seed=seed, config=cfg.to_dict(),
                config_hash=cfg.hash(), model_hash=cfg.model_hash(), network=args.network,
                adjacency=data.adjacency.tolist(), version=__version__)
    print(f"wrote {out / 'X.csv'}, {out / 'layout.csv'}, {out / 'truth.json'}")
    return 0


def cmd_fit(args) -> int:
    cfg, seed = _resolve_config(args)
    out = _out_dir(args)
    x = _read_data(args.data)
    if args.layout:
        weights = build_weights(read_layout(args.layout))
    elif args.w21 and args.w12:
        weights = WeightPair(_read_square(args.w21), _read_square(args.w12))
    else:
        raise ConfigurationError("fit needs --layout or both --w21 and --w12")
    try:
        chain = run_gibbs(x, weights, cfg, seed=seed)
    except SagraphError as exc:
        partial = getattr(exc, "partial_chain", None)
        if partial is not None:
            write_chain(partial, out / "chain.partial.csv")
        raise
    write_chain(chain, out / "chain.csv")
    stamp = {"seed": seed, "config_hash": cfg.hash(), "model_hash": cfg.model_hash(),
             "version": __version__}
    s = posterior_summary(chain)
    summary = dict(stamp, **{k: getattr(s, k).tolist() for k in s.__dataclass_fields__})
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sel = select_edges(chain)
    selection = dict(stamp, level=cfg.level, within=sel.within.tolist(),
                     between_1=sel.between_1.tolist(), between_2=sel.between_2.tolist())
    (out / "selection.json").write_text(json.dumps(selection, indent=2, sort_keys=True) + "\n")
    print(f"wrote chain, summary and selection to {out} (acceptance {chain.acceptance_rate:.3f})")
    return 0


def cmd_metrics(args) -> int:
    psi_true, theta_true, meta = read_truth(args.truth)
    chain = read_chain(args.chain)
    chain_hash = chain.config.hash()
    if meta.get("model_hash") != chain.config.model_hash() and not args.force:
        raise ConfigurationError(
            f"model config hash mismatch: truth {meta.get('model_hash')} vs chain "
            f"{chain.config.model_hash()} (use --force)"
        )
    s = posterior_summary(chain)
    sel = select_edges(chain)
    template = chain.effects_template()
    universe = template.parameter_mask() if args.include_restricted else template.free_mask()
    row = {
        "fn": frobenius(theta_true, s.theta_mean),
        "rmse": rmse(psi_true, s.psi_mean),
        "f1": f1(psi_true != 0, sel, universe),
        "seed": chain.seed,
        "config_hash": chain_hash,
    }
    lines = ["fn,rmse,f1,seed,config_hash",
             "%.10g,%.10g,%.10g,%s,%s" % (row["fn"], row["rmse"], row["f1"], row["seed"], row["config_hash"])]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_export_graph(args) -> int:
    chain = read_chain(args.chain)
    s = posterior_summary(chain)
    sel = select_edges(chain, args.level)
    cats = tuple(args.categories.split(","))
    if len(cats) != 2:
        raise ConfigurationError("--categories needs two comma-separated labels")
    text = export_graph(build_chain_graph(s.theta_mean, s.psi_mean, sel, cats), args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replicate_study(args) -> int:
    cells, reps, iterations, burn_in = preset_cells(args.preset)
    reps = args.replications or reps
    iterations = args.iterations or iterations
    burn_in = args.burn_in if args.burn_in is not None else burn_in
    cfg, seed = _resolve_config(argparse.Namespace(config=args.config, seed=args.seed,
                                                   greedy_accept=args.greedy_accept))
    out = _out_dir(args)
    records = run_study(cells, reps, seed, iterations, burn_in, threads=args.threads, base=cfg)
    rows = aggregate(records)
    write_records(records, out / "replications.csv")
    write_records(rows, out / "report.csv")
    for r in rows:
        print(f"{r['network']:>10} n={r['n']:<4} p={r['p']:<3} {r['prior']:<13} {r['restriction']:<11} "
              f"FN {r['fn']:.2f} ({r['fn_se']:.2f})  RMSE {r['rmse']:.2f} ({r['rmse_se']:.2f})  "
              f"F1 {r['f1']:.2f} ({r['f1_se']:.2f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, threads=False):
        sp.add_argument("--seed", type=int, help="64-bit seed (overrides the config's seed)")
        sp.add_argument("--config", help="TOML config file")
        sp.add_argument("--out-dir", default=".", help="directory for output artifacts")
        sp.add_argument("--greedy-accept", action="store_true",
                        help="accept a proposal only if it raises the posterior (not MH)")
        if threads:
            sp.add_argument("--threads", type=int, default=1, help="worker processes")

    sp = sub.add_parser("simulate", help="simulate data, layout and ground truth")
    common(sp)
    sp.add_argument("--n", type=int, default=100, help="locations on the alternating strip")
    sp.add_argument("--p", type=int, default=4, help="variables per location")
    sp.add_argument("--network", choices=NETWORK_KINDS, default="random")
    sp.add_argument("--edge-prob", type=float, default=0.2)
    sp.add_argument("--layout", help="use this layout file instead of a strip")
    sp.add_argument("--prior", choices=["normal", "normal-gamma"])
    sp.add_argument("--restriction", choices=["symmetric", "triangular", "known-mask"])
    sp.add_argument("--known-effects", help="k,i,j,mean,sd records")
    sp.add_argument("--tau", type=float)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="run the Gibbs sampler")
    common(sp)
    sp.add_argument("--data", required=True, help="CSV with header v1..vp")
    sp.add_argument("--layout", help="layout file (id,category,neighbours)")
    sp.add_argument("--w21", help="explicit weight matrix for psi_1 (headerless CSV)")
    sp.add_argument("--w12", help="explicit weight matrix for psi_2 (headerless CSV)")
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--prior", choices=["normal", "normal-gamma"])
    sp.add_argument("--restriction", choices=["symmetric", "triangular", "known-mask"])
    sp.add_argument("--known-effects", help="k,i,j,mean,sd records")
    sp.add_argument("--tau", type=float)
    sp.add_argument("--mh-step", dest="mh_step", type=float)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("metrics", help="compare a chain with the ground truth")
    sp.add_argument("--truth", required=True)
    sp.add_argument("--chain", required=True)
    sp.add_argument("--out", help="also write the record here")
    sp.add_argument("--force", action="store_true", help="ignore a config hash mismatch")
    sp.add_argument("--include-restricted", action="store_true",
                    help="count tight-prior entries in the F1 universe")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("export-graph", help="chain graph as dot or structured JSON")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--format", choices=["dot", "structured"], default="dot")
    sp.add_argument("--level", type=float, help="credible level (default from the chain config)")
    sp.add_argument("--categories", default="c1,c2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_graph)

    sp = sub.add_parser("replicate-study", help="replicated simulation study with a summary report")
    common(sp, threads=True)
    sp.add_argument("--preset", default="desk", help="desk, smoke or table")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.set_defaults(func=cmd_replicate_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SagraphError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
