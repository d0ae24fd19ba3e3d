"""Command-line pipeline: fit, sample, optimize, sensitivity, diagnostics.

Every command takes --config (YAML run configuration) and writes its
reports under the output directory. Numeric tables print with 6
significant digits; JSON and CSV files keep full precision. Commands
compose through files: `sample` writes a chain that `optimize` and
`sensitivity` can reuse via the chain_path config key.

Exit codes: 0 success, 1 computational failure (non-convergence, sampler
guard, quadrature), 2 usage or I/O error.
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import costs, data, inference, mcmc, optimizer
from .config import load_run_config
from .errors import (ConfigError, DataError, DomainError,
                     InvalidParameterError, Warranty2dError)

_PARAM_NAMES = mcmc.CHAIN_HEADER


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _table(rows, out=sys.stdout):
    widths = [max(len(_fmt(r[i])) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(_fmt(v).rjust(w) for v, w in zip(r, widths)),
              file=out)


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")


def _load_records(cfg):
    ds = cfg.dataset
    if ds.builtin == "locomotive":
        return data.load_locomotive()
    if ds.builtin == "starter":
        return data.load_starter()
    return data.load_dataset(ds.path, age_col=ds.age_col,
                             usage_col=ds.usage_col,
                             scale_factor=ds.scale_factor)


def _censored(cfg, records):
    c = cfg.censoring
    return data.apply_censoring(records, c.t0, c.u0, pad_to_n=c.pad_to_n)


def _fit(cfg, dataset):
    return inference.fit_mle(dataset, censor_mode=cfg.censor_mode)


def _prior(cfg, mle):
    if cfg.prior.source == "explicit":
        return mcmc.PriorHyper(np.asarray(cfg.prior.a, dtype=float),
                               np.asarray(cfg.prior.b, dtype=float))
    if mle.std_errors is None:
        raise ConfigError("cannot elicit priors: no standard errors "
                          "(information matrix not invertible)")
    return mcmc.elicit_hyperparams(mle.psi_hat.as_array(),
                                   np.asarray(mle.std_errors) ** 2)


def _chain(cfg, dataset=None, mle=None):
    if cfg.chain_path is not None:
        return mcmc.load_chain(cfg.chain_path)
    if dataset is None:
        records = _load_records(cfg)
        dataset = _censored(cfg, records)
    if mle is None:
        mle = _fit(cfg, dataset)
    hyper = _prior(cfg, mle)
    return mcmc.mh_sample(dataset, hyper, mle.psi_hat, cfg.mcmc,
                          censor_mode=cfg.censor_mode)


def _cost_config(cfg, chain):
    """CostConfig with the derived quantities resolved; returns
    (cost_config, derived-values dict)."""
    cs = cfg.cost
    derived = {}
    lt, lu = cs.lt, cs.lu
    if lt is None:
        lt = mcmc.predictive_quantile("age", 0.5, chain)
        derived["lt"] = lt
    if lu is None:
        lu = mcmc.predictive_quantile("usage", 0.5, chain)
        derived["lu"] = lu
    a2, a3 = cs.a2, cs.a3
    if a2 is None:
        t_w = cs.t_w
        if t_w is None:
            t_w = mcmc.predictive_quantile("age", cs.frw_quantile, chain)
            derived["t_w"] = t_w
        a2 = costs.calibrate_benefit_rate(t_w, cs.q_star)
        derived["a2"] = a2
    if a3 is None:
        u_w = cs.u_w
        if u_w is None:
            u_w = mcmc.predictive_quantile("usage", cs.frw_quantile, chain)
            derived["u_w"] = u_w
        a3 = costs.calibrate_benefit_rate(u_w, cs.q_star)
        derived["a3"] = a3
    cost_cfg = costs.CostConfig(s=cs.s, c=cs.c, m=cs.m, a2=a2, a3=a3,
                                lt=lt, lu=lu, q1t=cs.q1t, q2t=cs.q2t,
                                q1u=cs.q1u, q2u=cs.q2u)
    return cost_cfg, derived


def cmd_fit(cfg, out, args):
    records = _load_records(cfg)
    dataset = _censored(cfg, records)
    mle = _fit(cfg, dataset)
    report = {
        "psi_hat": dict(zip(_PARAM_NAMES, mle.psi_hat.as_array().tolist())),
        "std_errors": (dict(zip(_PARAM_NAMES, map(float, mle.std_errors)))
                       if mle.std_errors is not None else None),
        "log_likelihood": mle.log_lik,
        "converged": mle.converged,
        "iterations": mle.n_iter,
        "n": dataset.n, "failures": dataset.d,
        "censor_mode": cfg.censor_mode,
    }
    try:
        diag = data.marginal_diagnostics(dataset)
        report["diagnostics"] = {
            "ad_stat_age": diag.ad_stat_age, "ad_p_age": diag.ad_p_age,
            "ad_stat_usage": diag.ad_stat_usage,
            "ad_p_usage": diag.ad_p_usage,
            "pearson_r": diag.pearson_r,
            "marginal_mles": [list(m) for m in diag.marginal_mles],
        }
    except DataError:
        report["diagnostics"] = None
    _write_json(out / "fit_report.json", report)
    rows = [("parameter", "estimate", "std. error")]
    for i, name in enumerate(_PARAM_NAMES):
        se = float(mle.std_errors[i]) if mle.std_errors is not None else "-"
        rows.append((name, float(mle.psi_hat.as_array()[i]), se))
    _table(rows)
    print(f"log-likelihood {_fmt(mle.log_lik)}  "
          f"({dataset.d} failures / {dataset.n} units)")
    if not mle.converged:
        print("fit did not converge", file=sys.stderr)
        return 1
    return 0


def cmd_sample(cfg, out, args):
    records = _load_records(cfg)
    dataset = _censored(cfg, records)
    mle = _fit(cfg, dataset)
    chain = _chain(cfg, dataset, mle)
    mcmc.save_chain(chain, out / "chain.csv")
    for j, name in enumerate(_PARAM_NAMES):
        with (out / f"trace_{name}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", name])
            for i, v in enumerate(chain.draws[:, j]):
                w.writerow([chain.burn_in + i + 1, repr(float(v))])
    quantiles = {
        "median_age": mcmc.predictive_quantile("age", 0.5, chain),
        "median_usage": mcmc.predictive_quantile("usage", 0.5, chain),
        "frw_age": mcmc.predictive_quantile(
            "age", cfg.cost.frw_quantile, chain),
        "frw_usage": mcmc.predictive_quantile(
            "usage", cfg.cost.frw_quantile, chain),
    }
    report = {"acceptance_rate": chain.acceptance_rate, "seed": chain.seed,
              "n_iter": chain.n_iter, "burn_in": chain.burn_in,
              "draws": len(chain),
              "posterior_mean": dict(zip(
                  _PARAM_NAMES, chain.draws.mean(axis=0).tolist())),
              "predictive_quantiles": quantiles}
    _write_json(out / "sample_report.json", report)
    rows = [("quantity", "value"),
            ("acceptance rate", chain.acceptance_rate)]
    rows += [(f"posterior mean {n}", float(v))
             for n, v in zip(_PARAM_NAMES, chain.draws.mean(axis=0))]
    rows += [(k, float(v)) for k, v in quantiles.items()]
    _table(rows)
    return 0


def cmd_optimize(cfg, out, args):
    chain = _chain(cfg)
    cost_cfg, derived = _cost_config(cfg, chain)
    opt = cfg.optimizer
    thinned = chain.thin(opt.thin) if opt.thin else chain
    init = (costs.WarrantyRegion(*opt.init) if opt.init is not None else None)
    result = optimizer.optimize_region(
        thinned, cost_cfg, init=init, n_restarts=opt.n_restarts,
        nodes=opt.nodes, paper_literal=args.paper_literal_d,
        rectangle_masses=args.rectangle_masses,
        seed=opt.seed, threads=args.threads)
    breakdown = costs.utility_breakdown(
        result.region, thinned, cost_cfg, nodes=opt.nodes,
        paper_literal=args.paper_literal_d,
        rectangle_masses=args.rectangle_masses)
    report = {
        "region": dict(zip(("t_w1", "t_w2", "u_w1", "u_w2"),
                           result.region.as_array().tolist())),
        "utility": result.utility,
        "iterations": result.iterations,
        "converged": result.converged,
        "restarts_used": result.restarts_used,
        "breakdown": breakdown,
        "derived": derived,
        "paper_literal_d": bool(args.paper_literal_d),
        "rectangle_masses": bool(args.rectangle_masses),
    }
    if args.paper_literal_d or args.rectangle_masses:
        report["breakdown_default"] = costs.utility_breakdown(
            result.region, thinned, cost_cfg, nodes=opt.nodes)
    _write_json(out / "optimize_report.json", report)
    rows = [("quantity", "value")]
    rows += list(report["region"].items())
    rows += [("utility", result.utility),
             ("economic benefit", breakdown["economic_benefit"]),
             ("warranty cost", breakdown["warranty_cost"]),
             ("dissatisfaction cost", breakdown["dissatisfaction_cost"]),
             ("converged", result.converged)]
    _table(rows)
    return 0 if result.converged else 1


def _load_grid(path):
    raw = yaml.safe_load(Path(path).read_text())
    if raw is None:
        return []
    if isinstance(raw, dict) and "grid" in raw:
        raw = raw["grid"]
    if not isinstance(raw, list) or not all(isinstance(r, dict) for r in raw):
        raise ConfigError(f"{path}: grid spec must be a list of mappings")
    return raw


def cmd_sensitivity(cfg, out, args):
    grid = _load_grid(args.grid)
    records = _load_records(cfg)
    dataset = _censored(cfg, records)
    chain = _chain(cfg, dataset)
    cost_cfg, _ = _cost_config(cfg, chain)
    opt = cfg.optimizer
    init = (costs.WarrantyRegion(*opt.init) if opt.init is not None else None)
    rows = optimizer.sensitivity_scan(
        chain, cost_cfg, grid, n_restarts=opt.n_restarts, nodes=opt.nodes,
        paper_literal=args.paper_literal_d,
        rectangle_masses=args.rectangle_masses, seed=opt.seed,
        threads=args.threads, init=init, records=records,
        mcmc_config=cfg.mcmc, censor_mode=cfg.censor_mode,
        q_star=cfg.cost.q_star, frw_quantile=cfg.cost.frw_quantile,
        thin=opt.thin)
    varied_keys = sorted({k for row in rows for k in row.varied})
    derived_keys = sorted({k for row in rows for k in (row.derived or {})
                           if not isinstance((row.derived or {})[k], list)})
    header = (varied_keys + derived_keys
              + ["t_w1", "t_w2", "u_w1", "u_w2", "utility", "converged",
                 "error"])
    path = out / "sensitivity.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            rec = [row.varied.get(k, "") for k in varied_keys]
            rec += [(row.derived or {}).get(k, "") for k in derived_keys]
            if row.result is not None:
                r = row.result
                rec += [repr(float(v)) for v in r.region.as_array()]
                rec += [repr(float(r.utility)), r.converged, ""]
            else:
                rec += [""] * 5 + [row.error]
            w.writerow(rec)
    display = [header[:len(header) - 1]]
    for row in rows:
        line = [row.varied.get(k, "") for k in varied_keys]
        line += [(row.derived or {}).get(k, "") for k in derived_keys]
        if row.result is not None:
            line += list(row.result.region.as_array())
            line += [row.result.utility, row.result.converged]
        else:
            line += ["failed"] * 6
        display.append(tuple(line))
    _table(display)
    failures = [row for row in rows if row.error]
    print(f"wrote {path} ({len(rows)} rows, {len(failures)} failed)")
    return 0


def cmd_diagnostics(cfg, out, args):
    records = _load_records(cfg)
    dataset = _censored(cfg, records)
    diag = data.marginal_diagnostics(dataset)
    report = {
        "ad_stat_age": diag.ad_stat_age, "ad_p_age": diag.ad_p_age,
        "ad_stat_usage": diag.ad_stat_usage, "ad_p_usage": diag.ad_p_usage,
        "pearson_r": diag.pearson_r,
        "marginal_mles": {"age": list(diag.marginal_mles[0]),
                          "usage": list(diag.marginal_mles[1])},
        "n": dataset.n, "failures": dataset.d,
    }
    _write_json(out / "diagnostics.json", report)
    for name, qq in (("age", diag.qq_age), ("usage", diag.qq_usage)):
        with (out / f"qq_{name}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theoretical", "observed"])
            for a, b in qq:
                w.writerow([repr(float(a)), repr(float(b))])
    rows = [("quantity", "value"),
            ("AD statistic (age)", diag.ad_stat_age),
            ("AD p-value (age)", diag.ad_p_age),
            ("AD statistic (usage)", diag.ad_stat_usage),
            ("AD p-value (usage)", diag.ad_p_usage),
            ("Pearson r", diag.pearson_r)]
    _table(rows)
    return 0


_COMMANDS = {"fit": cmd_fit, "sample": cmd_sample, "optimize": cmd_optimize,
             "sensitivity": cmd_sensitivity, "diagnostics": cmd_diagnostics}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="YAML run configuration")
    common.add_argument("--seed", type=int, default=None,
                        help="override sampler and optimizer seeds")
    common.add_argument("--threads", type=int,
                        default=max(1, os.cpu_count() or 1),
                        help="worker cap for restart parallelism")
    common.add_argument("--out", default=None,
                        help="output directory (overrides config)")
    common.add_argument("--paper-literal-d", action="store_true",
                        help="use the published dissatisfaction-case "
                             "display verbatim instead of the "
                             "zone-consistent factors")
    common.add_argument("--rectangle-masses", action="store_true",
                        help="weight the cost cases by inclusion-exclusion "
                             "rectangle probabilities instead of the "
                             "printed survival-complement combinations "
                             "(reproduces the published tables)")
    common.add_argument("--dry-run", action="store_true",
                        help="echo the resolved configuration and exit")
    p = argparse.ArgumentParser(
        prog="warranty2d",
        description="Bayesian two-dimensional warranty-region design")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("fit", "maximum-likelihood fit"),
                        ("sample", "posterior MCMC sampling"),
                        ("optimize", "expected-utility maximization"),
                        ("sensitivity", "grid scans"),
                        ("diagnostics", "marginal goodness-of-fit")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name == "sensitivity":
            sp.add_argument("--grid", required=True,
                            help="YAML grid-spec file")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        if args.seed is not None:
            object.__setattr__(cfg, "mcmc", dataclasses.replace(
                cfg.mcmc, seed=args.seed))
            object.__setattr__(cfg, "optimizer", dataclasses.replace(
                cfg.optimizer, seed=args.seed))
        if args.out is not None:
            object.__setattr__(cfg, "out", args.out)
        if args.dry_run:
            print(yaml.safe_dump(_config_dict(cfg), sort_keys=False), end="")
            return 0
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, args)
    except (ConfigError, DataError, DomainError, InvalidParameterError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Warranty2dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _config_dict(cfg):
    def plain(obj):
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {k: plain(v) for k, v in dataclasses.asdict(obj).items()
                    if not k.startswith("_")}
        if isinstance(obj, tuple):
            return [plain(v) for v in obj]
        if isinstance(obj, float) and math.isinf(obj):
            return None
        return obj

    return plain(cfg)


if __name__ == "__main__":
    sys.exit(main())
