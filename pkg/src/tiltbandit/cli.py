"""Command-line driver for the offline tilt-policy experiments.

Every command is a deterministic function of its inputs, the run
configuration and the master ``--seed``. Outputs are CSV files; failures print
one ``tiltbandit: error: <kind>: <message>`` line on stderr and exit nonzero.

Configuration files hold ``key = value`` lines with dotted keys, e.g.::

    env.noise_std = 0.1
    train.epochs = 50
    eval.splits = 5

Command-line flags override file values.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import sys
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Dataset, DatasetError, downsample_balanced, load_dataset, save_dataset, split_dataset
from .estimators import DM, IPS, LOGGED, NoMatchError, estimator_diagnostics, logged_action_propensities, test_loss
from .learning import ESTIMATED, TrainConfig, greedy_from_loss, greedy_from_policy, train_dm, train_ips
from .models import LossNet, PolicyNet, load_checkpoint, save_checkpoint
from .policies import ArgmaxPolicy, UniformPolicy
from .propensity import DEFAULT_EPOCHS, DEFAULT_FLOOR, DEFAULT_LR, MultinomialLogitModel, fit_propensity, mean_tv_distance
from .synthenv import EnvConfig, EnvOracle, LoggingPolicy, generate_dataset, sample_contexts

PROG = "tiltbandit"
LR_GRID = (0.0001, 0.0005, 0.001, 0.005, 0.01)
BATCH_FRACTION_GRID = (0.1, 0.01, 0.001)
LAMBDA_GREEDY = "greedy"


class CliError(Exception):
    """Invalid invocation or configuration."""


@dataclass(frozen=True)
class PropensitySettings:
    floor: float = DEFAULT_FLOOR
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR


@dataclass(frozen=True)
class EvalSettings:
    splits: int = 5
    downsample: bool = False
    lambda_eval: str = LAMBDA_GREEDY
    train_fraction: float = 0.7
    workers: int = 1


@dataclass(frozen=True)
class OracleSettings:
    n_mc: int = 200_000


@dataclass(frozen=True)
class RunSettings:
    seed: int = 0
    out_dir: str = "."


@dataclass(frozen=True)
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    propensity: PropensitySettings = field(default_factory=PropensitySettings)
    eval: EvalSettings = field(default_factory=EvalSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    run: RunSettings = field(default_factory=RunSettings)

    @property
    def seed(self) -> int:
        return self.run.seed

    def out_path(self, value: Optional[str], default: str) -> Path:
        return Path(value) if value else Path(self.run.out_dir) / default

    def to_lines(self) -> list[str]:
        lines = []
        for section in SECTIONS:
            obj = getattr(self, section)
            for f in dataclasses.fields(obj):
                if (section, f.name) in _HIDDEN_KEYS:
                    continue
                lines.append(f"{section}.{f.name} = {_format_value(getattr(obj, f.name))}")
        return lines


SECTIONS = ("env", "train", "propensity", "eval", "oracle", "run")
# the network seed is derived from run.seed, never configured directly
_HIDDEN_KEYS = {("train", "seed")}


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    return repr(v) if isinstance(v, float) else str(v)


def _parse_value(text: str, default, annotation):
    text = text.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
            raise ValueError(f"expected a boolean, got {text!r}")
        return low in ("true", "1", "yes", "on")
    if isinstance(default, tuple):
        elem = float if default and isinstance(default[0], float) else int
        return tuple(elem(x) for x in text.split(",") if x.strip())
    if default is None or "Optional" in str(annotation):
        return None if text.lower() == "none" else int(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def _schema() -> dict:
    base = RunConfig()
    keys = {}
    for section in SECTIONS:
        obj = getattr(base, section)
        hints = typing.get_type_hints(type(obj))
        for f in dataclasses.fields(obj):
            if (section, f.name) not in _HIDDEN_KEYS:
                keys[f"{section}.{f.name}"] = (section, f.name, getattr(obj, f.name), hints.get(f.name))
    return keys


def build_config(settings: dict[str, str]) -> RunConfig:
    """Assemble a :class:`RunConfig` from string key/value pairs, rejecting unknown keys."""
    schema = _schema()
    updates: dict[str, dict] = {s: {} for s in SECTIONS}
    for key, raw in settings.items():
        if key not in schema:
            raise CliError(f"unknown config key {key!r}")
        section, name, default, hint = schema[key]
        try:
            updates[section][name] = _parse_value(raw, default, hint)
        except ValueError as exc:
            raise CliError(f"bad value for {key}: {exc}") from None
    base = RunConfig()
    try:
        parts = {s: dataclasses.replace(getattr(base, s), **updates[s]) for s in SECTIONS}
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}") from None
    cfg = RunConfig(**parts)
    if cfg.eval.splits < 1:
        raise CliError("eval.splits must be >= 1")
    if cfg.eval.lambda_eval not in (LAMBDA_GREEDY, LOGGED):
        raise CliError(f"eval.lambda_eval must be {LAMBDA_GREEDY!r} or {LOGGED!r}")
    if not 0 < cfg.eval.train_fraction < 1:
        raise CliError("eval.train_fraction must lie in (0, 1)")
    if cfg.eval.workers < 1 or cfg.oracle.n_mc < 1:
        raise CliError("eval.workers and oracle.n_mc must be positive")
    return cfg


def read_config_file(path) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment line."""
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[config]\n" + text, source=str(path))
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise CliError(f"{path}: {' '.join(str(exc).split())}") from None
    return dict(parser["config"])


def derive_seed(master: int, *tags: int) -> int:
    return int(np.random.SeedSequence([master, *tags]).generate_state(1)[0])


# stream tags for derive_seed
_SPLIT, _NET, _DOWNSAMPLE, _DIAG = 1, 2, 3, 4


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return "" if x is None or (isinstance(x, float) and np.isnan(x)) else repr(float(x))


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}.csv")


def _fit_lambda(d: Dataset, cfg: RunConfig) -> MultinomialLogitModel:
    p = cfg.propensity
    return fit_propensity(d, epochs=p.epochs, lr=p.lr, floor=p.floor)


def _resolve_propensity(choice: str, d_train: Dataset, cfg: RunConfig):
    """Return (source used for weights, fitted model or None)."""
    if choice == LOGGED:
        if not d_train.has_propensity:
            raise DatasetError("dataset has no propensity column; use --propensity estimated")
        return LOGGED, None
    if choice == ESTIMATED:
        m = _fit_lambda(d_train, cfg)
        return m, m
    m = MultinomialLogitModel.load(choice)
    return m, m


def _train(kind: str, d_train: Dataset, source, tc: TrainConfig, d_test=None):
    if kind == IPS:
        return train_ips(d_train, source, tc, d_test=d_test, lambda_test=source)
    return train_dm(d_train, tc, d_test=d_test, lambda_test=source)


def _greedy(net):
    return greedy_from_policy(net) if isinstance(net, PolicyNet) else greedy_from_loss(net)


# ---------------------------------------------------------------- commands


def cmd_generate(args, cfg: RunConfig) -> None:
    if args.n < 1:
        raise CliError("n must be ≥ 1")
    out = cfg.out_path(args.out, "dataset.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    d = generate_dataset(cfg.env, args.n, cfg.seed)
    save_dataset(d, out)
    sidecar = out.with_name(out.name + ".provenance")
    lines = [
        "# dataset provenance; loadable as a config file",
        f"# file = {out.name}",
        f"# n = {args.n}",
        f"# config_digest = {cfg.env.digest()}",
        f"run.seed = {cfg.seed}",
    ]
    lines += [ln for ln in cfg.to_lines() if ln.startswith("env.")]
    sidecar.write_text("\n".join(lines) + "\n", encoding="utf-8")
    counts = d.action_counts()
    print(f"wrote {out} n={args.n} down={counts[0]} nochange={counts[1]} up={counts[2]}")


def cmd_fit_propensity(args, cfg: RunConfig) -> None:
    d = load_dataset(args.dataset)
    if len(d) < 2:
        raise DatasetError("propensity model is not identifiable from fewer than 2 samples")
    m = _fit_lambda(d, cfg)
    out = cfg.out_path(args.out, "propensity.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    m.save(out)
    print(f"cross_entropy={m.cross_entropy(d)!r}")
    if d.has_propensity:
        fitted = m.action_probs(d.contexts)[np.arange(len(d)), d.action_index]
        print(f"logged_propensity_mae={float(np.mean(np.abs(fitted - d.propensity)))!r}")
    if args.reference_env:
        x = sample_contexts(cfg.env, 1000, np.random.default_rng(derive_seed(cfg.seed, _DIAG)))
        print(f"mean_tv_to_logging_policy={mean_tv_distance(m.action_probs(x), LoggingPolicy(cfg.env).action_probs(x))!r}")


def _grid_search(kind, d_train, d_test, source, tc: TrainConfig) -> tuple[TrainConfig, list]:
    rows, best, best_tc = [], np.inf, tc
    lr_field = "lr_policy" if kind == IPS else "lr_loss"
    for lr in LR_GRID:
        for frac in BATCH_FRACTION_GRID:
            cand = tc.replace(**{lr_field: lr}, batch_fraction=frac, batch_size=None)
            net, hist = _train(kind, d_train, source, cand)
            try:
                tl = test_loss(d_test, _greedy(net), source)
            except NoMatchError:
                tl = np.nan
            rows.append([lr, frac, cand.batch_for(len(d_train)), _fmt(hist.objective[-1]), _fmt(tl)])
            if tl < best:
                best, best_tc = tl, cand
    return best_tc, rows


def cmd_train(args, cfg: RunConfig) -> None:
    d = load_dataset(args.dataset)
    if args.test:
        d_train, d_test = d, load_dataset(args.test)
    else:
        d_train, d_test = split_dataset(d, cfg.eval.train_fraction, derive_seed(cfg.seed, _SPLIT))
    prop = args.propensity or cfg.train.propensity_source
    source, model = _resolve_propensity(prop, d_train, cfg)
    lambda_test = source
    if source == LOGGED and not d_test.has_propensity:
        raise DatasetError("test data has no propensity column")
    tc = cfg.train.replace(seed=derive_seed(cfg.seed, _NET))
    out = cfg.out_path(args.out, f"{args.estimator}_model.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.grid_search:
        tc, rows = _grid_search(args.estimator, d_train, d_test, lambda_test, tc)
        _write_csv(_sibling(out, "grid"), ["lr", "batch_fraction", "batch_size", "final_objective", "test_loss"], rows)
    net, hist = _train(args.estimator, d_train, source, tc, d_test=d_test)
    save_checkpoint(net, out)
    hist.to_csv(_sibling(out, "history"))
    if model is not None:
        model.save(_sibling(out, "propensity"))
    print(f"wrote {out} epochs={len(hist)} objective={hist.objective[-1]!r} test_loss={_fmt(hist.test_loss[-1])}")


def _evaluate_split(k: int, d: Dataset, cfg: RunConfig, extra: list, downsample: bool, curves: bool,
                    save_dir: Optional[Path] = None):
    """Test losses of every policy on one seeded split: {(policy, variant): value}."""
    d_train, d_test = split_dataset(d, cfg.eval.train_fraction, derive_seed(cfg.seed, _SPLIT, k))
    lam = _fit_lambda(d_train, cfg)
    source = LOGGED if cfg.train.propensity_source == LOGGED else lam
    tc = cfg.train.replace(seed=derive_seed(cfg.seed, _NET, k))
    ips_net, ips_hist = train_ips(d_train, source, tc, d_test=d_test if curves else None, lambda_test=source)
    dm_net, dm_hist = train_dm(d_train, tc, d_test=d_test if curves else None, lambda_test=source)
    if save_dir is not None:
        save_checkpoint(ips_net, save_dir / f"split{k}_ips.csv")
        save_checkpoint(dm_net, save_dir / f"split{k}_dm.csv")
        lam.save(save_dir / f"split{k}_propensity.csv")
    policies = [("ips", greedy_from_policy(ips_net)), ("dm", greedy_from_loss(dm_net))]
    if cfg.eval.lambda_eval == LAMBDA_GREEDY:
        policies.insert(0, ("lambda", ArgmaxPolicy(lam.action_probs)))
    policies += extra
    variants = [("complete", d_test)]
    if downsample:
        variants.append(("downsampled", downsample_balanced(d_test, derive_seed(cfg.seed, _DOWNSAMPLE, k))))
    results, warnings = {}, []
    for vname, test in variants:
        if cfg.eval.lambda_eval == LOGGED:
            # lambda evaluated on its own logged actions: every sample matches
            results[("lambda", vname)] = float(np.mean(test.losses / logged_action_propensities(test, source)))
        for pname, pol in policies:
            try:
                results[(pname, vname)] = test_loss(test, pol, source)
            except NoMatchError:
                results[(pname, vname)] = np.nan
                warnings.append(f"split={k} policy={pname} variant={vname}: no test sample matches")
    curve_rows = []
    if curves:
        for pname, hist in (("ips", ips_hist), ("dm", dm_hist)):
            curve_rows += [[k, pname, e + 1, _fmt(v)] for e, v in enumerate(hist.test_loss)]
    return results, warnings, curve_rows


def cmd_evaluate(args, cfg: RunConfig) -> None:
    d = load_dataset(args.dataset)
    extra = []
    for p in args.policy or []:
        extra.append((f"ckpt:{Path(p).stem}", _greedy(load_checkpoint(p))))
    k_splits = cfg.eval.splits
    downsample = cfg.eval.downsample
    save_dir = Path(args.save_models) if args.save_models else None
    if save_dir is not None:
        save_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=cfg.eval.workers) as pool:
        per_split = list(pool.map(lambda k: _evaluate_split(k, d, cfg, extra, downsample, args.curves, save_dir),
                                  range(k_splits)))
    order = []
    for res, _, _ in per_split:
        order += [key for key in res if key not in order]
    for _, warns, _ in per_split:
        for w in warns:
            print(f"warning: {w}", file=sys.stderr)
    rows, split_rows = [], []
    variants = ["complete"] + (["downsampled"] if downsample else [])
    for vname in variants:
        for key in [o for o in order if o[1] == vname]:
            vals = np.array([res[key] for res, _, _ in per_split])
            ok = vals[~np.isnan(vals)]
            mean = float(ok.mean()) if len(ok) else np.nan
            std = float(ok.std(ddof=1)) if len(ok) > 1 else np.nan
            rows.append([key[0], vname, _fmt(mean), _fmt(std)])
            split_rows += [[key[0], vname, k, _fmt(v)] for k, v in enumerate(vals)]
    out = cfg.out_path(args.out, "results.csv")
    _write_csv(out, ["policy", "dataset_variant", "mean_test_loss", "std_test_loss"], rows)
    _write_csv(_sibling(out, "splits"), ["policy", "dataset_variant", "split", "test_loss"], split_rows)
    if args.curves:
        curves = [r for _, _, c in per_split for r in c]
        _write_csv(_sibling(out, "curves"), ["split", "policy", "epoch", "test_loss"], curves)
    for r in rows:
        print(",".join(str(v) for v in r))


def heatmap_rows(policy, grid: int) -> list:
    if grid < 2:
        raise CliError("grid must be >= 2")
    ticks = np.linspace(0.0, 1.0, grid)
    x = np.array([[q, c] for q in ticks for c in ticks])
    probs = policy.action_probs(x)
    return [[repr(float(q)), repr(float(c))] + [repr(float(p)) for p in row] for (q, c), row in zip(x, probs)]


def cmd_heatmap(args, cfg: RunConfig) -> None:
    if args.grid < 2:
        raise CliError("grid must be >= 2")
    net = load_checkpoint(args.checkpoint)
    policy = net if isinstance(net, PolicyNet) else greedy_from_loss(net)
    out = cfg.out_path(args.out, "heatmap.csv")
    _write_csv(out, ["q", "c", "p_down", "p_nochange", "p_up"], heatmap_rows(policy, args.grid))
    print(f"wrote {out} rows={args.grid ** 2}")


def _target_policy(name: str, cfg: RunConfig, oracle: EnvOracle):
    if name == "uniform":
        return UniformPolicy()
    if name == "logging":
        return LoggingPolicy(cfg.env)
    if name == "oracle-greedy":
        return oracle.greedy_policy()
    net = load_checkpoint(name)
    return net if isinstance(net, PolicyNet) else greedy_from_loss(net)


def parse_n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"invalid --n-list {text!r}: expected comma-separated integers") from None
    if not values or any(v < 2 for v in values):
        raise CliError(f"invalid --n-list {text!r}: need at least one integer >= 2")
    return values


def cmd_diagnose(args, cfg: RunConfig) -> None:
    n_values = parse_n_list(args.n_list)
    if args.replicates < 30:
        raise CliError("replicates must be >= 30")
    oracle = EnvOracle(cfg.env, n_mc=cfg.oracle.n_mc, seed=derive_seed(cfg.seed, _DIAG, 0))
    pi = _target_policy(args.target, cfg, oracle)
    lambda_hat = LOGGED
    if args.propensity_model:
        lambda_hat = MultinomialLogitModel.load(args.propensity_model)
    fixed = None
    if args.loss_model:
        fixed = load_checkpoint(args.loss_model)
        if not isinstance(fixed, LossNet):
            raise CliError(f"{args.loss_model} is not a loss-model checkpoint")
    kinds = [IPS, DM] if args.estimator == "both" else [args.estimator]
    rows = []
    for kind in kinds:
        rep = estimator_diagnostics(cfg.env, pi, kind, n_values, args.replicates, derive_seed(cfg.seed, _DIAG, 1),
                                    oracle=oracle, fixed_loss_model=fixed, lambda_hat=lambda_hat,
                                    workers=cfg.eval.workers)
        rows += rep.rows
        if len(n_values) > 1:
            print(f"{kind} variance_slope={rep.variance_slope(kind)!r}")
    out = cfg.out_path(args.out, "diagnostics.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    type(rep)(rows).to_csv(out)
    for r in rows:
        print(f"{r.estimator} N={r.n} bias={r.bias!r} bias_se={r.bias_se!r} variance={r.variance!r}")


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    common.add_argument("--out", help="output file (defaults under run.out_dir)")

    parser = _Parser(prog=PROG, description="Offline learning of antenna-tilt policies from logged bandit feedback.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="simulate a logged dataset")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("fit-propensity", parents=[common], help="fit the logging-policy model")
    p.add_argument("dataset")
    p.add_argument("--reference-env", action="store_true",
                   help="also report mean TV distance to the configured environment's logging policy")

    p = sub.add_parser("train", parents=[common], help="learn an IPS policy or a DM loss model")
    p.add_argument("dataset")
    p.add_argument("--estimator", choices=[IPS, DM], required=True)
    p.add_argument("--propensity", help="logged, estimated or a propensity-model file")
    p.add_argument("--test", help="held-out dataset; disables the internal split")
    p.add_argument("--grid-search", action="store_true", help="search the learning-rate and batch grids first")

    p = sub.add_parser("evaluate", parents=[common], help="K-split test-loss table")
    p.add_argument("dataset")
    p.add_argument("--policy", action="append", help="extra checkpoint to evaluate greedily (repeatable)")
    p.add_argument("--splits", type=int)
    p.add_argument("--downsample", action="store_true", default=None)
    p.add_argument("--lambda-eval", choices=[LAMBDA_GREEDY, LOGGED])
    p.add_argument("--workers", type=int)
    p.add_argument("--curves", action="store_true", help="also write per-epoch test-loss curves")
    p.add_argument("--save-models", metavar="DIR", help="write each split's IPS/DM checkpoints and propensity model")

    p = sub.add_parser("heatmap", parents=[common], help="action probabilities on a grid")
    p.add_argument("checkpoint")
    p.add_argument("--grid", type=int, default=21)

    p = sub.add_parser("diagnose", parents=[common], help="replicate bias/variance of an estimator")
    p.add_argument("--estimator", choices=[IPS, DM, "both"], required=True)
    p.add_argument("--n-list", default="500,1000,2000,4000,8000")
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--target", default="uniform", help="uniform, logging, oracle-greedy or a checkpoint file")
    p.add_argument("--propensity-model", help="weight IPS by this model instead of the logged propensities")
    p.add_argument("--loss-model", help="fixed loss-model checkpoint for DM instead of per-replicate refits")
    p.add_argument("--workers", type=int)
    return parser


def _flag_overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = val.strip()
    if args.seed is not None:
        out["run.seed"] = str(args.seed)
    for flag, key in (("splits", "eval.splits"), ("lambda_eval", "eval.lambda_eval"), ("workers", "eval.workers")):
        if getattr(args, flag, None) is not None:
            out[key] = str(getattr(args, flag))
    if getattr(args, "downsample", None):
        out["eval.downsample"] = "true"
    return out


COMMANDS = {
    "generate": cmd_generate,
    "fit-propensity": cmd_fit_propensity,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "heatmap": cmd_heatmap,
    "diagnose": cmd_diagnose,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        settings = read_config_file(args.config) if args.config else {}
        settings.update(_flag_overrides(args))
        cfg = build_config(settings)
        COMMANDS[args.command](args, cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except CliError as exc:
        _fail("usage", exc)
        return 2
    except (DatasetError, ValueError, OSError, FloatingPointError, KeyError) as exc:
        _fail(type(exc).__name__, exc)
        return 1
    return 0


def _fail(kind: str, exc: Exception) -> None:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"{PROG}: error: {kind}: {msg}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
