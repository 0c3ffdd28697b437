"""``hrsglab`` command line: calibrate, gradcheck, dataset, train, run, compare, rerun.

Every command writes ``manifest.json`` into its output directory.  The
manifest embeds the fully resolved configuration (and a custom scenario, if
one was used), so ``hrsglab rerun <manifest>`` repeats the command without
reading the original files again.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import sys
from pathlib import Path

import yaml

from . import __version__
from .calibration import CalibrationInfeasible
from .config import ConfigError, LabConfig, config_digest, config_from_dict, config_to_dict, \
    dump_config, load_config, rng_for

log = logging.getLogger("hrsglab")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_NUMERICAL = 4

CONTROLLERS = ("pi", "lstm", "pinn")


class MissingPrerequisite(RuntimeError):
    pass


class NumericalFailure(RuntimeError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------- manifest

def write_manifest(out: Path, command: str, opts: dict, cfg: LabConfig, started: str,
                   extra: dict | None = None) -> Path:
    manifest = {
        "tool": "hrsglab",
        "version": __version__,
        "command": command,
        "options": opts,
        "seed": cfg.seed,
        "config_path": opts.get("config"),
        "config_digest": config_digest(cfg),
        "config": config_to_dict(cfg),
        "output_dir": str(out),
        "started": started,
        "finished": _now(),
    }
    manifest.update(extra or {})
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _resolve_config(args) -> LabConfig:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        overrides[key.strip()] = yaml.safe_load(raw)
    cfg = load_config(args.config, overrides)
    if args.seed is not None:
        cfg = config_from_dict({**config_to_dict(cfg), "seed": args.seed})
    return cfg


def _scenario(name: str, cfg: LabConfig, embedded: dict | None = None):
    from .scenario import build_null_scenario, build_paper_scenario, scenario_from_dict

    if embedded is not None:
        return scenario_from_dict(embedded), embedded
    if name == "paper":
        return build_paper_scenario(), None
    if name == "null":
        return build_null_scenario(), None
    path = Path(name)
    if not path.exists():
        raise MissingPrerequisite(f"scenario file {path} not found (use paper, null or a YAML path)")
    try:
        data = yaml.safe_load(path.read_text())
        return scenario_from_dict(data), data
    except (TypeError, ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"bad scenario file {path}: {exc}") from exc


# ---------------------------------------------------------------- commands

def cmd_calibrate(cfg: LabConfig, out: Path) -> dict:
    from .calibration import calibrate

    rep = calibrate(cfg.plant, cfg.control)
    calibrated = config_from_dict({**config_to_dict(cfg),
                                   "plant": config_to_dict(cfg)["plant"] | {
                                       "k1": rep.plant.k1, "k2": rep.plant.k2,
                                       "k3": rep.plant.k3}})
    dump_config(calibrated, out / "calibrated.yaml")
    lines = [
        f"k1*d1 = {rep.heat_input!r}",
        f"k1 = {rep.plant.k1!r}  k2 = {rep.plant.k2!r}  k3 = {rep.plant.k3!r}",
        f"steady state at u={cfg.plant.u_target}: x2 = {rep.x2_eq!r}  y = {rep.y_eq!r}",
        f"target y = {cfg.plant.y_target}  residual = {rep.residual:.3e}  "
        f"{'PASS' if rep.ok else 'FAIL'}",
    ]
    (out / "calibration.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if not rep.ok:
        raise NumericalFailure("steady-state check exceeds 1e-6 degC")
    return {}


def cmd_gradcheck(cfg: LabConfig, out: Path) -> dict:
    from .gradcheck import run_all

    results = run_all(cfg.seed)
    text = "".join(r.line() + "\n" for r in results)
    bad = [r for r in results if not r.ok]
    text += f"{'PASS' if not bad else 'FAIL'}: {len(results) - len(bad)}/{len(results)} parameter blocks\n"
    (out / "gradcheck.txt").write_text(text)
    print(text, end="")
    return {"gradcheck_failed": [f"{r.suite}:{r.param}" for r in bad]}


def cmd_dataset(cfg: LabConfig, out: Path) -> dict:
    from .lstm_tuner import generate_dataset, operating_scenarios, write_dataset

    rng = rng_for(cfg.seed, "dataset")
    lc = cfg.lstm
    ds = generate_dataset(operating_scenarios(lc.dataset_hours, rng), cfg)
    write_dataset(ds, out / "dataset.csv")
    ft = generate_dataset(operating_scenarios(lc.finetune_hours, rng,
                                              noise_sigma=lc.finetune_noise, tag="ft"), cfg)
    write_dataset(ft, out / "finetune.csv")
    counts = {s: len(ds.split(s)) for s in ("train", "val", "test")}
    print(f"dataset: {len(ds.segments)} segments {counts}, skipped {ds.skipped}; "
          f"fine-tune: {len(ft.segments)} segments")
    return {"segments": counts, "skipped": ds.skipped, "finetune_segments": len(ft.segments)}


def cmd_train(cfg: LabConfig, out: Path, dataset_dir: Path) -> dict:
    from .lstm_tuner import TrainingDiverged, fit_lstm, read_dataset

    main = dataset_dir / "dataset.csv"
    if not main.exists():
        raise MissingPrerequisite(f"{main} not found; run `hrsglab dataset --out {dataset_dir}` first")
    ds = read_dataset(main)
    ft_path = dataset_dir / "finetune.csv"
    ft = read_dataset(ft_path) if ft_path.exists() else None
    try:
        model, report = fit_lstm(ds, cfg, ft)
    except TrainingDiverged as exc:
        raise NumericalFailure(str(exc)) from exc
    model.save(out / "lstm_params.txt")
    with open(out / "loss_curves.csv", "w") as fh:
        fh.write("stage,epoch,train_loss,val_loss\n")
        for stage, tr, va in (("main", report["train_loss"], report["val_loss"]),
                              ("finetune", report.get("finetune_train_loss", []),
                               report.get("finetune_val_loss", []))):
            for k, (a, b) in enumerate(zip(tr, va), 1):
                fh.write(f"{stage},{k},{a!r},{b!r}\n")
    (out / "train_report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"trained: best epoch {report['best_epoch']}, val {min(report['val_loss']):.4g}, "
          f"test {report['test_loss']:.4g}")
    return {"dataset_sha256": _sha256(main),
            "lstm_params_sha256": _sha256(out / "lstm_params.txt")}


def build_schedulers(names, cfg: LabConfig, lstm_model: Path | None) -> dict:
    from .control import fixed_pi_controller
    from .lstm_tuner import LstmModel, LstmScheduler
    from .pinn_tuner import PinnTuner
    from .scenario import FixedGainScheduler

    out = {}
    for name in names:
        if name == "pi":
            out[name] = FixedGainScheduler(fixed_pi_controller(cfg.control))
        elif name == "pinn":
            out[name] = PinnTuner(cfg)
        elif name == "lstm":
            if lstm_model is None or not Path(lstm_model).exists():
                raise MissingPrerequisite(
                    f"LSTM parameters {lstm_model} not found; run `hrsglab train` first "
                    "or pass --lstm-model PATH")
            out[name] = LstmScheduler(LstmModel.load(lstm_model), cfg)
        else:
            raise ConfigError(f"unknown controller {name!r}; choose from {CONTROLLERS}")
    return out


def cmd_compare(cfg: LabConfig, out: Path, controllers, scenario: str,
                lstm_model: Path | None, embedded_scenario: dict | None = None) -> dict:
    from .report import kpi_table
    from .scenario import run_comparison

    spec, scen_data = _scenario(scenario, cfg, embedded_scenario)
    scheds = build_schedulers(controllers, cfg, lstm_model)
    bundle = run_comparison(spec, scheds, cfg)
    bundle.write(out)
    if "pinn" in scheds:
        scheds["pinn"].save(out / "pinn_params_final.txt")
    print(kpi_table(bundle.rows), end="")
    extra = {"scenario_data": scen_data}
    if lstm_model is not None and "lstm" in scheds:
        extra["lstm_params_sha256"] = _sha256(lstm_model)
    if bundle.partial:
        extra["failed"] = bundle.failed
        raise NumericalFailure(f"partial comparison: {sorted(bundle.failed)} aborted", extra)
    return extra


# ---------------------------------------------------------------- entry point

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrsglab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_out):
        sp.add_argument("--config", type=Path, help="YAML config file")
        sp.add_argument("--seed", type=int, help="root seed (overrides the config)")
        sp.add_argument("--out", type=Path, default=Path(default_out), help="output directory")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, e.g. pinn.mu=0.5")

    common(sub.add_parser("calibrate", help="fit plant constants to the target point"),
           "runs/calibrate")
    common(sub.add_parser("gradcheck", help="finite-difference gradient suites"),
           "runs/gradcheck")
    common(sub.add_parser("dataset", help="simulate operating data and target gains"),
           "runs/dataset")
    sp = sub.add_parser("train", help="fit the LSTM gain scheduler")
    common(sp, "runs/train")
    sp.add_argument("--dataset", type=Path, default=Path("runs/dataset"),
                    help="directory holding dataset.csv (and finetune.csv)")
    for name in ("run", "compare"):
        sp = sub.add_parser(name, help="closed-loop scenario run(s) with KPIs and plots")
        common(sp, f"runs/{name}")
        sp.add_argument("--controllers", default="pi" if name == "run" else "pi,lstm,pinn")
        sp.add_argument("--scenario", default="paper", help="paper, null or a YAML file")
        sp.add_argument("--lstm-model", type=Path, default=Path("runs/train/lstm_params.txt"))
    sp = sub.add_parser("rerun", help="repeat a command from its manifest")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out", type=Path, help="output directory (default: next to the manifest)")
    return p


def _execute(command: str, cfg: LabConfig, out: Path, opts: dict,
             embedded_scenario: dict | None = None) -> dict:
    if command == "calibrate":
        return cmd_calibrate(cfg, out)
    if command == "gradcheck":
        return cmd_gradcheck(cfg, out)
    if command == "dataset":
        return cmd_dataset(cfg, out)
    if command == "train":
        return cmd_train(cfg, out, Path(opts["dataset"]))
    controllers = [c.strip() for c in opts["controllers"].split(",") if c.strip()]
    lstm = Path(opts["lstm_model"]) if opts.get("lstm_model") else None
    return cmd_compare(cfg, out, controllers, opts["scenario"], lstm, embedded_scenario)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    started = _now()
    try:
        if args.command == "rerun":
            man = json.loads(args.manifest.read_text())
            command, opts = man["command"], man["options"]
            cfg = config_from_dict(man["config"])
            out = args.out or args.manifest.parent / "rerun"
            embedded = man.get("scenario_data")
            recorded = man.get("lstm_params_sha256")
            model = opts.get("lstm_model")
            if command in ("run", "compare") and recorded and model:
                if not Path(model).exists() or _sha256(Path(model)) != recorded:
                    raise MissingPrerequisite(
                        f"LSTM parameters {model} are missing or differ from the ones the "
                        "manifest recorded; restore them to rerun")
        else:
            command = args.command
            cfg = _resolve_config(args)
            opts = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
                    if k not in ("command",)}
            out = args.out
            embedded = None
        out.mkdir(parents=True, exist_ok=True)
        extra = {}
        code = EXIT_OK
        try:
            extra = _execute(command, cfg, out, opts, embedded)
            if extra.get("gradcheck_failed"):
                code = EXIT_CHECK_FAILED
        except NumericalFailure as exc:
            if len(exc.args) > 1 and isinstance(exc.args[1], dict):
                extra = exc.args[1]
            write_manifest(out, command, opts, cfg, started, extra)
            raise
        write_manifest(out, command, opts, cfg, started, extra)
        return code
    except (ConfigError, CalibrationInfeasible) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingPrerequisite as exc:
        print(f"missing prerequisite: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except NumericalFailure as exc:
        print(f"numerical failure: {exc.args[0]}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        if args.command == "rerun":
            print(f"cannot rerun from {args.manifest}: {exc}", file=sys.stderr)
            return EXIT_MISSING
        raise


if __name__ == "__main__":
    sys.exit(main())
