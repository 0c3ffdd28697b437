"""Regenerate the LSTM targets for several center_pull weights and compare.

Each value rebuilds the operating dataset (several minutes per value on one
core), trains the LSTM and runs the ramp-and-leak comparison.  Usage:
python scripts/center_pull_sweep.py OUT_DIR [pull ...]
"""
import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from hrsglab.cli import build_schedulers
from hrsglab.config import LabConfig, rng_for
from hrsglab.lstm_tuner import fit_lstm, generate_dataset, operating_scenarios
from hrsglab.report import kpi_table
from hrsglab.scenario import build_paper_scenario, run_comparison


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", type=Path)
    p.add_argument("pulls", nargs="*", type=float, default=[0.0, 1e-3, 1e-2])
    args = p.parse_args()
    base = LabConfig()
    for pull in args.pulls:
        cfg = replace(base, lstm=replace(base.lstm, center_pull=pull))
        rng = rng_for(cfg.seed, "dataset")
        lc = cfg.lstm
        ds = generate_dataset(operating_scenarios(lc.dataset_hours, rng), cfg)
        ft = generate_dataset(operating_scenarios(lc.finetune_hours, rng,
                                                  noise_sigma=lc.finetune_noise, tag="ft"), cfg)
        model, _ = fit_lstm(ds, cfg, ft)
        out = args.out / f"pull_{pull:g}"
        out.mkdir(parents=True, exist_ok=True)
        model.save(out / "lstm_params.txt")
        bundle = run_comparison(build_paper_scenario(),
                                build_schedulers(["pi", "lstm", "pinn"], cfg,
                                                 out / "lstm_params.txt"), cfg)
        bundle.write(out)
        late = {n: float(np.mean(np.abs(tr.e[-600:]))) for n, tr in bundle.traces.items()}
        print(f"center_pull = {pull:g}")
        print(kpi_table(bundle.rows), end="")
        print("late |e|: " + ", ".join(f"{n} {v:.3e}" for n, v in late.items()) + "\n")


if __name__ == "__main__":
    main()
