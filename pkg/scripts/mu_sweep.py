"""PINN on the ramp-and-leak scenario for a range of physics weights.

Prints IAE, MO, Ts and the weighted physics residual before, just after
and long after the leak onset.  Usage: python scripts/mu_sweep.py [mu ...]
"""
import argparse
from dataclasses import replace

import numpy as np

from hrsglab.config import LabConfig
from hrsglab.metrics import kpi_row
from hrsglab.pinn_tuner import PinnTuner
from hrsglab.scenario import build_paper_scenario, disturbance_time, run_scenario


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("mu", nargs="*", type=float, default=[0.0, 0.01, 0.1, 1.0, 10.0])
    args = p.parse_args()
    base = LabConfig()
    spec = build_paper_scenario()
    onset = spec.fault.onset_time
    print(f"{'mu':>8} {'IAE':>9} {'MO':>7} {'Ts':>7} {'muL before':>11} {'muL +60s':>11} "
          f"{'muL late':>11} {'L_data@2C':>10}")
    for mu in args.mu:
        cfg = replace(base, pinn=replace(base.pinn, mu=mu))
        tr = run_scenario(spec, PinnTuner(cfg), cfg)
        row = kpi_row(tr, "pinn", disturbance_time=disturbance_time(spec))
        w, t = mu * tr.l_phys, tr.t
        before = np.nanmax(w[t < onset])
        early = np.nanmax(w[(t >= onset) & (t < onset + 60)])
        late = np.nanmean(w[t >= t[-1] - 599])
        print(f"{mu:>8g} {row.iae:>9.2f} {row.mo:>7.3f} {row.ts:>7g} {before:>11.3e} "
              f"{early:>11.3e} {late:>11.3e} {0.5 * 2.0 ** 2:>10.3g}")


if __name__ == "__main__":
    main()
