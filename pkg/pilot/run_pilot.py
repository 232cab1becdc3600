"""Pilot runs behind the statistical acceptance thresholds.

Seeds 100-102 are disjoint from the acceptance seeds 0-9.  Writes CSV files
next to this script; rerunning reproduces them byte for byte.
"""
import dataclasses
from pathlib import Path

from setassoc import (FULL_FLUSH, INCREMENTAL, NONE, ExperimentConfig, RehashConfig, TraceSource,
                      emit_report, run_rehash_longrun, run_threshold_sweep)
from setassoc.io import make_meta

HERE = Path(__file__).parent
SEEDS = (100, 101, 102)


def threshold_pilot():
    cfg = ExperimentConfig(k=4096, alpha_grid=(2, 512), seeds=SEEDS,
                           trace_source=TraceSource.parse("mixed:s=32,t=4,exponent=1.0"))
    emit_report(run_threshold_sweep(cfg), HERE / "threshold_t4.csv", "CSV")
    rows = []
    for t in (2, 4, 5, 6, 8):
        c = dataclasses.replace(cfg, alpha_grid=(2,),
                                trace_source=TraceSource.parse(f"mixed:s=32,t={t},exponent=1.0"))
        rows += [dict(t=t, **r.as_dict()) for r in run_threshold_sweep(c)]
    emit_report(rows, HERE / "threshold_alpha2_by_t.csv", "CSV")


def rehash_pilot():
    cfg = ExperimentConfig(experiment="REHASH-LONGRUN", k=1024, alpha_grid=(16,), delta=0.125,
                           rehash=RehashConfig(FULL_FLUSH), seeds=SEEDS,
                           trace_source=TraceSource("cycler", (("repetitions", 2**14),)),
                           modes=(NONE, FULL_FLUSH, INCREMENTAL))
    emit_report(run_rehash_longrun(cfg), HERE / "rehash_longrun.csv", "CSV")


if __name__ == "__main__":
    threshold_pilot()
    rehash_pilot()
