"""Experiment configuration and the threshold-sweep and rehashing runs."""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .adversary import (TradeoffAdversaryParams, fixed_set_cycler, mixed_adversary,
                        tradeoff_adversary, zipf_trace)
from .cache import FULL_FLUSH, INCREMENTAL, NONE, RehashConfig, SetAssocCache, run_pair
from .policies import LRU, PolicyKind

THRESHOLD_SWEEP = "THRESHOLD-SWEEP"
REHASH_LONGRUN = "REHASH-LONGRUN"
CLASS_AUDIT = "CLASS-AUDIT"
BALLSBINS_AUDIT = "BALLSBINS-AUDIT"
PAIR_RUN = "PAIR-RUN"
EXPERIMENTS = (THRESHOLD_SWEEP, REHASH_LONGRUN, CLASS_AUDIT, BALLSBINS_AUDIT, PAIR_RUN)

AUTO = "AUTO"
DELTA_CAP = 0.5

GENERATORS = ("adversary", "mixed", "cycler", "zipf", "file")


def auto_delta(k: int, alpha: int, c: float = 1.0) -> float:
    """sqrt(24 c ln k / alpha), capped at 1/2 so the reference keeps half the cache."""
    return min(DELTA_CAP, math.sqrt(24 * c * math.log(k) / alpha))


def k_prime_of(k: int, delta: float) -> int:
    return math.ceil((1 - delta) * k)


@dataclass(frozen=True)
class TraceSource:
    """What to replay: a named generator with parameters, or a trace file.

    Text form is ``name:key=value,key=value``, e.g. ``mixed:s=32,t=4,exponent=1.0``
    or ``file:trace.bin,format=BINARY``.
    """

    generator: str
    params: tuple = ()

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown trace generator {self.generator!r}")

    @classmethod
    def parse(cls, text: str) -> "TraceSource":
        name, _, rest = text.strip().partition(":")
        name = name.strip().lower()
        params = []
        if name == "file":
            path, _, opts = rest.partition(",")
            params.append(("path", path.strip()))
            rest = opts
        for part in filter(None, (p.strip() for p in rest.split(","))):
            key, eq, val = part.partition("=")
            if not eq:
                raise ValueError(f"trace parameter {part!r} is not key=value")
            params.append((key.strip(), _number(val.strip())))
        return cls(name, tuple(params))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    def __str__(self):
        d = dict(self.params)
        if self.generator == "file":
            extra = ",".join(f"{k}={v}" for k, v in self.params if k != "path")
            return f"file:{d['path']}" + (f",{extra}" if extra else "")
        return self.generator + ":" + ",".join(f"{k}={v}" for k, v in self.params)


def _number(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = THRESHOLD_SWEEP
    k: int = 4096
    alpha_grid: tuple = (2, 512)
    delta: float | str = AUTO
    c: float = 1.0
    kind: PolicyKind = LRU
    rehash: RehashConfig = RehashConfig()
    trace_source: TraceSource = TraceSource("mixed", (("s", 32), ("t", 4), ("exponent", 1.0)))
    seeds: tuple = tuple(range(10))
    output: Optional[str] = None
    modes: tuple = ()

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.k < 1:
            raise ValueError("k must be positive")
        for a in self.alpha_grid:
            if a < 1 or self.k % a:
                raise ValueError(f"alpha={a} does not divide k={self.k}")
        if self.delta != AUTO and not 0 <= float(self.delta) < 1:
            raise ValueError("delta must be AUTO or lie in [0, 1)")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    def delta_for(self, alpha: int) -> float:
        return auto_delta(self.k, alpha, self.c) if self.delta == AUTO else float(self.delta)

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment, "k": self.k, "alpha_grid": list(self.alpha_grid),
            "delta": self.delta, "c": self.c, "kind": str(self.kind),
            "rehash": {"mode": self.rehash.mode, "threshold": self.rehash.threshold, "d": self.rehash.d},
            "trace_source": str(self.trace_source), "seeds": list(self.seeds),
            "output": self.output, "modes": list(self.modes),
        }


# -- config files ----------------------------------------------------------------

def _int_list(text: str) -> tuple:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def config_from_mapping(m: dict, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Build a config from string key/values (config file or CLI flags)."""
    kw: dict = {}
    if "experiment" in m:
        kw["experiment"] = m["experiment"].strip().upper()
    if "k" in m:
        kw["k"] = int(m["k"])
    if "alpha_grid" in m:
        kw["alpha_grid"] = _int_list(m["alpha_grid"])
    if "delta" in m:
        d = m["delta"].strip()
        kw["delta"] = AUTO if d.upper() == AUTO else float(d)
    if "c" in m:
        kw["c"] = float(m["c"])
    if "kind" in m:
        kw["kind"] = PolicyKind.parse(m["kind"])
    if any(key in m for key in ("rehash_mode", "rehash_threshold", "rehash_d")):
        r = base.rehash
        th = m.get("rehash_threshold")
        kw["rehash"] = RehashConfig(
            m.get("rehash_mode", r.mode).strip().upper(),
            (None if th.strip().lower() in ("", "none", "auto") else int(th)) if th is not None else r.threshold,
            float(m.get("rehash_d", r.d)),
        )
    if "trace" in m:
        kw["trace_source"] = TraceSource.parse(m["trace"])
    if "seeds" in m:
        kw["seeds"] = _int_list(m["seeds"])
    if "output" in m:
        kw["output"] = m["output"].strip() or None
    if "modes" in m:
        kw["modes"] = tuple(x.strip().upper() for x in m["modes"].split(",") if x.strip())
    unknown = set(m) - {"experiment", "k", "alpha_grid", "delta", "c", "kind", "rehash_mode",
                        "rehash_threshold", "rehash_d", "trace", "seeds", "output", "modes"}
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return dataclasses.replace(base, **kw)


def load_config(path: str, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Read the ``[experiment]`` section of an INI-style file."""
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    if not cp.has_section("experiment"):
        raise ValueError(f"{path}: missing [experiment] section")
    return config_from_mapping(dict(cp.items("experiment")), base)


# -- rows ------------------------------------------------------------------------

@dataclass
class SweepRow:
    CSV_FIELDS = ("alpha", "delta", "k_prime", "misses_sa", "misses_fa",
                  "bad_evictions", "flush_evictions", "ratio", "seed")

    alpha: int
    delta: float
    k_prime: int
    misses_sa: int
    misses_fa: int
    bad_evictions: int
    flush_evictions: int
    ratio: float
    seed: int

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_FIELDS}

    @property
    def ledger_holds(self) -> bool:
        return self.misses_sa <= self.misses_fa + self.bad_evictions + self.flush_evictions


@dataclass
class LongRunRow(SweepRow):
    """A sweep row sampled at a checkpoint of a long rehashing run."""

    CSV_FIELDS = SweepRow.CSV_FIELDS + ("mode", "repetitions")

    mode: str = NONE
    repetitions: int = 0


def _ratio(a: int, b: int) -> float:
    return a / b if b else (0.0 if a == 0 else math.inf)


# -- trace construction ---------------------------------------------------------------

def build_trace(src: TraceSource, k: int, alpha: int, delta: float, c: float, seed: int) -> np.ndarray:
    g = src.generator
    kp = k_prime_of(k, delta)
    if g in ("adversary", "mixed"):
        params = TradeoffAdversaryParams(k, alpha, delta, c,
                                         s_override=src.get("s"), t_override=src.get("t"))
        if g == "adversary":
            return tradeoff_adversary(params, int(src.get("start", 0)))
        return mixed_adversary(params, float(src.get("exponent", 1.0)), seed, int(src.get("start", 0)))
    if g == "cycler":
        return fixed_set_cycler(kp, int(src.get("repetitions", 1)), int(src.get("start", 0)))
    if g == "zipf":
        return zipf_trace(int(src.get("universe", 4 * k)), float(src.get("exponent", 1.0)),
                          int(src.get("length", 16 * k)), seed, int(src.get("start", 0)))
    from .io import TEXT, load_trace
    return load_trace(src.get("path"), str(src.get("format", TEXT)))


def pair_report(trace, k, alpha, kind, seed, rehash, ref_capacity, checkpoints=()):
    """One lockstep run, on the compiled path when the policy is LRU."""
    if kind == LRU:
        from ._fastlru import fast_lru_pair
        rep, _ = fast_lru_pair(trace, k, alpha, seed, rehash, ref_capacity, checkpoints)
        return rep
    cache = SetAssocCache(k, alpha, kind, seed, rehash, allow_fully_associative=True)
    return run_pair((int(x) for x in np.asarray(trace)), cache, kind, ref_capacity,
                    checkpoints=checkpoints)


# -- experiments ---------------------------------------------------------------------

def run_threshold_sweep(config: ExperimentConfig, reports: Optional[list] = None) -> list:
    """One row per (alpha, seed), sorted by (alpha, seed).

    Pass a list as ``reports`` to also collect ``(alpha, seed, PairRunReport)``
    for every run, e.g. to inspect prefix-level ledger violations.
    """
    rows = []
    for alpha in sorted(config.alpha_grid):
        delta = config.delta_for(alpha)
        kp = k_prime_of(config.k, delta)
        for seed in sorted(config.seeds):
            trace = build_trace(config.trace_source, config.k, alpha, delta, config.c, seed)
            rep = pair_report(trace, config.k, alpha, config.kind, seed, config.rehash, kp)
            if reports is not None:
                reports.append((alpha, seed, rep))
            rows.append(SweepRow(alpha, delta, kp, rep.misses_test, rep.misses_ref,
                                 rep.bad_evictions, rep.flush_evictions,
                                 _ratio(rep.misses_test, rep.misses_ref), seed))
    return rows


def geometric_checkpoints(k_prime: int, repetitions: int) -> list:
    """Prefix lengths after 1, 2, 4, ... full cycles, always ending at the last one."""
    reps = []
    r = 1
    while r < repetitions:
        reps.append(r)
        r *= 2
    reps.append(repetitions)
    return reps


def run_rehash_longrun(config: ExperimentConfig, reports: Optional[list] = None) -> list:
    """Replay the fixed-set cycler under each mode, sampling geometric checkpoints.

    The modes default to the NONE control plus the configured rehash mode;
    ``config.modes`` may list more.  Rows are ordered by (alpha, mode, seed,
    repetitions).  ``reports`` collects ``(alpha, mode, seed, PairRunReport)``.
    """
    modes = tuple(config.modes) or (NONE, config.rehash.mode)
    if not any(m != NONE for m in modes):
        raise ValueError("a rehash long run needs at least one rehashing mode besides the control")
    src = config.trace_source
    if src.generator != "cycler":
        src = TraceSource("cycler", (("repetitions", int(src.get("repetitions", 1024))),))
    reps = int(src.get("repetitions", 1))
    rows = []
    for alpha in sorted(config.alpha_grid):
        delta = config.delta_for(alpha)
        kp = k_prime_of(config.k, delta)
        trace = build_trace(src, config.k, alpha, delta, config.c, 0)
        cp_reps = geometric_checkpoints(kp, reps)
        cps = [r * kp for r in cp_reps]
        for mode in modes:
            rehash = dataclasses.replace(config.rehash, mode=mode)
            for seed in sorted(config.seeds):
                rep = pair_report(trace, config.k, alpha, config.kind, seed, rehash, kp, cps)
                if reports is not None:
                    reports.append((alpha, mode, seed, rep))
                for r, (mt, mr, b, f) in zip(cp_reps, rep.snapshots):
                    rows.append(LongRunRow(alpha, delta, kp, mt, mr, b, f, _ratio(mt, mr), seed,
                                           mode, r))
    return rows


def final_rows(rows: Sequence[LongRunRow]) -> dict:
    """The last checkpoint per (mode, seed)."""
    out: dict = {}
    for r in rows:
        key = (r.mode, r.seed)
        if key not in out or r.repetitions > out[key].repetitions:
            out[key] = r
    return out


def first_rows(rows: Sequence[LongRunRow]) -> dict:
    out: dict = {}
    for r in rows:
        key = (r.mode, r.seed)
        if key not in out or r.repetitions < out[key].repetitions:
            out[key] = r
    return out
