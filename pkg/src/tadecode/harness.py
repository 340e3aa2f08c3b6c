"""Monte-Carlo logical-error-rate experiments and their CLI-facing config.

A trial is fully determined by (seed, trial_index): the per-trial generator
is Philox keyed with seed XOR trial_index, so workers can compute disjoint
trial ranges and the aggregate is byte-identical to a serial run. The
stopping rule is applied by scanning outcomes in trial order: stop at the
first trial where the failure target is met, honoring the trial cap.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from . import gf2
from .baselines import CircuitLevelDecoder, osd0, reconstruct_data_error
from .circuit import (MeasurementCircuit, NoiseParams, build_circuit, propagate,
                      sample_faults, syndrome, trial_rng)
from .codes import BBSpec, CssCode, build_bb_code, get_code
from .decoder import DecoderConfig, TaDecoder, diversity_decode, diversity_members
from .jointgraph import build_circuit_level_graph, compile_joint_graph

DECODER_NAMES = ("TA", "NMS", "BPOSD0")


class ConfigError(ValueError):
    """The experiment configuration is invalid."""


@dataclass
class ExperimentConfig:
    code_name: str = ""
    code_spec: BBSpec | None = None       # inline alternative to code_name
    p_values: tuple[float, ...] = (0.002,)
    decoders: tuple[str, ...] = ("TA", "NMS", "BPOSD0")
    min_failures: int = 10
    max_trials: int = 10**6
    seed: int = 0
    worker_count: int = 1
    csv_path: str = "results.csv"
    plot_path: str = "results.svg"
    record_timing: bool = True
    ta_max_iters: int = 300
    nms_max_iters: int = 900
    bposd_max_iters: int = 300

    def __post_init__(self):
        if not self.code_name and self.code_spec is None:
            raise ConfigError("config needs a code name or an inline code spec")
        for p in self.p_values:
            if not 0.0 <= p < 0.5:
                raise ConfigError(f"p={p} out of range")
        for d in self.decoders:
            if d not in DECODER_NAMES:
                raise ConfigError(f"unknown decoder {d!r}; choose from {DECODER_NAMES}")
        if self.min_failures < 1:
            raise ConfigError("min_failures must be >= 1")
        if self.max_trials < 1:
            raise ConfigError("max_trials must be >= 1")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")

    def build_code(self) -> CssCode:
        if self.code_spec is not None:
            return build_bb_code(self.code_spec)
        return get_code(self.code_name)

    @property
    def label(self) -> str:
        if self.code_name:
            return self.code_name
        assert self.code_spec is not None
        return self.code_spec.name or "inline"


@dataclass
class LerRecord:
    code: str
    decoder: str
    p: float
    trials: int
    failures: int
    ler: float
    ci_low: float
    ci_high: float
    mean_iters: float
    seconds: float


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def is_logical_error(code: CssCode, e: np.ndarray, e_hat: np.ndarray,
                     basis: gf2.RowBasis | None = None) -> bool:
    """Conservative failure test on the residual r = e XOR e_hat.

    A residual with nonzero Z syndrome (unconverged or wrong estimate) is a
    failure; otherwise it fails exactly when it is not a stabilizer, i.e.
    not in the row space of h_x.
    """
    r = (np.asarray(e, dtype=np.uint8) ^ np.asarray(e_hat, dtype=np.uint8)) & 1
    if gf2.mul_vec(code.h_z, r).any():
        return True
    if basis is None:
        basis = gf2.RowBasis(code.h_x)
    return not basis.contains(r)


# ---------------------------------------------------------------------------
# Trial execution (shared by the serial path and the worker processes)

class _TrialContext:
    """Everything needed to run trials for one (code, p, decoder) cell."""

    def __init__(self, circ: MeasurementCircuit, decoder_name: str, p: float,
                 seed: int, cfg_fields: dict):
        self.circ = circ
        self.code = circ.code
        self.decoder_name = decoder_name
        self.noise = NoiseParams(p)
        self.seed = seed
        self.basis = gf2.RowBasis(self.code.h_x)
        if decoder_name == "TA":
            graph = compile_joint_graph(circ, self.noise)
            base = DecoderConfig(max_iters=cfg_fields["ta_max_iters"])
            self.graph = graph
            self.ta_decoders = [TaDecoder(graph, c) for c in diversity_members(base)]
        else:
            self.clg = build_circuit_level_graph(circ, self.noise)
            self.cl_decoder = CircuitLevelDecoder(self.clg)
            self.nms_iters = cfg_fields["nms_max_iters"]
            self.bposd_iters = cfg_fields["bposd_max_iters"]

    def _decode(self, s: np.ndarray) -> tuple[np.ndarray | None, int]:
        if self.decoder_name == "TA":
            res = diversity_decode(self.graph, s, decoders=self.ta_decoders)
            return res.estimate, res.total_iters
        if self.decoder_name == "NMS":
            soft = self.cl_decoder.nms(s, self.nms_iters)
            return reconstruct_data_error(self.clg, soft.hard), soft.iters_used
        soft = self.cl_decoder.nms(s, self.bposd_iters)
        fault_vec = osd0(self.clg, soft, s)
        if fault_vec is None:
            return None, soft.iters_used
        return reconstruct_data_error(self.clg, fault_vec), soft.iters_used

    def run(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        failed = np.zeros(stop - start, dtype=np.uint8)
        iters = np.zeros(stop - start, dtype=np.int64)
        for i, trial in enumerate(range(start, stop)):
            rng = trial_rng(self.seed, trial)
            faults = sample_faults(self.circ, self.noise, rng)
            e = propagate(self.circ, faults)
            s = syndrome(self.code, e)
            e_hat, used = self._decode(s)
            iters[i] = used
            if e_hat is None:
                failed[i] = 1
            else:
                failed[i] = is_logical_error(self.code, e, e_hat, self.basis)
        return failed, iters


_WORKER_CTX: _TrialContext | None = None


def _init_worker(circ, decoder_name, p, seed, cfg_fields):
    global _WORKER_CTX
    _WORKER_CTX = _TrialContext(circ, decoder_name, p, seed, cfg_fields)


def _run_range(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    assert _WORKER_CTX is not None
    return _WORKER_CTX.run(*bounds)


def _run_cell(circ: MeasurementCircuit, decoder_name: str, p: float,
              cfg: ExperimentConfig, chunk: int = 4096) -> tuple[int, int, int, float]:
    """Run one (decoder, p) cell; returns (trials, failures, iters_sum, secs)."""
    cfg_fields = {
        "ta_max_iters": cfg.ta_max_iters,
        "nms_max_iters": cfg.nms_max_iters,
        "bposd_max_iters": cfg.bposd_max_iters,
    }
    t0 = time.perf_counter()
    trials = failures = 0
    iters_sum = 0
    pool = None
    try:
        if cfg.worker_count > 1:
            import multiprocessing as mp

            ctx = mp.get_context("fork")
            pool = ctx.Pool(
                cfg.worker_count,
                initializer=_init_worker,
                initargs=(circ, decoder_name, p, cfg.seed, cfg_fields),
            )
        else:
            _init_worker(circ, decoder_name, p, cfg.seed, cfg_fields)

        start = 0
        while trials < cfg.max_trials and failures < cfg.min_failures:
            take = min(chunk, cfg.max_trials - trials)
            stop = start + take
            if pool is not None:
                step = max(64, take // (4 * cfg.worker_count))
                bounds = [(a, min(a + step, stop)) for a in range(start, stop, step)]
                parts = pool.map(_run_range, bounds)
                failed = np.concatenate([f for f, _ in parts])
                iters = np.concatenate([i for _, i in parts])
            else:
                assert _WORKER_CTX is not None
                failed, iters = _WORKER_CTX.run(start, stop)
            # Sequential stopping scan over outcomes in trial order.
            cum = failures + np.cumsum(failed, dtype=np.int64)
            hits = np.flatnonzero(cum >= cfg.min_failures)
            if hits.size:
                cut = int(hits[0]) + 1
                failures = int(cum[hits[0]])
                trials += cut
                iters_sum += int(iters[:cut].sum())
                break
            failures = int(cum[-1]) if take else failures
            trials += take
            iters_sum += int(iters.sum())
            start = stop
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    secs = time.perf_counter() - t0 if cfg.record_timing else 0.0
    return trials, failures, iters_sum, secs


def run_experiment(cfg: ExperimentConfig) -> list[LerRecord]:
    """The full sweep: every configured decoder at every fault probability."""
    code = cfg.build_code()
    circ = build_circuit(code)
    records: list[LerRecord] = []
    for decoder_name in cfg.decoders:
        for p in cfg.p_values:
            trials, failures, iters_sum, secs = _run_cell(circ, decoder_name, p, cfg)
            low, high = wilson_interval(failures, trials)
            records.append(LerRecord(
                code=cfg.label, decoder=decoder_name, p=p, trials=trials,
                failures=failures, ler=failures / trials, ci_low=low, ci_high=high,
                mean_iters=iters_sum / trials, seconds=secs,
            ))
    return records


# ---------------------------------------------------------------------------
# Config file parsing and result emission

def _parse_terms(text: str) -> tuple[tuple[int, int], ...]:
    terms = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        px, _, py = part.partition(":")
        terms.append((int(px), int(py or "0")))
    return tuple(terms)


def parse_config(path: str, seed: int | None = None, workers: int | None = None,
                 out_dir: str | None = None) -> ExperimentConfig:
    """Read the sectioned experiment config (see README for the key list)."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    ini = configparser.ConfigParser()
    try:
        ini.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    try:
        code_sec = ini["code"]
        code_name = code_sec.get("name", "").strip()
        code_spec = None
        if not code_name:
            code_spec = BBSpec(
                ell=code_sec.getint("ell"),
                em=code_sec.getint("em", 1),
                a_terms=_parse_terms(code_sec.get("a_terms")),
                b_terms=_parse_terms(code_sec.get("b_terms")),
                name=code_sec.get("label", "inline"),
            )
        p_values = tuple(
            float(x) for x in ini.get("noise", "p_values").split(",") if x.strip()
        )
        for p in p_values:
            if not 0.0 < p < 0.5:
                raise ConfigError(f"p_values entries must lie in (0, 0.5), got {p}")
        decoders = tuple(
            d.strip().upper()
            for d in ini.get("decoders", "run", fallback="TA, NMS, BPOSD0").split(",")
            if d.strip()
        )
        cfg = ExperimentConfig(
            code_name=code_name,
            code_spec=code_spec,
            p_values=p_values,
            decoders=decoders,
            min_failures=ini.getint("stopping", "min_failures", fallback=10),
            max_trials=ini.getint("stopping", "max_trials", fallback=10**6),
            csv_path=ini.get("output", "csv", fallback="results.csv"),
            plot_path=ini.get("output", "plot", fallback="results.svg"),
            record_timing=ini.getboolean("output", "timing", fallback=True),
            ta_max_iters=ini.getint("decoders", "ta_max_iters", fallback=300),
            nms_max_iters=ini.getint("decoders", "nms_max_iters", fallback=900),
            bposd_max_iters=ini.getint("decoders", "bposd_max_iters", fallback=300),
        )
    except (configparser.Error, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config {path}: {exc}") from exc
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if workers is not None:
        cfg = replace(cfg, worker_count=workers)
    if out_dir is not None:
        cfg = replace(
            cfg,
            csv_path=os.path.join(out_dir, os.path.basename(cfg.csv_path)),
            plot_path=os.path.join(out_dir, os.path.basename(cfg.plot_path)),
        )
    return cfg


CSV_HEADER = "code,decoder,p,trials,failures,ler,ci_low,ci_high,mean_iters,seconds"


def emit_csv(records: list[LerRecord], path: str) -> None:
    if not records:
        raise ValueError("no records to write")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.code},{r.decoder},{r.p:g},{r.trials},{r.failures},"
                f"{r.ler:.6e},{r.ci_low:.6e},{r.ci_high:.6e},"
                f"{r.mean_iters:.6f},{r.seconds:.3f}\n"
            )


def read_csv(path: str) -> list[LerRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(LerRecord(
                code=row["code"], decoder=row["decoder"], p=float(row["p"]),
                trials=int(row["trials"]), failures=int(row["failures"]),
                ler=float(row["ler"]), ci_low=float(row["ci_low"]),
                ci_high=float(row["ci_high"]), mean_iters=float(row["mean_iters"]),
                seconds=float(row["seconds"]),
            ))
    return records


def emit_plot(records: list[LerRecord], path: str) -> None:
    """Log-log LER vs fault probability, one series per (code, decoder)."""
    if not records:
        raise ValueError("no records to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict[tuple[str, str], list[LerRecord]] = {}
    for r in records:
        series.setdefault((r.code, r.decoder), []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (code_name, dec), recs in sorted(series.items()):
        recs = sorted(recs, key=lambda r: r.p)
        xs = [r.p for r in recs if r.failures > 0]
        ys = [r.ler for r in recs if r.failures > 0]
        lo = [max(r.ler - r.ci_low, 0.0) for r in recs if r.failures > 0]
        hi = [max(r.ci_high - r.ler, 0.0) for r in recs if r.failures > 0]
        if not xs:
            continue
        ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", capsize=3,
                    label=f"{code_name} / {dec}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("fault probability p")
    ax.set_ylabel("logical error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
