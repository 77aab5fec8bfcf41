"""Experiment runner: every verification as a reproducible subcommand.

Each subcommand reads a strict JSON config (unknown keys are a hard
error), derives all randomness from a master seed via labeled Philox
streams, optionally spreads independent work units over a process pool,
and writes CSV results plus a manifest.json carrying the config hash,
the seed-stream labels, and wall time.  Work units own seeds derived from
(master_seed, command, stream, unit index) and results merge in unit
order, so data outputs are bit-identical for any worker count; only the
manifest's wall time varies between runs.

Exit codes: 0 success, 2 config error, 3 capacity error, 4 numeric error.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from multiprocessing import Pool

import numpy as np

from . import __version__, identities, observables, rpc
from .coalescent import merger_size_pmf, simulate_bs_coalescent
from .errors import CapacityError, ConfigError, NumericError
from .model import CovarianceFunction
from .observables import Monomial
from .oracles import GibbsOracle, oracle_from_config
from .seeding import MAX_SEED, derive_key, rng_from

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERIC = 4

_REQUIRED = object()

_COMMON_KEYS = {"master_seed": None, "output_path": None}


def _load_config(path, schema):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    cfg = {}
    for key, default in schema.items():
        if key in raw:
            cfg[key] = raw[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            cfg[key] = default
    return cfg


def _positive_int(cfg, key, minimum=1):
    value = cfg[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _fmt(x):
    """Round-trippable CSV float text (plain Python repr)."""
    return repr(float(x))


def _config_hash(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


class _Runner:
    """Shared per-command plumbing: config, seed, out dir, workers, manifest."""

    def __init__(self, args, command, schema):
        full_schema = dict(_COMMON_KEYS)
        full_schema.update(schema)
        self.command = command
        self.cfg = _load_config(args.config, full_schema)
        if args.seed is not None:
            self.cfg["master_seed"] = args.seed
        seed = self.cfg.get("master_seed")
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
            raise ConfigError(f"master_seed must be a u64 (config or --seed), got {seed!r}")
        self.seed = seed
        self.out_dir = args.out or self.cfg.get("output_path") or "."
        os.makedirs(self.out_dir, exist_ok=True)
        if args.workers is not None:
            self.workers = args.workers
        else:
            self.workers = int(os.environ.get("SPINGLASS_WORKERS", "1"))
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        self.cfg_hash = _config_hash(self.cfg)
        self.seed_streams = []
        self._t0 = time.monotonic()
        self._outputs = []

    def stream(self, *labels):
        """Seed-path tuple (master, command, *labels); recorded in the manifest."""
        self.seed_streams.append("/".join([self.command, *map(str, labels)]))
        return (self.seed, self.command) + labels

    def path(self, name):
        self._outputs.append(name)
        return os.path.join(self.out_dir, name)

    def csv_writer(self, fh):
        fh.write(f"# config={self.cfg_hash}\n")
        return csv.writer(fh)

    def pmap(self, fn, payloads):
        if self.workers <= 1 or len(payloads) <= 1:
            return [fn(p) for p in payloads]
        with Pool(processes=min(self.workers, len(payloads))) as pool:
            return pool.map(fn, payloads)

    def chunks(self, total):
        """Contiguous unit ranges with worker-independent geometry.

        The chunk boundaries depend only on `total`, so partial results
        (and any floating-point reductions inside chunks) merge to
        bit-identical outputs whatever the worker count.
        """
        bounds = np.linspace(0, total, min(total, 32) + 1).astype(int)
        return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if lo < hi]

    def finish(self):
        manifest = {
            "command": self.command,
            "config": self.cfg,
            "config_sha256": self.cfg_hash,
            "master_seed": self.seed,
            "seed_scheme": "philox key = sha256('spinglass' + seed_le64 + '/label'...)[0:16]",
            "seed_streams": sorted(set(self.seed_streams)),
            "outputs": self._outputs,
            "workers": self.workers,
            "wall_time_s": time.monotonic() - self._t0,
            "version": __version__,
        }
        with open(os.path.join(self.out_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        print(f"{self.command}: wrote {', '.join(self._outputs)} -> {self.out_dir}")


def _parse_monomial(data):
    if not isinstance(data, dict):
        raise ConfigError(f"monomial must map 'i,j' keys to exponents, got {data!r}")
    try:
        exponents = {}
        for key, k in data.items():
            i, j = (int(part) for part in key.split(","))
            exponents[(i, j)] = int(k)
        return Monomial(exponents)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad monomial {data!r}: {exc}") from exc


def _parse_x(data):
    if not isinstance(data, dict) or set(data) != {"breakpoints", "values"}:
        raise ConfigError(f"parameter function needs breakpoints and values, got {data!r}")
    try:
        return rpc.ParameterFunction(tuple(data["breakpoints"]), tuple(data["values"]))
    except ValueError as exc:
        raise ConfigError(f"bad parameter function: {exc}") from exc


# ---------------------------------------------------------------- sk-observables

SK_SCHEMA = {
    "n_list": _REQUIRED,
    "beta_list": _REQUIRED,
    "xi": {"2": 1.0},
    "monomials": _REQUIRED,
    "n_outer": _REQUIRED,
    "n_inner": _REQUIRED,
}


def _sk_task(payload):
    seed_path, n, beta, xi, monomial_data, n_outer, n_inner = payload
    cov = CovarianceFunction.from_manifest(xi)
    monomials = [_parse_monomial(m) for m in monomial_data]
    oracle = GibbsOracle(cov, n, beta)
    return observables.estimate_observables(
        oracle, monomials, n_outer, n_inner, seed=seed_path
    )


def cmd_sk_observables(args):
    runner = _Runner(args, "sk-observables", SK_SCHEMA)
    cfg = runner.cfg
    n_outer = _positive_int(cfg, "n_outer", minimum=2)
    n_inner = _positive_int(cfg, "n_inner")
    monomials = [_parse_monomial(m) for m in cfg["monomials"]]
    if not monomials:
        raise ConfigError("monomials must be a nonempty list")
    if not cfg["n_list"] or not cfg["beta_list"]:
        raise ConfigError("n_list and beta_list must be nonempty")
    payloads = []
    for n in cfg["n_list"]:
        for beta in cfg["beta_list"]:
            seed_path = runner.stream("task", int(n), repr(float(beta)))
            payloads.append(
                (seed_path, int(n), float(beta), cfg["xi"], cfg["monomials"], n_outer, n_inner)
            )
    results = runner.pmap(_sk_task, payloads)
    for payload, estimates in zip(payloads, results):
        seed_path, n, beta = payload[0], payload[1], payload[2]
        seed_hex = format(derive_key(*seed_path), "032x")
        name = f"estimates_n{n}_beta{beta:g}.csv"
        with open(runner.path(name), "w", newline="") as fh:
            writer = runner.csv_writer(fh)
            writer.writerow(observables.ESTIMATE_FIELDS)
            for m, est in zip(monomials, estimates):
                writer.writerow(
                    [m.label(), _fmt(est.mean), _fmt(est.std_error),
                     est.n_outer, est.n_inner, seed_hex]
                )
    runner.finish()


# ---------------------------------------------------------------- rpc-sample

RPC_SAMPLE_SCHEMA = {
    "x": _REQUIRED,
    "n_labels": _REQUIRED,
    "n_samples": _REQUIRED,
}


def _rpc_sample_chunk(payload):
    seed_path, x_data, n_labels, lo, hi = payload
    x = _parse_x(x_data)
    matrices = []
    violations = []
    for i in range(lo, hi):
        q = rpc.rpc_overlaps(x, n_labels, rng_from(*seed_path, i))
        matrices.append(q)
        violations.append(rpc.overlap_ultrametric_violations(q))
    return matrices, violations


def cmd_rpc_sample(args):
    runner = _Runner(args, "rpc-sample", RPC_SAMPLE_SCHEMA)
    cfg = runner.cfg
    n_labels = _positive_int(cfg, "n_labels")
    n_samples = _positive_int(cfg, "n_samples")
    x = _parse_x(cfg["x"])
    seed_path = runner.stream("sample")
    payloads = [
        (seed_path, cfg["x"], n_labels, lo, hi) for lo, hi in runner.chunks(n_samples)
    ]
    results = runner.pmap(_rpc_sample_chunk, payloads)
    matrices = [q for mats, _ in results for q in mats]
    violations = [v for _, viol in results for v in viol]

    observables.write_overlap_samples(
        runner.path("samples.jsonl"), matrices, extra={"cfg": runner.cfg_hash[:12]}
    )
    if x.is_identically_one:
        values = np.array([1.0])
    else:
        values = np.unique(np.concatenate(([0.0], x.breakpoints)))
    counts = np.zeros(values.size, dtype=np.int64)
    iu = np.triu_indices(n_labels, k=1)
    for q in matrices:
        entries = q[iu]
        for col, v in enumerate(values):
            counts[col] += int(np.sum(entries == v))
    with open(runner.path("histogram.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["value", "count", "probability"])
        total = counts.sum()
        for v, c in zip(values, counts):
            writer.writerow([_fmt(float(v)), int(c), _fmt(c / total if total else 0.0)])
    with open(runner.path("ultrametricity.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["sample", "violations"])
        for i, v in enumerate(violations):
            writer.writerow([i, v])
    runner.finish()


# ---------------------------------------------------------------- rpc-compare

RPC_COMPARE_SCHEMA = {
    "x": _REQUIRED,
    "n_outer": _REQUIRED,
    "n_inner": _REQUIRED,
    "truncation": 10_000,
}


def _compare_chunk(payload):
    seed_path, x_data, truncation, n_inner, lo, hi = payload
    x = _parse_x(x_data)
    values = np.unique(np.concatenate(([0.0], x.breakpoints)))
    tc_freq = np.zeros((hi - lo, values.size))
    ca_freq = np.zeros((hi - lo, values.size))
    for b in range(lo, hi):
        rng_tc = rng_from(*seed_path, "tc", b)
        q_tc = np.array([rpc.rpc_overlaps(x, 2, rng_tc)[0, 1] for _ in range(n_inner)])
        rng_ca = rng_from(*seed_path, "cascade", b)
        mu = rpc.pd_cascade(x, truncation, rng_ca)
        q_ca = rpc.sample_pair_overlaps(mu, n_inner, rng_ca)
        for col, v in enumerate(values):
            tc_freq[b - lo, col] = np.mean(q_tc == v)
            ca_freq[b - lo, col] = np.mean(q_ca == v)
    return tc_freq, ca_freq


def cmd_rpc_compare(args):
    runner = _Runner(args, "rpc-compare", RPC_COMPARE_SCHEMA)
    cfg = runner.cfg
    n_outer = _positive_int(cfg, "n_outer", minimum=2)
    n_inner = _positive_int(cfg, "n_inner")
    truncation = _positive_int(cfg, "truncation", minimum=100)
    x = _parse_x(cfg["x"])
    if x.r == 0:
        raise ConfigError("rpc-compare needs a non-degenerate parameter function")
    seed_path = runner.stream("compare")
    payloads = [
        (seed_path, cfg["x"], truncation, n_inner, lo, hi)
        for lo, hi in runner.chunks(n_outer)
    ]
    results = runner.pmap(_compare_chunk, payloads)
    tc = np.concatenate([r[0] for r in results])
    ca = np.concatenate([r[1] for r in results])
    values = np.unique(np.concatenate(([0.0], x.breakpoints)))
    p_tc, p_ca = tc.mean(axis=0), ca.mean(axis=0)
    se_tc = tc.std(axis=0, ddof=1) / np.sqrt(n_outer)
    se_ca = ca.std(axis=0, ddof=1) / np.sqrt(n_outer)
    tv = 0.5 * float(np.sum(np.abs(p_tc - p_ca)))
    q_star = float(x.breakpoints[-1])
    star = int(np.searchsorted(values, q_star))

    with open(runner.path("comparison.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["value", "p_timechange", "se_timechange", "p_cascade", "se_cascade"])
        for col, v in enumerate(values):
            writer.writerow(
                [_fmt(float(v)), _fmt(p_tc[col]), _fmt(float(se_tc[col])),
                 _fmt(p_ca[col]), _fmt(float(se_ca[col]))]
            )
    with open(runner.path("summary.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(
            ["q_star", "tv_distance", "p_qstar_timechange", "se_timechange",
             "p_qstar_cascade", "se_cascade", "n_samples"]
        )
        writer.writerow(
            [_fmt(q_star), _fmt(tv), _fmt(p_tc[star]), _fmt(float(se_tc[star])),
             _fmt(p_ca[star]), _fmt(float(se_ca[star])), n_outer * n_inner]
        )
    runner.finish()


# ---------------------------------------------------------------- gg-check

GG_SCHEMA = {
    "oracle": _REQUIRED,
    "s": _REQUIRED,
    "f": _REQUIRED,
    "n_outer": _REQUIRED,
    "n_inner": _REQUIRED,
}


def _gg_spec_from_config(cfg):
    f = cfg["f"]
    if not isinstance(f, dict):
        raise ConfigError(f"f must be a dict, got {f!r}")
    try:
        if "delta" in f:
            extra = sorted(set(f) - {"delta"})
            if extra:
                raise ConfigError(f"unknown keys in f: {extra}")
            return identities.GGTestSpec(
                s=cfg["s"], delta=float(f["delta"]),
                n_outer=cfg["n_outer"], n_inner=cfg["n_inner"],
            )
        extra = sorted(set(f) - {"k", "base"})
        if extra:
            raise ConfigError(f"unknown keys in f: {extra}")
        return identities.GGTestSpec(
            s=cfg["s"], k=int(f.get("k", 1)), base=_parse_monomial(f.get("base", {})),
            n_outer=cfg["n_outer"], n_inner=cfg["n_inner"],
        )
    except ValueError as exc:
        raise ConfigError(f"bad GG test spec: {exc}") from exc


def _gg_chunk(payload):
    seed_path, oracle_spec, cfg, lo, hi = payload
    oracle = oracle_from_config(oracle_spec)
    spec = _gg_spec_from_config(cfg)
    return [identities.gg_block_stats(oracle, spec, seed_path, b) for b in range(lo, hi)]


def cmd_gg_check(args):
    runner = _Runner(args, "gg-check", GG_SCHEMA)
    cfg = runner.cfg
    n_outer = _positive_int(cfg, "n_outer", minimum=2)
    _positive_int(cfg, "n_inner")
    _positive_int(cfg, "s", minimum=2)
    spec = _gg_spec_from_config(cfg)
    oracle_from_config(cfg["oracle"])  # validate before spawning workers
    seed_path = runner.stream("gg")
    payloads = [
        (seed_path, cfg["oracle"], cfg, lo, hi) for lo, hi in runner.chunks(n_outer)
    ]
    stats = [t for chunk in runner.pmap(_gg_chunk, payloads) for t in chunk]
    report = identities.gg_report_from_stats(stats, spec)
    identities.write_gg_report_csv(
        runner.path("gg_report.csv"), report, header_comment=f"config={runner.cfg_hash}"
    )
    runner.finish()


# ---------------------------------------------------------------- singularity

SINGULARITY_SCHEMA = {
    "oracle": _REQUIRED,
    "s_max": _REQUIRED,
    "mode": "exact",
    "delta": 1e-6,
    "n_outer": _REQUIRED,
    "n_inner": 1,
}


def _singularity_chunk(payload):
    seed_path, oracle_spec, s_max, mode, delta, n_inner, lo, hi = payload
    oracle = oracle_from_config(oracle_spec)
    return [
        identities.singularity_block_means(oracle, s_max, mode, seed_path, b, n_inner, delta)
        for b in range(lo, hi)
    ]


def cmd_singularity(args):
    runner = _Runner(args, "singularity", SINGULARITY_SCHEMA)
    cfg = runner.cfg
    n_outer = _positive_int(cfg, "n_outer", minimum=2)
    n_inner = _positive_int(cfg, "n_inner")
    s_max = _positive_int(cfg, "s_max", minimum=3)
    if cfg["mode"] not in ("exact", "smoothed"):
        raise ConfigError(f"mode must be 'exact' or 'smoothed', got {cfg['mode']!r}")
    oracle_from_config(cfg["oracle"])
    seed_path = runner.stream("curve")
    payloads = [
        (seed_path, cfg["oracle"], s_max, cfg["mode"], float(cfg["delta"]), n_inner, lo, hi)
        for lo, hi in runner.chunks(n_outer)
    ]
    rows = [r for chunk in runner.pmap(_singularity_chunk, payloads) for r in chunk]
    curve = identities.curve_from_block_means(
        np.stack(rows), s_max, cfg["mode"], n_inner, float(cfg["delta"])
    )
    identities.write_singularity_csv(
        runner.path("singularity.csv"), curve, header_comment=f"config={runner.cfg_hash}"
    )
    runner.finish()


# ---------------------------------------------------------------- stability

STABILITY_SCHEMA = {
    "x": _REQUIRED,
    "lambda": _REQUIRED,
    "truncation": 10_000,
    "n_outer": _REQUIRED,
    "n_inner": _REQUIRED,
}


def _stability_chunk(payload):
    seed_path, x_data, lam, truncation, n_inner, lo, hi = payload
    x = _parse_x(x_data)
    values = np.unique(np.concatenate(([0.0], x.breakpoints)))
    before = np.zeros((hi - lo, values.size))
    after = np.zeros((hi - lo, values.size))
    masses = np.zeros(hi - lo)
    for b in range(lo, hi):
        mu = rpc.pd_cascade(x, truncation, rng_from(*seed_path, "mu", b))
        if lam > 0:
            kappa = rpc.sample_tilt_field(mu, rng_from(*seed_path, "kappa", b))
            masses[b - lo] = float(np.sum(mu.weights * np.exp(lam * kappa)))
            tilted = rpc.phi_lambda(mu, lam, kappa=kappa)
        else:
            masses[b - lo] = 1.0
            tilted = mu
        # same derived key on both sides: common random numbers, and an
        # exactly-zero discrepancy when lam == 0
        key = derive_key(*seed_path, "draw", b)
        q_before = rpc.sample_pair_overlaps(
            mu, n_inner, np.random.Generator(np.random.Philox(key=key))
        )
        q_after = rpc.sample_pair_overlaps(
            tilted, n_inner, np.random.Generator(np.random.Philox(key=key))
        )
        for col, v in enumerate(values):
            before[b - lo, col] = np.mean(q_before == v)
            after[b - lo, col] = np.mean(q_after == v)
    return before, after, masses


def cmd_stability(args):
    runner = _Runner(args, "stability", STABILITY_SCHEMA)
    cfg = runner.cfg
    n_outer = _positive_int(cfg, "n_outer", minimum=2)
    n_inner = _positive_int(cfg, "n_inner")
    truncation = _positive_int(cfg, "truncation", minimum=100)
    lam = float(cfg["lambda"])
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    x = _parse_x(cfg["x"])
    if x.r == 0:
        raise ConfigError("stability needs a non-degenerate parameter function")
    seed_path = runner.stream("tilt")
    payloads = [
        (seed_path, cfg["x"], lam, truncation, n_inner, lo, hi)
        for lo, hi in runner.chunks(n_outer)
    ]
    results = runner.pmap(_stability_chunk, payloads)
    before = np.concatenate([r[0] for r in results])
    after = np.concatenate([r[1] for r in results])
    masses = np.concatenate([r[2] for r in results])
    values = np.unique(np.concatenate(([0.0], x.breakpoints)))
    p_before, p_after = before.mean(axis=0), after.mean(axis=0)
    tv = 0.5 * float(np.sum(np.abs(p_before - p_after)))
    q_top = float(x.breakpoints[-1])
    mass_mean = float(masses.mean())
    mass_se = float(masses.std(ddof=1) / np.sqrt(n_outer))
    # default tilt covariance f(q) = q^2 on atoms of norm^2 q_top
    mass_target = float(np.exp(lam**2 * q_top**2 / 2))
    mass_bound = float(np.exp(lam**2 / 2))
    mass_z = 0.0 if mass_se == 0 else (mass_mean - mass_target) / mass_se

    with open(runner.path("histogram.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["value", "p_before", "p_after"])
        for col, v in enumerate(values):
            writer.writerow([_fmt(float(v)), _fmt(p_before[col]), _fmt(p_after[col])])
    with open(runner.path("summary.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(
            ["lambda", "tv_distance", "mass_mean", "mass_se", "mass_target",
             "mass_bound", "mass_z", "n_samples"]
        )
        writer.writerow(
            [_fmt(lam), _fmt(tv), _fmt(mass_mean), _fmt(mass_se), _fmt(mass_target),
             _fmt(mass_bound), _fmt(float(mass_z)), n_outer * n_inner]
        )
    runner.finish()


# ---------------------------------------------------------------- coalescent-stats

COALESCENT_SCHEMA = {
    "n": _REQUIRED,
    "n_runs": _REQUIRED,
}


def _coalescent_chunk(payload):
    seed_path, n, lo, hi = payload
    waits = {}  # b -> [count, sum, sumsq]
    mergers = {}  # (b, k) -> count
    for i in range(lo, hi):
        run = simulate_bs_coalescent(n, rng_from(*seed_path, i))
        b = n
        prev_t = 0.0
        for t, reps in run.events:
            k = len(reps)
            wait = t - prev_t
            acc = waits.setdefault(b, [0, 0.0, 0.0])
            acc[0] += 1
            acc[1] += wait
            acc[2] += wait * wait
            mergers[(b, k)] = mergers.get((b, k), 0) + 1
            prev_t = t
            b -= k - 1
    return waits, mergers


def cmd_coalescent_stats(args):
    runner = _Runner(args, "coalescent-stats", COALESCENT_SCHEMA)
    cfg = runner.cfg
    n = _positive_int(cfg, "n", minimum=2)
    n_runs = _positive_int(cfg, "n_runs")
    seed_path = runner.stream("run")
    payloads = [(seed_path, n, lo, hi) for lo, hi in runner.chunks(n_runs)]
    results = runner.pmap(_coalescent_chunk, payloads)
    waits = {}
    mergers = {}
    for w, m in results:
        for b, (cnt, s1, s2) in w.items():
            acc = waits.setdefault(b, [0, 0.0, 0.0])
            acc[0] += cnt
            acc[1] += s1
            acc[2] += s2
        for key, cnt in m.items():
            mergers[key] = mergers.get(key, 0) + cnt

    with open(runner.path("waiting.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["b", "visits", "mean_wait", "std_error", "expected", "z"])
        for b in sorted(waits, reverse=True):
            cnt, s1, s2 = waits[b]
            mean = s1 / cnt
            var = max(s2 / cnt - mean**2, 0.0)
            se = float(np.sqrt(var / cnt)) if cnt > 1 else 0.0
            expected = 1.0 / (b - 1)
            z = (mean - expected) / se if se > 0 else 0.0
            writer.writerow([b, cnt, _fmt(mean), _fmt(se), _fmt(expected), _fmt(float(z))])
    with open(runner.path("mergers.csv"), "w", newline="") as fh:
        writer = runner.csv_writer(fh)
        writer.writerow(["b", "k", "count", "visits", "freq", "expected", "z"])
        for b, k in sorted(mergers, key=lambda bk: (-bk[0], bk[1])):
            visits = waits[b][0]
            count = mergers[(b, k)]
            freq = count / visits
            expected = float(merger_size_pmf(b)[k - 2])
            se = float(np.sqrt(expected * (1 - expected) / visits))
            z = (freq - expected) / se if se > 0 else 0.0
            writer.writerow([b, k, count, visits, _fmt(freq), _fmt(expected), _fmt(float(z))])
    runner.finish()


# ---------------------------------------------------------------- entry point

def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinglass",
        description="Reproducible spin-glass verification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "sk-observables": cmd_sk_observables,
        "rpc-sample": cmd_rpc_sample,
        "rpc-compare": cmd_rpc_compare,
        "gg-check": cmd_gg_check,
        "singularity": cmd_singularity,
        "stability": cmd_stability,
        "coalescent-stats": cmd_coalescent_stats,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="master seed override (u64)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $SPINGLASS_WORKERS or 1)")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
