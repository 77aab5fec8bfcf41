"""Ghirlanda-Guerra identity checks and the singularity diagnostic.

The identity under test relates (s+1)-replica observables to s-replica
ones: for a test function F of the overlap q_new = q_{1,s+1} and of the
overlaps among the first s replicas,

    E^(s+1)[F(q_{1,s+1}; Q_s)] = (1/s) E'[F(q~; Q_s)]
                                 + (1/s) sum_{j=2..s} E^(s)[F(q_{1j}; Q_s)]

where q~ in the first right-hand term is drawn from an independent fresh
instance of the measure (independent disorder and replicas).  The checker
reports z-scores from paired per-block differences; finite-N hypercube
measures satisfy the identity only in the limit, so for them the z-score
is a trend diagnostic, while cascade oracles must pass outright.

The singularity diagnostic estimates E mu^(s)(A_s) where A_s is the event
that the s-th replica's overlap with the first differs from all earlier
ones; discrete directing measures drive it to zero in s, continuous ones
keep it near one.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .observables import Estimate, Monomial, estimate_from_block_means, evaluate_monomial
from .seeding import as_path, rng_from


def _fmt(x):
    """Round-trippable CSV float text (plain Python repr)."""
    return repr(float(x))


def f_delta(q_new, q_prev, delta):
    """Smoothed coincidence indicator
    1 - min(1, (1/delta) min_i |q_new - q_prev_i|).

    Continuous in all arguments, 1 when q_new hits some q_prev_i exactly,
    0 when it is at least delta away from all of them; converges to the
    indicator of coincidence as delta -> 0.  Accepts batched q_new with
    q_prev of shape (..., k); an empty q_prev gives 0.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    q_new = np.asarray(q_new, dtype=float)
    q_prev = np.asarray(q_prev, dtype=float)
    if q_prev.size == 0:
        out = np.zeros_like(q_new)
        return float(out) if out.ndim == 0 else out
    gap = np.min(np.abs(q_new[..., None] - q_prev), axis=-1)
    out = 1.0 - np.minimum(1.0, gap / delta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GGTestSpec:
    """What to test: s replicas plus one, and the test function F.

    Monomial mode (delta is None): F = q_new^k * base(Q_s) with base a
    Monomial on the first s replicas.  Smoothed mode (delta set): F is
    f_delta(q_new; {q_{1i}}_{i=2..s}).
    """

    s: int
    k: int = 1
    base: Monomial = Monomial()
    delta: float = None
    n_outer: int = 200
    n_inner: int = 1

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"s must be >= 2, got {self.s}")
        if self.delta is None:
            if self.k < 1:
                raise ValueError(f"exponent k must be >= 1, got {self.k}")
            if self.base.s > self.s:
                raise ValueError(f"base monomial uses replica {self.base.s} > s = {self.s}")
        elif self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")

    def evaluate(self, q_new, block):
        """F(q_new; first-s overlaps), vectorized over the block."""
        if self.delta is None:
            return q_new**self.k * evaluate_monomial(self.base, block[:, : self.s, : self.s])
        return f_delta(q_new, block[:, 0, 1 : self.s], self.delta)


@dataclass(frozen=True)
class GGReport:
    lhs: Estimate
    rhs_independent_term: Estimate
    rhs_sum_terms: tuple
    z_score: float

    @property
    def rhs_mean(self):
        s = len(self.rhs_sum_terms) + 1
        return (self.rhs_independent_term.mean + sum(t.mean for t in self.rhs_sum_terms)) / s


def gg_block_stats(oracle, spec, seed, block_index):
    """Per-block term means: (lhs, independent term, q_1j terms for j=2..s).

    One block draws (s+1)-replica matrices plus a matching independent
    two-replica block (fresh measure instance) for the first right-hand
    term.  Deterministic given (oracle, spec, seed, block_index), so
    blocks can be computed in any order or in parallel.
    """
    s = spec.s
    block = oracle.sample_block(rng_from(*as_path(seed), "gg-main", block_index), s + 1, spec.n_inner)
    indep = oracle.sample_block(rng_from(*as_path(seed), "gg-indep", block_index), 2, spec.n_inner)
    lhs = float(np.mean(spec.evaluate(block[:, 0, s], block)))
    indep_term = float(np.mean(spec.evaluate(indep[:, 0, 1], block)))
    sum_terms = tuple(
        float(np.mean(spec.evaluate(block[:, 0, j - 1], block))) for j in range(2, s + 1)
    )
    return lhs, indep_term, sum_terms


def gg_report_from_stats(stats, spec) -> GGReport:
    """Aggregate per-block stats; z is the paired blockwise z-score of
    LHS - RHS, so correlations between the terms are accounted for."""
    lhs_means = np.array([t[0] for t in stats])
    indep_means = np.array([t[1] for t in stats])
    sum_means = np.array([t[2] for t in stats])
    diffs = lhs_means - (indep_means + sum_means.sum(axis=1)) / spec.s
    mean_d = float(np.mean(diffs))
    se_d = float(np.std(diffs, ddof=1) / np.sqrt(len(stats)))
    if se_d == 0.0:
        z = 0.0 if mean_d == 0.0 else float("inf")
    else:
        z = mean_d / se_d
    return GGReport(
        lhs=estimate_from_block_means(lhs_means, spec.n_inner),
        rhs_independent_term=estimate_from_block_means(indep_means, spec.n_inner),
        rhs_sum_terms=tuple(
            estimate_from_block_means(sum_means[:, j], spec.n_inner)
            for j in range(spec.s - 1)
        ),
        z_score=z,
    )


def gg_check(oracle, spec, seed) -> GGReport:
    """Test the identity on an oracle (see gg_block_stats for the blocks)."""
    stats = [gg_block_stats(oracle, spec, seed, b) for b in range(spec.n_outer)]
    return gg_report_from_stats(stats, spec)


@dataclass(frozen=True)
class SingularityCurve:
    s_values: np.ndarray
    estimates: tuple
    block_means: np.ndarray  # (n_outer, len(s_values)), for paired contrasts
    mode: str
    delta: float = None


def singularity_curve(
    oracle, s_max, mode, n_outer, seed, n_inner=1, delta=1e-6
) -> SingularityCurve:
    """Estimate E mu^(s)(A_s) for s = 3..s_max.

    A_s = {q_{1s} != q_{1i} for all 2 <= i <= s-1}.  mode "exact" compares
    overlaps after oracle.quantize (the model's exact value lattice); mode
    "smoothed" averages 1 - f_delta.  All s share the same nested samples:
    one (s_max x s_max) matrix yields the whole curve, which keeps the
    per-s estimates paired.
    """
    if s_max < 3:
        raise ValueError(f"s_max must be >= 3, got {s_max}")
    if mode not in ("exact", "smoothed"):
        raise ValueError(f"mode must be 'exact' or 'smoothed', got {mode!r}")
    rows = [
        singularity_block_means(oracle, s_max, mode, seed, b, n_inner, delta)
        for b in range(n_outer)
    ]
    return curve_from_block_means(np.stack(rows), s_max, mode, n_inner, delta)


def singularity_block_means(oracle, s_max, mode, seed, block_index, n_inner=1, delta=1e-6):
    """One outer block of the singularity curve: the per-s means of the
    A_s indicator (or its smoothed version), s = 3..s_max."""
    s_values = np.arange(3, s_max + 1)
    block = oracle.sample_block(rng_from(*as_path(seed), "singularity", block_index), s_max, n_inner)
    rows = block[:, 0, :]  # q_{1i} for i = 1..s_max
    if mode == "exact":
        rows = oracle.quantize(rows)
    out = np.empty(s_values.size)
    for col, s in enumerate(s_values):
        new = rows[:, s - 1]
        prev = rows[:, 1 : s - 1]
        if mode == "exact":
            hit = np.all(prev != new[:, None], axis=1).astype(float)
        else:
            hit = 1.0 - f_delta(new, prev, delta)
        out[col] = np.mean(hit)
    return out


def curve_from_block_means(block_means, s_max, mode, n_inner, delta) -> SingularityCurve:
    s_values = np.arange(3, s_max + 1)
    estimates = tuple(
        estimate_from_block_means(block_means[:, col], n_inner)
        for col in range(s_values.size)
    )
    return SingularityCurve(
        s_values=s_values,
        estimates=estimates,
        block_means=block_means,
        mode=mode,
        delta=None if mode == "exact" else delta,
    )


def write_singularity_csv(path, curve, header_comment=None):
    """CSV rows (s, estimate, std_error)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["s", "estimate", "std_error"])
        for s, est in zip(curve.s_values, curve.estimates):
            writer.writerow([int(s), _fmt(est.mean), _fmt(est.std_error)])


def write_gg_report_csv(path, report, header_comment=None):
    """CSV rows (component, mean, std_error) plus the z-score row."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["component", "mean", "std_error"])
        writer.writerow(["lhs", _fmt(report.lhs.mean), _fmt(report.lhs.std_error)])
        writer.writerow(
            [
                "rhs_independent",
                _fmt(report.rhs_independent_term.mean),
                _fmt(report.rhs_independent_term.std_error),
            ]
        )
        for j, term in enumerate(report.rhs_sum_terms, start=2):
            writer.writerow([f"rhs_q1{j}", _fmt(term.mean), _fmt(term.std_error)])
        writer.writerow(["z_score", _fmt(report.z_score), ""])
