"""Overlap matrices, monomial observables, and exchangeability testing.

Replica labels are 1-based throughout (q12 is the overlap of replicas 1
and 2), matching the usual notation; array storage is 0-based.  Estimates
use a nested error model: the outer level re-draws the randomness of the
measure (disorder, cascade, ...), the inner level re-draws replica sets,
and the standard error is computed from outer-level variation only.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .seeding import as_path, rng_from

PSD_TOL = 1e-10


def _fmt(x):
    """Round-trippable CSV float text (plain Python repr)."""
    return repr(float(x))
MAX_EXPONENT = 32


def overlap_matrix(replicas):
    """Gram matrix of overlaps: entries[i][j] = overlap(replica_i, replica_j).

    `replicas` is an (s, n) array of +-1 spins; the diagonal is exactly 1.
    """
    spins = np.asarray(replicas)
    if spins.ndim != 2:
        raise ValueError(f"expected an (s, n) replica array, got shape {spins.shape}")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("spin entries must be exactly -1 or +1")
    s64 = spins.astype(np.int64)
    return (s64 @ s64.T) / spins.shape[1]


def validate_overlap_matrix(q, tol=PSD_TOL):
    """Check symmetry, unit diagonal, entries in [-1,1], PSD (min eig >= -tol)."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"overlap matrix must be square, got {q.shape}")
    if not np.array_equal(q, q.T):
        raise ValueError("overlap matrix must be symmetric")
    if not np.all(np.diag(q) == 1.0):
        raise ValueError("overlap matrix must have unit diagonal")
    if np.any(np.abs(q) > 1.0):
        raise ValueError("overlap entries must lie in [-1, 1]")
    min_eig = float(np.linalg.eigvalsh(q)[0])
    if min_eig < -tol:
        raise ValueError(f"overlap matrix not PSD: min eigenvalue {min_eig}")
    return q


@dataclass(frozen=True)
class Monomial:
    """Product of overlap powers prod_{i<j} q_ij^{k_ij} on s replicas.

    exponents maps 1-based pairs (i, j), i < j, to nonnegative integer
    powers; the empty map is the constant 1.
    """

    exponents: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for (i, j), k in self.exponents.items():
            i, j, k = int(i), int(j), int(k)
            if not 1 <= i < j:
                raise ValueError(f"need 1 <= i < j, got ({i}, {j})")
            if not 0 <= k <= MAX_EXPONENT:
                raise ValueError(f"exponent must be in [0, {MAX_EXPONENT}], got {k}")
            if k > 0:
                cleaned[(i, j)] = k
        object.__setattr__(self, "exponents", dict(sorted(cleaned.items())))

    @property
    def s(self):
        """Smallest replica count the monomial is defined on."""
        return max((j for _, j in self.exponents), default=1)

    def label(self):
        if not self.exponents:
            return "1"
        parts = []
        for (i, j), k in self.exponents.items():
            parts.append(f"q[{i},{j}]" + (f"^{k}" if k > 1 else ""))
        return "*".join(parts)


def evaluate_monomial(m, q):
    """Evaluate a monomial on an overlap matrix, or a (..., s, s) batch."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] < m.s:
        raise ValueError(f"monomial needs {m.s} replicas, matrix has {q.shape[-1]}")
    out = np.ones(q.shape[:-2])
    for (i, j), k in m.exponents.items():
        out = out * q[..., i - 1, j - 1] ** k
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with outer-level (measure randomness) errors."""

    mean: float
    std_error: float
    n_outer: int
    n_inner: int


def estimate_from_block_means(block_means, n_inner):
    block_means = np.asarray(block_means, dtype=float)
    n_outer = block_means.shape[0]
    se = 0.0 if n_outer < 2 else float(np.std(block_means, ddof=1) / np.sqrt(n_outer))
    return Estimate(float(np.mean(block_means)), se, n_outer, int(n_inner))


def estimate_observables(oracle, monomials, n_outer, n_inner, seed, s=None):
    """Nested Monte Carlo estimates of disorder-averaged monomials.

    Each outer draw asks the oracle for a block of n_inner overlap
    matrices sharing one realization of the measure; every monomial is
    evaluated on the same blocks, and each estimate's mean and std_error
    are taken over the n_outer block means.  Deterministic given
    (oracle, seed).
    """
    if n_outer < 2:
        raise ValueError(f"n_outer must be >= 2, got {n_outer}")
    if s is None:
        s = max(max((m.s for m in monomials), default=1), 2)
    block_means = np.empty((n_outer, len(monomials)))
    for b in range(n_outer):
        block = oracle.sample_block(rng_from(*as_path(seed), "outer", b), s, n_inner)
        for col, m in enumerate(monomials):
            block_means[b, col] = np.mean(evaluate_monomial(m, block))
    return [estimate_from_block_means(block_means[:, col], n_inner) for col in range(len(monomials))]


def estimate_observable(oracle, monomial, n_outer, n_inner, seed, s=None) -> Estimate:
    """Single-monomial convenience wrapper around estimate_observables."""
    return estimate_observables(oracle, [monomial], n_outer, n_inner, seed, s)[0]


@dataclass(frozen=True)
class ExchangeabilityReport:
    labels: tuple
    z_scores: tuple
    threshold: float

    @property
    def passed(self):
        return all(abs(z) < self.threshold for z in self.z_scores)


def exchangeability_test(samples, permutation, monomials, threshold=4.0):
    """Paired permutation test of weak exchangeability.

    For each monomial, compares its value on the sampled matrices against
    the value on the index-permuted matrices (q_ij -> q_{pi(i)pi(j)}) and
    reports the z-score of the paired difference.  `permutation` lists the
    1-based images (pi(1), ..., pi(s)).  Pass = all |z| below threshold.
    """
    q = np.asarray(samples, dtype=float)
    if q.ndim != 3:
        raise ValueError(f"expected (n_samples, s, s) array, got {q.shape}")
    if q.shape[0] < 100:
        raise ValueError(f"need at least 100 samples, got {q.shape[0]}")
    s = q.shape[-1]
    perm = np.asarray(permutation, dtype=int) - 1
    if sorted(perm.tolist()) != list(range(s)):
        raise ValueError(f"not a permutation of 1..{s}: {permutation}")
    q_perm = q[:, perm][:, :, perm]
    labels, zs = [], []
    for m in monomials:
        d = evaluate_monomial(m, q) - evaluate_monomial(m, q_perm)
        mean = float(np.mean(d))
        se = float(np.std(d, ddof=1) / np.sqrt(len(d)))
        if se == 0.0:
            z = 0.0 if mean == 0.0 else float("inf")
        else:
            z = mean / se
        labels.append(m.label())
        zs.append(z)
    return ExchangeabilityReport(tuple(labels), tuple(zs), threshold)


def write_overlap_samples(path, matrices, extra=None):
    """Write overlap matrices as JSON lines {"s": int, "q": [[...]]}.

    `extra` (optional dict) is merged into every line, e.g. a config hash.
    """
    with open(path, "w") as fh:
        for q in matrices:
            q = np.asarray(q)
            rec = {"s": int(q.shape[0]), "q": q.tolist()}
            if extra:
                rec.update(extra)
            fh.write(json.dumps(rec) + "\n")


def iter_overlap_samples(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            q = np.asarray(rec["q"], dtype=float)
            if q.shape != (rec["s"], rec["s"]):
                raise ValueError(f"malformed overlap record: s={rec['s']}, shape={q.shape}")
            yield q


def read_overlap_samples(path):
    """Read a JSONL overlap file into an (n_samples, s, s) array."""
    mats = list(iter_overlap_samples(path))
    if not mats:
        return np.empty((0, 0, 0))
    return np.stack(mats)


ESTIMATE_FIELDS = ("observable", "mean", "std_error", "n_outer", "n_inner", "seed")


def write_estimates_csv(path, rows, header_comment=None):
    """Write (observable, mean, std_error, n_outer, n_inner, seed) rows.

    Each row is (label, Estimate, seed).
    """
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(ESTIMATE_FIELDS)
        for label, est, seed in rows:
            writer.writerow(
                [label, _fmt(est.mean), _fmt(est.std_error), est.n_outer, est.n_inner, seed]
            )
