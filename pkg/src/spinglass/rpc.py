"""Ruelle probability cascades, two ways, plus the stability map.

A cascade is parameterized by a right-continuous step CDF x on [0,1].
Construction one (time change): run the Bolthausen-Sznitman coalescent and
set q_ij = x^{-1}(e^{-tau_ij}) with the right-continuous inverse
x^{-1}(u) = inf{q >= 0 : x(q) > u}.  Construction two (cascade): a tree of
depth r whose nodes carry Poisson point processes with intensity
m_l s^{-1-m_l} ds; leaf weights are the products of the raw points along
the path, normalized across all leaves, and two leaves whose paths agree
down to level L have inner product q_L (q_0 = 0), with atom norm^2 equal
to the top breakpoint q_r.  The two constructions produce the same
overlap law; tests cross-check them against each other.

Degenerate boundary: for x identically 1 the literal inverse formula gives
0, but the matching overlap matrix is all ones; `rpc_overlaps` applies
that convention while `right_cont_inverse` stays literal.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .coalescent import simulate_bs_coalescent
from .errors import CapacityError, NumericError

ATOM_CAP = 20_000
DENSE_EXPORT_CAP = 1_000
MIN_TRUNCATION = 100


@dataclass(frozen=True)
class ParameterFunction:
    """Non-decreasing right-continuous step function x: [0,1] -> [0,1].

    x(q) = values[l] on [breakpoints[l-1], breakpoints[l]) with
    values[0] before the first breakpoint and values[-1] = 1 after the
    last; a cumulative distribution function on [0,1].
    """

    breakpoints: tuple = field(default=())
    values: tuple = field(default=(1.0,))

    def __post_init__(self):
        bp = tuple(float(q) for q in self.breakpoints)
        vals = tuple(float(m) for m in self.values)
        if len(vals) != len(bp) + 1:
            raise ValueError(f"need len(values) == len(breakpoints)+1, got {len(vals)} vs {len(bp)}")
        if any(not 0.0 <= q <= 1.0 for q in bp):
            raise ValueError(f"breakpoints must lie in [0,1]: {bp}")
        if any(b >= a for b, a in zip(bp, bp[1:])):
            raise ValueError(f"breakpoints must be strictly increasing: {bp}")
        if any(not 0.0 <= m <= 1.0 for m in vals):
            raise ValueError(f"values must lie in [0,1]: {vals}")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise ValueError(f"values must be non-decreasing: {vals}")
        if vals[-1] != 1.0:
            raise ValueError(f"final value must be 1, got {vals[-1]}")
        if bp and bp[0] == 0.0:
            # the piece [0, 0) is empty; drop its dead value
            bp, vals = bp[1:], vals[1:]
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def one_step(cls, m, q_star):
        """x = m on [0, q_star), 1 on [q_star, 1]."""
        return cls((q_star,), (m, 1.0))

    @classmethod
    def constant_one(cls):
        return cls((), (1.0,))

    @property
    def r(self):
        return len(self.breakpoints)

    @property
    def is_identically_one(self):
        return self.values[0] == 1.0

    @property
    def is_delta_at_one(self):
        """x = 0 on [0, 1) with the jump to 1 exactly at q = 1."""
        return self.values == (0.0, 1.0) and self.breakpoints == (1.0,)

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), q, side="right")
        out = np.asarray(self.values)[idx]
        return float(out) if out.ndim == 0 else out

    def integral(self):
        """Exact integral of x over [0,1]."""
        edges = np.concatenate(([0.0], self.breakpoints, [1.0]))
        return float(np.sum(np.asarray(self.values) * np.diff(edges)))

    def mean_overlap(self):
        """E[q_12] of the cascade = integral of x^{-1} = 1 - integral of x."""
        return 1.0 - self.integral()

    def to_json(self):
        return json.dumps({"breakpoints": list(self.breakpoints), "values": list(self.values)})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(tuple(data["breakpoints"]), tuple(data["values"]))


def right_cont_inverse(x, u):
    """x^{-1}(u) = inf{q >= 0 : x(q) > u} for u in [0, 1).

    Literal inf over the step representation (even for x identically 1,
    where it is 0; see rpc_overlaps for the degenerate convention).
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0) or np.any(u_arr >= 1):
        raise ValueError("u must lie in [0, 1)")
    q_at = np.concatenate(([0.0], x.breakpoints))
    idx = np.searchsorted(np.asarray(x.values), u_arr, side="right")
    out = q_at[idx]
    return float(out) if out.ndim == 0 else out


def rpc_overlaps(x, n, rng, run=None):
    """Overlap matrix of n replicas via the coalescent time change.

    Entries are exact copies of the breakpoints of x (or 0), so
    coincidence and ultrametricity checks on the output are exact.  The
    two degenerate families bypass the literal inverse by convention:
    x == 1 maps to the all-ones matrix and x = 0 on [0,1) to the
    identity.  Pass `run` to reuse a coalescent realization (monotone
    couplings).
    """
    if run is None:
        run = simulate_bs_coalescent(n, rng)
    if x.is_identically_one:
        return np.ones((run.n, run.n))
    if x.is_delta_at_one:
        return np.eye(run.n)
    u = np.exp(-run.tau)
    np.fill_diagonal(u, 0.0)
    q_at = np.concatenate(([0.0], x.breakpoints))
    q = q_at[np.searchsorted(np.asarray(x.values), u, side="right")]
    np.fill_diagonal(q, 1.0)
    return q


def l1_distance(x, y):
    """Exact integral of |x - y| over [0, 1] via merged breakpoints."""
    edges = np.unique(np.concatenate(([0.0, 1.0], x.breakpoints, y.breakpoints)))
    left = edges[:-1]
    return float(np.sum(np.abs(x(left) - y(left)) * np.diff(edges)))


def overlap_ultrametric_violations(q):
    """Number of triples (i,j,k) with q_ij < min(q_ik, q_jk); 0 for every
    matrix produced by rpc_overlaps (exact comparisons, no tolerance)."""
    q = np.asarray(q)
    lower = np.minimum(q[:, None, :], q[None, :, :])  # [i, j, k]
    return int(np.sum(q[:, :, None] < lower))


class DenseGram:
    """Explicit Gram matrix of the support vectors."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"gram must be square, got {matrix.shape}")
        if matrix.shape[0] > ATOM_CAP:
            raise CapacityError(f"{matrix.shape[0]} atoms exceed the cap {ATOM_CAP}")
        if not np.allclose(matrix, matrix.T):
            raise ValueError("gram must be symmetric")
        if np.any(np.diag(matrix) > 1.0 + 1e-12):
            raise ValueError("atoms must lie in the unit ball (diag <= 1)")
        self.matrix = matrix

    @property
    def n_atoms(self):
        return self.matrix.shape[0]

    def take(self, i, j):
        return self.matrix[i, j]

    def diagonal(self):
        return np.diag(self.matrix).copy()

    def to_dense(self):
        return self.matrix.copy()


class CascadeGram:
    """Implicit Gram matrix of a cascade: atoms are the leaves of a
    depth-r tree with `branching` children per node; two leaves whose
    paths agree down to level L have inner product levels[L-1] (0 for
    L = 0), and every atom has norm^2 = levels[-1]."""

    def __init__(self, levels, branching, depth):
        self.levels = np.asarray(levels, dtype=float)
        self.branching = int(branching)
        self.depth = int(depth)
        if self.levels.shape != (self.depth,):
            raise ValueError("need one overlap value per level")
        self._q_ext = np.concatenate(([0.0], self.levels))

    @property
    def n_atoms(self):
        return self.branching**self.depth

    def prefix_depth(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        depth = np.zeros(np.broadcast(i, j).shape, dtype=np.int64)
        for level in range(1, self.depth + 1):
            div = self.branching ** (self.depth - level)
            depth += (i // div) == (j // div)
        return depth

    def take(self, i, j):
        return self._q_ext[self.prefix_depth(i, j)]

    def diagonal(self):
        return np.full(self.n_atoms, self.levels[-1])

    def to_dense(self):
        if self.n_atoms > 4000:
            raise CapacityError(f"refusing to densify {self.n_atoms} atoms")
        idx = np.arange(self.n_atoms)
        return self.take(idx[:, None], idx[None, :])


@dataclass(frozen=True)
class DiscreteDirectingMeasure:
    """Atoms (weights + Gram structure) of a random measure on the unit ball.

    truncation_tail is the estimated relative Poisson mass lost to the
    top-M truncation (0 for exact/synthetic measures).
    """

    weights: np.ndarray
    gram: object
    truncation_tail: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if w.size != self.gram.n_atoms:
            raise ValueError(f"{w.size} weights vs {self.gram.n_atoms} atoms")
        object.__setattr__(self, "weights", w / w.sum())

    @property
    def n_atoms(self):
        return self.weights.size

    @property
    def norm_sq(self):
        return self.gram.diagonal()


def pd_cascade(x, truncation, rng) -> DiscreteDirectingMeasure:
    """Directing measure of the cascade with parameter x, truncated to the
    top `truncation` Poisson atoms per node.

    Per node at level l the atoms are s_k = Gamma_k^{-1/m_l} (Gamma_k the
    arrival times of a unit-rate Poisson process), the largest M points of
    the intensity m_l s^{-1-m_l} ds; leaf weights are products of raw
    points along the path normalized across all leaves.
    """
    r = x.r
    if r == 0:
        raise ValueError("degenerate parameter function; use rpc_overlaps instead")
    interior = x.values[:-1]
    if any(not 0.0 < m < 1.0 for m in interior):
        raise ValueError(f"interior values must lie strictly in (0,1): {interior}")
    m_count = int(truncation)
    if m_count < MIN_TRUNCATION:
        raise ValueError(f"truncation must be >= {MIN_TRUNCATION}, got {truncation}")
    if m_count**r > ATOM_CAP:
        raise CapacityError(f"{m_count}^{r} leaves exceed the atom cap {ATOM_CAP}")

    log_raw = np.zeros(1)
    tail_rel = 0.0
    for level in range(r):
        m = interior[level]
        n_nodes = m_count**level
        gamma = rng.exponential(size=(n_nodes, m_count)).cumsum(axis=1)
        log_s = -np.log(gamma) / m
        # Poisson tail beyond the M-th point: integral of s^{-1/m} from M
        per_node = np.exp(log_s - log_s[:, :1]).sum(axis=1) * np.exp(log_s[:, 0])
        tail = (m / (1.0 - m)) * m_count ** (1.0 - 1.0 / m)
        tail_rel += float(np.mean(tail / (tail + per_node)))
        log_raw = (log_raw[:, None] + log_s).reshape(-1)

    log_raw -= log_raw.max()
    weights = np.exp(log_raw)
    gram = CascadeGram(np.asarray(x.breakpoints), m_count, r)
    return DiscreteDirectingMeasure(weights=weights, gram=gram, truncation_tail=tail_rel)


def _sample_atom_indices(mu, shape, rng):
    cum = np.cumsum(mu.weights)
    idx = np.searchsorted(cum, rng.random(shape), side="right")
    return np.minimum(idx, mu.n_atoms - 1)


def sample_from_directing(mu, s, rng):
    """Overlap matrix of s iid atom draws: entry (i,j) is the Gram entry of
    the drawn atoms for i != j (same atom twice gives its norm^2), and the
    diagonal is 1 by convention."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    idx = _sample_atom_indices(mu, s, rng)
    q = mu.gram.take(idx[:, None], idx[None, :]).astype(float)
    np.fill_diagonal(q, 1.0)
    return q


def sample_pair_overlaps(mu, n_pairs, rng):
    """n_pairs independent two-replica overlaps q_12 (vectorized)."""
    idx = _sample_atom_indices(mu, (n_pairs, 2), rng)
    return mu.gram.take(idx[:, 0], idx[:, 1]).astype(float)


def _squared(q):
    return np.asarray(q, dtype=float) ** 2


def sample_tilt_field(mu, rng, cov=None):
    """One draw of the centered Gaussian field (kappa(v_a))_a over the atoms
    with Cov[kappa(v_a), kappa(v_b)] = cov(G_ab); cov defaults to q -> q^2.

    Cascade grams use the exact tree construction (independent node
    Gaussians with variance increments cov(q_l) - cov(q_{l-1})); dense
    grams go through an eigendecomposition with a PSD check.
    """
    cov = _squared if cov is None else cov
    gram = mu.gram
    if isinstance(gram, CascadeGram):
        f_ext = np.asarray(cov(gram._q_ext), dtype=float)
        if f_ext[0] < 0 or np.any(np.diff(f_ext) < 0):
            raise NumericError(
                "cov must be nonnegative at 0 and non-decreasing on the cascade levels"
            )
        m_count, r = gram.branching, gram.depth
        kappa = np.full(gram.n_atoms, np.sqrt(f_ext[0]) * rng.standard_normal())
        for level in range(1, r + 1):
            g = rng.standard_normal(m_count**level)
            kappa += np.sqrt(f_ext[level] - f_ext[level - 1]) * np.repeat(
                g, m_count ** (r - level)
            )
        return kappa
    c = np.asarray(cov(gram.to_dense()), dtype=float)
    c = (c + c.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(c)
    if eigvals[0] < -1e-10:
        raise NumericError(f"cov(gram) is not PSD: min eigenvalue {eigvals[0]}")
    z = rng.standard_normal(gram.n_atoms)
    return eigvecs @ (np.sqrt(np.clip(eigvals, 0.0, None)) * z)


def phi_lambda(mu, lam, rng=None, cov=None, kappa=None) -> DiscreteDirectingMeasure:
    """Stochastic-stability map: reweight atoms by e^{lambda kappa(v_a)}.

    Draws one realization of the Gaussian field (or reuses a provided
    `kappa`) and returns the measure with weights w_a e^{lambda kappa_a}/Z;
    the Gram structure (and hence every sampled overlap value) is
    unchanged.  lam = 0 returns mu itself.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return mu
    if kappa is None:
        if rng is None:
            raise ValueError("need an rng (or a precomputed kappa)")
        kappa = sample_tilt_field(mu, rng, cov)
    logw = np.log(mu.weights) + lam * np.asarray(kappa, dtype=float)
    logw -= logw.max()
    return DiscreteDirectingMeasure(
        weights=np.exp(logw), gram=mu.gram, truncation_tail=mu.truncation_tail
    )


def measure_to_json(mu) -> str:
    """Export weights and the dense Gram matrix (small measures only)."""
    if mu.n_atoms > DENSE_EXPORT_CAP:
        raise CapacityError(f"export capped at {DENSE_EXPORT_CAP} atoms, got {mu.n_atoms}")
    return json.dumps({"weights": mu.weights.tolist(), "gram": mu.gram.to_dense().tolist()})


def measure_from_json(text) -> DiscreteDirectingMeasure:
    data = json.loads(text)
    return DiscreteDirectingMeasure(
        weights=np.asarray(data["weights"], dtype=float), gram=DenseGram(data["gram"])
    )
