"""Graph construction, shift operators, spectral tooling, and random edge sampling.

Provides the simulation substrate for distributed graph filtering: random
geometric (sensor-network style) graph generation, assembly of the usual shift
operators (adjacency, Laplacian and its normalized/scaled variants, plus the
interpolation shift T + wS - I), certified spectral-norm bounds via power
iteration, the graph Fourier transform, and the random edge sampling (RES)
model in which every link of a base graph is independently active per
iteration with probability p_ij.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

SHIFT_KINDS = (
    "adjacency",
    "laplacian",
    "normalized-laplacian",
    "scaled-laplacian",
    "interpolation-shift",
    "custom",
)

#: Shift kinds whose RES realizations provably satisfy ||S_t||_2 <= ||S||_2
#: (edge subsets with nonnegative weights cannot increase the spectral norm).
RES_KINDS = ("adjacency", "laplacian", "scaled-laplacian")

_RETRY_CAP = 1000
_POWER_TOL = 1e-10
_POWER_CAP = 100_000
_RHO_MARGIN = 1e-6


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with optional planar coordinates.

    edges is an (M, 2) int array with each pair stored once as (i, j), i < j;
    weights is the matching (M,) nonnegative array; coords, when present, is
    (N, 2) positions in meters.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        if len(edges) != len(weights):
            raise ValueError("edge and weight counts differ")
        if len(edges):
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loops are not allowed")
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.column_stack([lo, hi])
            if len(np.unique(edges, axis=0)) != len(edges):
                raise ValueError("duplicate edges")
            if np.any(weights < 0):
                raise ValueError("negative edge weight")
        edges.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=float)
            if coords.shape != (self.n, 2):
                raise ValueError("coords must be (N, 2)")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix."""
        a = np.zeros((self.n, self.n))
        if len(self.edges):
            i, j = self.edges[:, 0], self.edges[:, 1]
            a[i, j] = self.weights
            a[j, i] = self.weights
        return a

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        if len(self.edges) == 0:
            return False
        ncomp, _ = connected_components(self.adjacency() > 0, directed=False)
        return ncomp == 1


@dataclass(frozen=True)
class ShiftOperator:
    """A graph shift matrix with a certified spectral-norm bound rho.

    One application of the matrix is one communication round between
    neighbors. rho always upper-bounds ||matrix||_2; filter stability checks
    and every quantization bound consume rho, never a fresh estimate.
    """

    matrix: np.ndarray
    kind: str
    rho: float
    symmetric: bool

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("shift matrix must be square")
        if self.kind not in SHIFT_KINDS:
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenbasis U and ascending eigenvalues of a symmetric shift."""

    eigvecs: np.ndarray
    eigvals: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.eigvecs, dtype=float).copy()
        lam = np.asarray(self.eigvals, dtype=float).copy()
        if u.shape != (lam.size, lam.size):
            raise ValueError("eigvecs must be square matching eigvals length")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigvals must be sorted ascending")
        u.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "eigvecs", u)
        object.__setattr__(self, "eigvals", lam)

    @property
    def lambda_min(self) -> float:
        return float(self.eigvals[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigvals[-1])


@dataclass(frozen=True)
class ResModel:
    """Random edge sampling model: base graph + per-link activation probabilities.

    probs is an N x N symmetric matrix supported exactly on the edge set with
    entries in (0, 1]. Each filtering iteration draws a realization in which
    every edge survives independently with its probability.
    """

    base: Graph
    kind: str
    probs: np.ndarray
    base_shift: ShiftOperator = field(repr=False, default=None)
    lap_scale: float = field(repr=False, default=1.0)

    def __post_init__(self):
        if self.kind not in RES_KINDS:
            raise ValueError(
                f"RES supports kinds {RES_KINDS}; got {self.kind!r} "
                "(realizations of other kinds can exceed the base spectral norm)"
            )
        p = np.asarray(self.probs, dtype=float).copy()
        if p.shape != (self.base.n, self.base.n):
            raise ValueError("probs must be N x N")
        if not np.array_equal(p, p.T):
            raise ValueError("probs must be symmetric")
        support = np.zeros_like(p, dtype=bool)
        if len(self.base.edges):
            i, j = self.base.edges[:, 0], self.base.edges[:, 1]
            support[i, j] = support[j, i] = True
        if np.any(p[~support] != 0):
            raise ValueError("probs must be zero off the edge set")
        on = p[support]
        if on.size and (np.any(on <= 0) or np.any(on > 1)):
            raise ValueError("edge probabilities must lie in (0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if self.base_shift is None:
            object.__setattr__(self, "base_shift", build_shift(self.base, self.kind))
        if self.kind == "scaled-laplacian":
            lap = np.diag(self.base.degrees()) - self.base.adjacency()
            object.__setattr__(self, "lap_scale", spectral_radius(lap))

    def edge_probs(self) -> np.ndarray:
        """Per-edge activation probabilities aligned with base.edges."""
        if not len(self.base.edges):
            return np.zeros(0)
        return self.probs[self.base.edges[:, 0], self.base.edges[:, 1]]


def res_model(base: Graph, kind: str, p) -> ResModel:
    """Build a ResModel from a scalar probability or a full matrix."""
    if np.isscalar(p):
        probs = np.zeros((base.n, base.n))
        if len(base.edges):
            i, j = base.edges[:, 0], base.edges[:, 1]
            probs[i, j] = probs[j, i] = float(p)
    else:
        probs = np.asarray(p, dtype=float)
    return ResModel(base, kind, probs)


def random_geometric(n: int, side: float, radius: float, seed: int) -> Graph:
    """Random geometric graph: n nodes uniform in [0, side]^2, edges within radius.

    Resamples until connected (up to 1000 attempts); unit edge weights.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side <= 0 or radius <= 0:
        raise ValueError("side and radius must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(_RETRY_CAP):
        coords = rng.uniform(0.0, side, size=(n, 2))
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        close = (dist <= radius) & ~np.eye(n, dtype=bool)
        i, j = np.nonzero(np.triu(close))
        g = Graph(n, np.column_stack([i, j]), np.ones(len(i)), coords)
        if g.is_connected():
            return g
    raise RuntimeError(
        f"no connected geometric graph in {_RETRY_CAP} attempts "
        f"(n={n}, side={side}, radius={radius}); increase radius or decrease side"
    )


def knn_graph(coords: np.ndarray, k: int = 5) -> Graph:
    """Symmetrized k-nearest-neighbor graph from planar coordinates.

    Edge (i, j) exists when j is among i's k nearest or vice versa; unit
    weights. Raises if the result is disconnected, suggesting a larger k.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    if k < 1 or k >= n:
        raise ValueError("k must be in [1, N-1]")
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    pairs = set()
    for i in range(n):
        for j in np.argsort(dist[i], kind="stable")[:k]:
            pairs.add((min(i, int(j)), max(i, int(j))))
    edges = np.array(sorted(pairs), dtype=int).reshape(-1, 2)
    g = Graph(n, edges, np.ones(len(edges)), coords)
    if not g.is_connected():
        raise ValueError(f"kNN graph with k={k} is disconnected; raise k")
    return g


def spectral_radius(S, tol: float = _POWER_TOL) -> float:
    """Estimate ||S||_2 by power iteration.

    Symmetric input iterates v <- Sv/||Sv|| and reads off the norm-growth
    ratio ||Sv|| (the Rayleigh quotient of S^2, immune to the +/-lambda_max
    stall of bipartite adjacency spectra); nonsymmetric input iterates on
    S^T S. Deterministic all-ones start with the first coordinate perturbed
    by 1e-3. Stops when successive estimates agree within tol (relative).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(S, ShiftOperator):
        m, symmetric = S.matrix, S.symmetric
    else:
        m = np.asarray(S, dtype=float)
        symmetric = np.array_equal(m, m.T)
    n = m.shape[0]
    v = np.ones(n)
    v[0] += 1e-3
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(_POWER_CAP):
        z = m @ v if symmetric else m.T @ (m @ v)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        new = nz if symmetric else np.sqrt(nz)
        v = z / nz
        if abs(new - est) <= tol * max(new, 1e-300):
            return float(new)
        est = new
    raise RuntimeError(
        f"power iteration did not converge in {_POWER_CAP} iterations; "
        f"last estimate {est}"
    )


def _certify(est: float) -> float:
    return est * (1.0 + _RHO_MARGIN)


def build_shift(g: Graph, kind: str, extra: dict | None = None) -> ShiftOperator:
    """Assemble a shift operator of the given kind from a graph.

    kinds: adjacency A; laplacian L = D - A; normalized-laplacian
    D^(-1/2) L D^(-1/2); scaled-laplacian lambda_max^(-1) L; custom (extra
    supplies the matrix); interpolation-shift T + wS - I where extra supplies
    w, the 0/1 sampling mask (diagonal of T), and optionally base_kind for S
    (default normalized-laplacian).

    rho is a certified bound: power-iteration estimate inflated by a 1e-6
    relative margin.
    """
    extra = extra or {}
    a = g.adjacency()
    if kind == "adjacency":
        matrix = a
    elif kind == "laplacian":
        matrix = np.diag(g.degrees()) - a
    elif kind == "normalized-laplacian":
        deg = g.degrees()
        if np.any(deg <= 0):
            bad = int(np.argmin(deg))
            raise ValueError(f"node {bad} has zero degree; cannot normalize")
        d = 1.0 / np.sqrt(deg)
        matrix = (np.diag(deg) - a) * d[:, None] * d[None, :]
    elif kind == "scaled-laplacian":
        lap = np.diag(g.degrees()) - a
        lam_max = spectral_radius(lap) if np.any(lap) else 1.0
        matrix = lap / lam_max
    elif kind == "interpolation-shift":
        if "w" not in extra or "mask" not in extra:
            raise ValueError("interpolation-shift needs extra={'w': ..., 'mask': ...}")
        base = build_shift(g, extra.get("base_kind", "normalized-laplacian"))
        return interpolation_shift(np.asarray(extra["mask"]), float(extra["w"]), base)
    elif kind == "custom":
        if "matrix" not in extra:
            raise ValueError("custom shift needs extra={'matrix': ...}")
        matrix = np.asarray(extra["matrix"], dtype=float)
        if matrix.shape != (g.n, g.n):
            raise ValueError("custom matrix shape mismatch")
    else:
        raise ValueError(f"unknown shift kind {kind!r}")
    symmetric = bool(np.array_equal(matrix, matrix.T))
    rho = _certify(spectral_radius(matrix)) if np.any(matrix) else 0.0
    return ShiftOperator(matrix, kind, rho, symmetric)


def interpolation_shift(mask: np.ndarray, w: float, S: ShiftOperator) -> ShiftOperator:
    """The interpolation recursion shift T + wS - I for sampling mask T.

    mask is the 0/1 diagonal of T (1 = observed node). The induced one-pole
    recursion is stable iff ||T + wS - I||_2 < 1.
    """
    mask = np.asarray(mask, dtype=float).reshape(-1)
    if mask.size != S.n:
        raise ValueError("mask length must match shift size")
    if np.any((mask != 0) & (mask != 1)):
        raise ValueError("mask entries must be 0 or 1")
    matrix = np.diag(mask) + w * S.matrix - np.eye(S.n)
    rho = _certify(spectral_radius(matrix)) if np.any(matrix) else 0.0
    symmetric = bool(np.array_equal(matrix, matrix.T))
    return ShiftOperator(matrix, "interpolation-shift", rho, symmetric)


def eigendecompose(S: ShiftOperator) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric shift, eigenvalues ascending."""
    if not S.symmetric:
        raise ValueError("eigendecompose requires a symmetric shift")
    eigvals, eigvecs = np.linalg.eigh(S.matrix)
    return SpectralDecomposition(eigvecs, eigvals)


def gft(dec: SpectralDecomposition, x: np.ndarray) -> np.ndarray:
    """Graph Fourier transform x_hat = U^T x (orthonormal U)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != dec.eigvals.size:
        raise ValueError("signal length must match decomposition size")
    return dec.eigvecs.T @ x


def igft(dec: SpectralDecomposition, xhat: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform x = U x_hat."""
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape[0] != dec.eigvals.size:
        raise ValueError("spectral signal length must match decomposition size")
    return dec.eigvecs @ xhat


def res_sample(m: ResModel, rng: np.random.Generator) -> ShiftOperator:
    """Draw one RES realization: each edge survives with its probability.

    The shift matrix is rebuilt per the model's kind from surviving edges
    (Laplacian kinds recompute degrees on the realization; scaled-laplacian
    keeps the base graph's scale). rho inherits the base certified bound.
    """
    base = m.base
    if len(base.edges):
        keep = rng.random(len(base.edges)) < m.edge_probs()
        edges = base.edges[keep]
        weights = base.weights[keep]
    else:
        edges, weights = base.edges, base.weights
    g_t = Graph(base.n, edges, weights, base.coords)
    a = g_t.adjacency()
    if m.kind == "adjacency":
        matrix = a
    else:
        matrix = np.diag(g_t.degrees()) - a
        if m.kind == "scaled-laplacian":
            matrix = matrix / m.lap_scale
    return ShiftOperator(matrix, m.kind, m.base_shift.rho, True)


def expected_shift(m: ResModel) -> ShiftOperator:
    """Closed-form expected shift S_bar of a RES model.

    adjacency: P o A; (scaled-)laplacian: D_bar - (P o A) with
    [D_bar]_ii = sum_j a_ij p_ij, scaled by the base lambda_max where
    applicable.
    """
    pa = m.probs * m.base.adjacency()
    if m.kind == "adjacency":
        matrix = pa
    else:
        matrix = np.diag(pa.sum(axis=1)) - pa
        if m.kind == "scaled-laplacian":
            matrix = matrix / m.lap_scale
    rho = _certify(spectral_radius(matrix)) if np.any(matrix) else 0.0
    return ShiftOperator(matrix, m.kind, rho, True)


def graph_to_csv(g: Graph, edge_path, coord_path=None) -> None:
    """Write the edge list as `i,j,weight` rows; optionally coords as `node,x,y`."""
    with open(edge_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "weight"])
        for (i, j), w in zip(g.edges, g.weights):
            writer.writerow([int(i), int(j), repr(float(w))])
    if coord_path is not None:
        if g.coords is None:
            raise ValueError("graph has no coordinates to export")
        with open(coord_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "x", "y"])
            for node, (x, y) in enumerate(g.coords):
                writer.writerow([node, repr(float(x)), repr(float(y))])


def graph_from_csv(edge_path, coord_path=None, n: int | None = None) -> Graph:
    """Read a graph from an `i,j,weight` edge list and optional `node,x,y` coords."""
    edges, weights = [], []
    with open(edge_path, newline="") as fh:
        for row in csv.DictReader(fh):
            edges.append((int(row["i"]), int(row["j"])))
            weights.append(float(row.get("weight", 1.0) or 1.0))
    coords = None
    if coord_path is not None:
        rows = []
        with open(coord_path, newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append((int(row["node"]), float(row["x"]), float(row["y"])))
        rows.sort()
        coords = np.array([(x, y) for _, x, y in rows])
        n = len(rows) if n is None else n
    if n is None:
        n = 1 + max(max(i, j) for i, j in edges) if edges else 1
    edges = np.array(edges, dtype=int).reshape(-1, 2)
    return Graph(n, edges, np.array(weights), coords)
