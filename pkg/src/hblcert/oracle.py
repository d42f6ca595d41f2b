"""Floating-point cross-checks for the exact machinery.

Three independent probes: the Gaussian ratio (the inequality's two sides
evaluated on centered Gaussians, where the integrals collapse to
determinants), gradient ascent over the Gaussian family as an infeasibility
heuristic, and direct grid quadrature of the inequality and of the
edge-function factorization in low dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hblcert.data import HBLDatum
from hblcert.flowgraph import GraphDecomposition, WeightFunction, is_balanced, total_mass
from hblcert.linalg import Matrix, Subspace, image


def _float_matrix(m: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in m.row(i)] for i in range(m.rows)], dtype=float) \
        if m.rows else np.zeros((0, m.cols))


def orthonormal_forms(datum: HBLDatum) -> list[np.ndarray]:
    """Each map composed with an orthonormal chart of its image.

    The chart is the QR orthonormalization of the image's RREF basis, so it
    is deterministic, and being orthonormal it preserves the codomain volume
    normalization that the certificate constant refers to. Surjective maps
    pass through unchanged up to sign conventions of QR.
    """
    out = []
    for m in datum.maps:
        mf = _float_matrix(m)
        img = image(m, Subspace.full(datum.dim))
        if img.dim == 0:
            out.append(np.zeros((0, datum.dim)))
            continue
        if img.is_full():
            out.append(mf)
            continue
        basis = _float_matrix(img.basis)          # r x codomain
        q, _ = np.linalg.qr(basis.T)              # codomain x r, orthonormal columns
        out.append(q.T @ mf)
    return out


@dataclass(frozen=True)
class GaussianInput:
    """One positive-definite matrix per map, sized by the map's rank."""

    matrices: tuple[np.ndarray, ...]

    @staticmethod
    def identity(datum: HBLDatum) -> GaussianInput:
        return GaussianInput(tuple(np.eye(r) for r in datum.ranks))

    @staticmethod
    def random(datum: HBLDatum, rng: np.random.Generator, spread: float = 1.0) -> GaussianInput:
        mats = []
        for r in datum.ranks:
            w = rng.normal(scale=spread, size=(r, r))
            mats.append(w @ w.T + 0.1 * np.eye(r))
        return GaussianInput(tuple(mats))


def _check_gaussian(datum: HBLDatum, g: GaussianInput) -> None:
    if len(g.matrices) != datum.n_maps:
        raise ValueError("need one matrix per map")
    for a, r in zip(g.matrices, datum.ranks):
        if a.shape != (r, r):
            raise ValueError(f"matrix shape {a.shape} does not match rank {r}")
        if not np.allclose(a, a.T):
            raise ValueError("Gaussian input matrix is not symmetric")
        try:
            np.linalg.cholesky(a) if r else None
        except np.linalg.LinAlgError:
            raise ValueError("Gaussian input matrix is not positive definite") from None


def _log_ratio(datum: HBLDatum, forms: list[np.ndarray], mats) -> float:
    """log of (prod det(A_i)^tau_i / det(sum tau_i B_i^T A_i B_i))^(1/2)."""
    m = datum.dim
    total = np.zeros((m, m))
    acc = 0.0
    for tau, b, a in zip(datum.exponents, forms, mats):
        t = float(tau)
        if b.shape[0] == 0 or t == 0.0:
            if b.shape[0]:
                sign, logdet = np.linalg.slogdet(a)
                if sign <= 0:
                    raise ValueError("Gaussian input matrix is not positive definite")
            continue
        sign, logdet = np.linalg.slogdet(a)
        if sign <= 0:
            raise ValueError("Gaussian input matrix is not positive definite")
        acc += t * logdet
        total += t * (b.T @ a @ b)
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        return math.inf
    return 0.5 * (acc - logdet)


def gaussian_ratio(datum: HBLDatum, g: GaussianInput) -> float:
    """Ratio of the inequality's two sides at f_i(y) = exp(-pi y . A_i y).

    Both integrals are Gaussian, so the ratio collapses to
    (prod det(A_i)^tau_i / det(sum tau_i B_i^T A_i B_i))^(1/2) with B_i the
    orthonormally charted maps; +inf when the sum matrix is singular (the
    left side diverges).
    """
    _check_gaussian(datum, g)
    forms = orthonormal_forms(datum)
    lr = _log_ratio(datum, forms, g.matrices)
    return math.inf if lr == math.inf else math.exp(lr)


def _chol_factor(theta: np.ndarray) -> np.ndarray:
    """Lower-triangular factor with exponentiated diagonal: A = L L^T is
    positive definite for every parameter matrix."""
    l = np.tril(theta, k=-1)
    np.fill_diagonal(l, np.exp(np.diag(theta)))
    return l


def ascent_log_ratio(datum: HBLDatum, forms, params) -> float:
    """Log ratio at A_i = L_i L_i^T with L_i = _chol_factor(params_i).

    logdet A_i = 2 trace(diag params_i) exactly; returns -inf for
    numerically invalid points so a line search rejects them.
    """
    m = datum.dim
    acc = 0.0
    total = np.zeros((m, m))
    with np.errstate(over="ignore", invalid="ignore"):
        for tau, b, th in zip(datum.exponents, forms, params):
            t = float(tau)
            if b.shape[0] == 0 or t == 0.0:
                continue
            acc += 2.0 * t * float(np.sum(np.diag(th)))
            c = b.T @ _chol_factor(th)
            total += t * (c @ c.T)
    if not np.all(np.isfinite(total)):
        return -math.inf
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0 or not math.isfinite(logdet):
        return -math.inf
    return 0.5 * (acc - logdet)


def _ascent_gradients(datum: HBLDatum, forms, params):
    """Gradient of the log ratio w.r.t. the Cholesky parameters."""
    factors = [_chol_factor(th) for th in params]
    m = datum.dim
    total = np.zeros((m, m))
    for tau, b, l in zip(datum.exponents, forms, factors):
        if b.shape[0] and float(tau):
            c = b.T @ l
            total += float(tau) * (c @ c.T)
    total_inv = np.linalg.inv(total)
    grads = []
    for tau, b, l, th in zip(datum.exponents, forms, factors, params):
        t = float(tau)
        if b.shape[0] == 0 or t == 0.0:
            grads.append(np.zeros_like(th))
            continue
        g_a = -0.5 * t * (b @ total_inv @ b.T)  # d(-logdet(M)/2)/dA_i
        g_l = 2.0 * (g_a @ l)
        g_theta = np.tril(g_l, k=-1)
        # Diagonal: chain through L_ii = exp(theta_ii), plus the exact
        # tau * theta_ii term of the numerator.
        np.fill_diagonal(g_theta, np.diag(g_l) * np.diag(l) + t)
        grads.append(g_theta)
    return grads


def gaussian_ascent(datum: HBLDatum, iterations: int = 400, seed: int = 0, *,
                    divergence_threshold: float = 1e6) -> tuple[float, bool]:
    """Gradient ascent (L-BFGS with restarts) of the log Gaussian ratio.

    The matrices are parameterized as A_i = L_i L_i^T with log-parameterized
    diagonal, which keeps them positive definite without constraints.
    Returns (sup_estimate, diverged); diverged means the estimate exceeded
    the threshold. A heuristic probe only: unbounded ratios certify
    infeasibility, but a bounded run proves nothing.
    """
    import scipy.optimize

    rng = np.random.default_rng(seed)
    forms = orthonormal_forms(datum)
    sizes = [r * r for r in datum.ranks]
    x0 = np.concatenate(
        [(0.1 * rng.normal(size=(r, r))).ravel() for r in datum.ranks]
    ) if sum(sizes) else np.zeros(0)

    def unpack(x: np.ndarray) -> list[np.ndarray]:
        out, pos = [], 0
        for r, size in zip(datum.ranks, sizes):
            out.append(x[pos : pos + size].reshape(r, r))
            pos += size
        return out

    best = {"value": -math.inf}

    def objective(x: np.ndarray):
        th = unpack(x)
        lr = ascent_log_ratio(datum, forms, th)
        if not math.isfinite(lr):
            return math.inf, np.zeros_like(x)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                grads = _ascent_gradients(datum, forms, th)
            grad = np.concatenate([g.ravel() for g in grads]) if grads else np.zeros(0)
            if not np.all(np.isfinite(grad)):
                return math.inf, np.zeros_like(x)
        except np.linalg.LinAlgError:
            return math.inf, np.zeros_like(x)
        best["value"] = max(best["value"], lr)
        return -lr, -grad

    log_threshold = math.log(divergence_threshold)
    if x0.size:
        # The box keeps every evaluation finite; a diverging family reaches
        # e^30 along the boundary, far past any practical threshold. The
        # optimizer declares premature convergence on zero-measured
        # improvements, so restart it with fresh curvature memory until the
        # iterate stops moving or the budget runs out.
        x = x0
        budget = iterations
        while budget > 0 and best["value"] <= log_threshold:
            res = scipy.optimize.minimize(
                objective, x, jac=True, method="L-BFGS-B",
                bounds=[(-60.0, 60.0)] * x.size,
                options={"maxiter": budget, "maxfun": 8 * budget + 100,
                         "ftol": 0.0, "gtol": 1e-12},
            )
            budget -= max(res.nit, 1)
            if np.array_equal(res.x, x):
                break
            x = res.x
    else:
        best["value"] = ascent_log_ratio(datum, forms, [])
    sup = math.exp(min(best["value"], 700.0))
    return sup, best["value"] > log_threshold


@dataclass
class GridFunction:
    """Nonnegative samples on a regular cell grid over a box, m <= 3."""

    bounds: tuple[tuple[float, float], ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != len(self.bounds):
            raise ValueError("bounds and value axes disagree")
        if self.values.ndim > 3:
            raise ValueError("grids beyond three dimensions are unsupported")
        if np.any(self.values < 0):
            raise ValueError("grid values must be nonnegative")
        for lo, hi in self.bounds:
            if not hi > lo:
                raise ValueError("degenerate grid box")

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.values.shape

    def steps(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.values.shape))

    def cell_volume(self) -> float:
        return float(np.prod(self.steps()))

    def mass(self) -> float:
        return float(self.values.sum()) * self.cell_volume()

    def centers(self, axis: int) -> np.ndarray:
        lo, hi = self.bounds[axis]
        n = self.values.shape[axis]
        h = (hi - lo) / n
        return lo + h * (np.arange(n) + 0.5)


def write_grid_function(f: GridFunction) -> str:
    """Header "dims res... lo hi lo hi ...", then row-major values."""
    head = [str(f.dims)] + [str(n) for n in f.resolution]
    for lo, hi in f.bounds:
        head += [repr(float(lo)), repr(float(hi))]
    body = " ".join(repr(float(x)) for x in f.values.ravel())
    return " ".join(head) + "\n" + body + "\n"


def read_grid_function(text: str) -> GridFunction:
    lines = text.strip().split("\n", 1)
    head = lines[0].split()
    dims = int(head[0])
    res = tuple(int(x) for x in head[1 : 1 + dims])
    raw = [float(x) for x in head[1 + dims :]]
    if len(raw) != 2 * dims:
        raise ValueError("grid header has the wrong number of bounds")
    bounds = tuple((raw[2 * k], raw[2 * k + 1]) for k in range(dims))
    values = np.array([float(x) for x in lines[1].split()]) if len(lines) > 1 else np.array([])
    return GridFunction(bounds, values.reshape(res))


def _coordinate_axes(v: Subspace) -> tuple[int, ...]:
    """Axis set of a coordinate subspace; raises if V is not one."""
    axes = []
    for row in v.basis_rows():
        nonzero = [j for j, x in enumerate(row) if x != 0]
        if len(nonzero) != 1 or row[nonzero[0]] != 1:
            raise ValueError("vertex is not a coordinate subspace of the grid axes")
        axes.append(nonzero[0])
    return tuple(axes)


def grid_factorize(f: GridFunction, graph: GraphDecomposition,
                   phi: WeightFunction) -> tuple[list[GridFunction], float]:
    """Realize the edge-function factorization of f on the grid.

    Each vertex V gets the axis-summed marginal f_V, each edge the quotient
    f_V1 / f_V2 guarded on the support of f_V2. Verifies that line sums along
    each edge's new axis stay below 1 + 1e-12 and that
    f^tau = mass^tau * prod f_e^phi(e) on cells where f > 0; returns the edge
    functions and the worst relative factorization error.
    """
    if phi.width != 1:
        raise ValueError("factorization uses a scalar weight")
    if len(phi.values) != len(graph.edges):
        raise ValueError("weight does not match the edge list")
    if not phi.is_nonnegative() or not is_balanced(graph, phi):
        raise ValueError("weight must be balanced and nonnegative")
    if graph.ambient != f.dims:
        raise ValueError("graph ambient does not match grid dimension")
    axes = [_coordinate_axes(v) for v in graph.vertices]
    steps = f.steps()

    marginals = []
    for ax in axes:
        if ax:
            vol = float(np.prod([steps[a] for a in ax]))
            marginals.append(f.values.sum(axis=ax, keepdims=True) * vol)
        else:
            marginals.append(f.values)

    edge_arrays = []
    for k, (a, b) in enumerate(graph.edges):
        num, den = marginals[a], marginals[b]
        quotient = np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape),
                             where=den > 0)
        new_axis = (set(axes[b]) - set(axes[a])).pop()
        line = quotient.sum(axis=new_axis, keepdims=True) * steps[new_axis]
        if float(line.max(initial=0.0)) > 1 + 1e-12:
            raise AssertionError(f"edge {k} line sums exceed 1: {float(line.max())}")
        edge_arrays.append(quotient)

    tau = float(total_mass(graph, phi)[0])
    lhs = np.where(f.values > 0, f.values ** tau, 0.0)
    rhs = np.full_like(f.values, f.mass() ** tau if f.mass() > 0 else 0.0)
    for k in range(len(graph.edges)):
        w = float(phi.values[k][0])
        if w:
            rhs = rhs * np.where(edge_arrays[k] > 0, edge_arrays[k], 1.0) ** w
    support = f.values > 0
    if support.any():
        err = float(np.max(np.abs(rhs[support] - lhs[support]) / lhs[support]))
    else:
        err = 0.0
    edge_functions = [
        GridFunction(f.bounds, np.broadcast_to(arr, f.values.shape).copy())
        for arr in edge_arrays
    ]
    return edge_functions, err


def quadrature_check(datum: HBLDatum, c: float, fs, *,
                     box=None, resolution: int = 64) -> tuple[float, float, float]:
    """Tensor quadrature of both sides of the inequality on a box.

    lhs integrates prod f_i(pi_i x)^tau_i over the box by the midpoint rule;
    rhs is c times the product of the f_i masses raised to tau_i. Pullback
    values are looked up per cell, which is exact when the maps carry cell
    centers onto cell centers (coordinate-style maps over aligned grids).
    """
    m = datum.dim
    if m > 3:
        raise ValueError("quadrature beyond dimension 3 is unsupported")
    fs = list(fs)
    if len(fs) != datum.n_maps:
        raise ValueError("need one grid function per map")
    if box is None:
        los = [lo for g in fs for (lo, _) in g.bounds]
        his = [hi for g in fs for (_, hi) in g.bounds]
        box = tuple((min(los), max(his)) for _ in range(m))
    forms = []
    for mat in datum.maps:
        img = image(mat, Subspace.full(m))
        forms.append(_float_matrix(img.retraction() @ mat if not img.is_full() else mat))

    axes_centers = []
    for k in range(m):
        lo, hi = box[k]
        h = (hi - lo) / resolution
        axes_centers.append(lo + h * (np.arange(resolution) + 0.5))
    mesh = np.meshgrid(*axes_centers, indexing="ij")
    points = np.stack([mm.ravel() for mm in mesh])  # m x cells
    cell_vol = float(np.prod([(hi - lo) / resolution for lo, hi in box]))

    integrand = np.ones(points.shape[1])
    for tau, form, g in zip(datum.exponents, forms, fs):
        t = float(tau)
        if t == 0.0:
            continue
        if g.dims != form.shape[0]:
            raise ValueError("grid function dimension does not match map rank")
        y = form @ points  # rank x cells
        vals = np.zeros(points.shape[1])
        inside = np.ones(points.shape[1], dtype=bool)
        idx = []
        for a in range(g.dims):
            lo, hi = g.bounds[a]
            h = (hi - lo) / g.resolution[a]
            ia = np.floor((y[a] - lo) / h).astype(int)
            inside &= (ia >= 0) & (ia < g.resolution[a])
            idx.append(np.clip(ia, 0, g.resolution[a] - 1))
        vals[inside] = g.values[tuple(i[inside] for i in idx)]
        integrand = integrand * np.where(vals > 0, vals, 0.0) ** t

    lhs = float(integrand.sum()) * cell_vol
    rhs = float(c) * float(np.prod([g.mass() ** float(t) for g, t in zip(fs, datum.exponents)]))
    if rhs == 0.0:
        ratio = 0.0 if lhs == 0.0 else math.inf
    else:
        ratio = lhs / rhs
    return lhs, rhs, ratio
