import math
from fractions import Fraction

import numpy as np
import pytest

from hblcert.data import HBLDatum
from hblcert.fixtures import (
    ALL_FIXTURES,
    fourmap_r6_datum,
    fourmap_r6_presentation,
    loomis_whitney_datum,
    loomis_whitney_presentation,
)
from hblcert.flowgraph import WeightFunction
from hblcert.linalg import Matrix
from hblcert.oracle import (
    GaussianInput,
    GridFunction,
    ascent_log_ratio,
    gaussian_ascent,
    gaussian_ratio,
    grid_factorize,
    orthonormal_forms,
    quadrature_check,
    read_grid_function,
    write_grid_function,
)
from hblcert.oracle import _ascent_gradients
from hblcert.presentation import bound_constant


def test_gaussian_ratio_loomis_whitney_identity():
    datum = loomis_whitney_datum(2)
    assert gaussian_ratio(datum, GaussianInput.identity(datum)) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_ratio_diverges_on_degenerate_sum():
    # A single rank-one map cannot control R^2, so the sum matrix is singular.
    datum = HBLDatum(2, (Matrix.from_rows([[1, 0]], cols=2),), ("x",), (Fraction(1),))
    assert gaussian_ratio(datum, GaussianInput.identity(datum)) == math.inf


def test_gaussian_ratio_r6_identity_below_the_bound():
    datum, pres = fourmap_r6_datum(), fourmap_r6_presentation()
    cert = bound_constant(datum, pres)
    ratio = gaussian_ratio(datum, GaussianInput.identity(datum))
    assert ratio <= cert.value * (1 + 1e-9)


def test_gaussian_ratio_rejects_bad_matrices():
    datum = loomis_whitney_datum(2)
    mats = [np.eye(2) for _ in range(3)]
    mats[0] = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(ValueError, match="positive definite"):
        gaussian_ratio(datum, GaussianInput(tuple(mats)))
    mats[0] = np.array([[1.0, 0.5], [0.0, 1.0]])  # not symmetric
    with pytest.raises(ValueError, match="symmetric"):
        gaussian_ratio(datum, GaussianInput(tuple(mats)))


def two_dim_test_datum():
    """x1, x2 and x1+x2 with exponents 2/3: a coupled planar system."""
    maps = (
        Matrix.from_rows([[1, 0]], cols=2),
        Matrix.from_rows([[0, 1]], cols=2),
        Matrix.from_rows([[1, 1]], cols=2),
    )
    t = Fraction(2, 3)
    return HBLDatum(2, maps, ("x", "y", "diag"), (t, t, t))


def _direct_gaussian_quadrature(datum, mats, half_width=8.0, resolution=600):
    """Midpoint quadrature of both sides of the inequality at Gaussian inputs."""
    forms = orthonormal_forms(datum)
    h = 2 * half_width / resolution
    centers = -half_width + h * (np.arange(resolution) + 0.5)
    mesh = np.meshgrid(*([centers] * datum.dim), indexing="ij")
    points = np.stack([mm.ravel() for mm in mesh])
    integrand = np.ones(points.shape[1])
    rhs = 1.0
    for tau, form, a in zip(datum.exponents, forms, mats):
        t = float(tau)
        y = form @ points
        quad_form = np.einsum("ij,jk,ik->k", a, y, y) if y.shape[0] else 0.0
        integrand = integrand * np.exp(-math.pi * t * quad_form)
        r = a.shape[0]
        if r == 0:
            continue
        ycent = np.meshgrid(*([centers] * r), indexing="ij")
        ypts = np.stack([mm.ravel() for mm in ycent])
        mass = float(np.exp(-math.pi * np.einsum("ij,jk,ik->k", a, ypts, ypts)).sum()) * h**r
        rhs *= mass**t
    lhs = float(integrand.sum()) * h**datum.dim
    return lhs / rhs


def test_gaussian_ratio_matches_direct_quadrature():
    datum = two_dim_test_datum()
    rng = np.random.default_rng(5)
    for _ in range(3):
        g = GaussianInput.random(datum, rng, spread=0.6)
        expected = _direct_gaussian_quadrature(datum, g.matrices)
        assert gaussian_ratio(datum, g) == pytest.approx(expected, rel=1e-4)


def test_gaussian_ratio_matches_direct_quadrature_dim1():
    datum = HBLDatum(1, (Matrix.identity(1), Matrix.identity(1)), ("a", "b"),
                     (Fraction(1, 2), Fraction(1, 2)))
    g = GaussianInput((np.array([[2.0]]), np.array([[0.5]])))
    expected = _direct_gaussian_quadrature(datum, g.matrices, half_width=10.0)
    assert gaussian_ratio(datum, g) == pytest.approx(expected, rel=1e-4)


def test_ascent_gradient_matches_finite_differences():
    rng = np.random.default_rng(12)
    for datum in (loomis_whitney_datum(2), two_dim_test_datum(), fourmap_r6_datum()):
        forms = orthonormal_forms(datum)
        params = [0.3 * rng.normal(size=(r, r)) for r in datum.ranks]
        grads = _ascent_gradients(datum, forms, params)
        eps = 1e-6
        for i, p in enumerate(params):
            for a in range(p.shape[0]):
                for b in range(p.shape[1]):
                    plus = [q.copy() for q in params]
                    minus = [q.copy() for q in params]
                    plus[i][a, b] += eps
                    minus[i][a, b] -= eps
                    fd = (ascent_log_ratio(datum, forms, plus)
                          - ascent_log_ratio(datum, forms, minus)) / (2 * eps)
                    scale = max(1.0, abs(fd))
                    assert abs(fd - grads[i][a, b]) / scale < 1e-5


def test_ascent_bounded_case_reaches_the_sharp_value():
    sup, diverged = gaussian_ascent(loomis_whitney_datum(2), iterations=400, seed=0)
    assert not diverged
    assert sup == pytest.approx(1.0, abs=1e-6)


def test_ascent_detects_the_dimension_violation():
    datum = loomis_whitney_datum(2, [Fraction(3, 4), Fraction(3, 4), 0])
    sup, diverged = gaussian_ascent(datum, iterations=400, seed=0)
    assert diverged and sup > 1e6


def test_ascent_detects_scaling_failure_by_dilation():
    datum = loomis_whitney_datum(2, [1, 1, 1])
    sup, diverged = gaussian_ascent(datum, iterations=400, seed=0)
    assert diverged and sup > 1e6


def step_function(rng, shape, block=4, lo=0.0, hi=2.0):
    blocks = rng.uniform(lo, hi, size=tuple(s // block for s in shape))
    values = blocks
    for axis in range(len(shape)):
        values = values.repeat(block, axis)
    return values


def test_grid_factorize_reconstructs_step_functions():
    rng = np.random.default_rng(3)
    graph = loomis_whitney_presentation(2).graph
    values = step_function(rng, (16, 16, 16), block=4, lo=0.1, hi=2.0)
    f = GridFunction(((0.0, 1.0),) * 3, values)
    phi = WeightFunction.scalar([1, 1, 1])
    edge_functions, err = grid_factorize(f, graph, phi)
    assert err < 1e-9
    assert len(edge_functions) == 3
    for g in edge_functions:
        assert g.values.shape == (16, 16, 16)


def test_grid_factorize_constant_function_has_unit_line_sums():
    graph = loomis_whitney_presentation(2).graph
    f = GridFunction(((0.0, 1.0),) * 3, np.full((8, 8, 8), 3.0))
    phi = WeightFunction.scalar([1, 1, 1])
    edge_functions, err = grid_factorize(f, graph, phi)
    assert err < 1e-12
    steps = f.steps()
    for k, (a, b) in enumerate(graph.edges):
        new_axis = k  # chain adds axes in order
        sums = edge_functions[k].values.sum(axis=new_axis) * steps[new_axis]
        # Constant edge functions integrate to exactly one along the new axis.
        assert np.allclose(sums, 1.0, atol=1e-12)


def test_grid_factorize_half_support():
    rng = np.random.default_rng(9)
    graph = loomis_whitney_presentation(2).graph
    values = step_function(rng, (16, 16, 16), block=4, lo=0.5, hi=2.0)
    values[8:] = 0.0
    f = GridFunction(((0.0, 1.0),) * 3, values)
    phi = WeightFunction.scalar([Fraction(1, 2)] * 3)
    _, err = grid_factorize(f, graph, phi)
    assert err < 1e-9


def test_grid_factorize_rejects_bad_inputs():
    from hblcert.flowgraph import GraphDecomposition
    from hblcert.linalg import Subspace, span

    diag = span([[1, 1]], 2)
    tilted = GraphDecomposition.build(
        2, [Subspace.zero(2), diag, Subspace.full(2)],
        [(Subspace.zero(2), diag), (diag, Subspace.full(2))],
    )
    f2 = GridFunction(((0.0, 1.0), (0.0, 1.0)), np.ones((4, 4)))
    with pytest.raises(ValueError, match="coordinate subspace"):
        grid_factorize(f2, tilted, WeightFunction.scalar([1, 1]))

    graph = loomis_whitney_presentation(2).graph
    f3 = GridFunction(((0.0, 1.0),) * 3, np.ones((4, 4, 4)))
    unbalanced = WeightFunction.scalar([Fraction(1, 2), 1, 1])
    with pytest.raises(ValueError, match="balanced"):
        grid_factorize(f3, graph, unbalanced)


def test_quadrature_unit_cube_is_sharp():
    datum = loomis_whitney_datum(2)
    cube = GridFunction(((0.0, 1.0), (0.0, 1.0)), np.ones((64, 64)))
    lhs, rhs, ratio = quadrature_check(datum, 1.0, [cube] * 3,
                                       box=((0.0, 1.0),) * 3, resolution=64)
    assert lhs == pytest.approx(1.0, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-12)
    assert ratio == pytest.approx(1.0, abs=1e-12)


def test_quadrature_random_steps_stay_dominated():
    rng = np.random.default_rng(17)
    datum = loomis_whitney_datum(2)
    for _ in range(10):
        fs = [GridFunction(((0.0, 1.0), (0.0, 1.0)),
                           step_function(rng, (32, 32), block=8, hi=1.5))
              for _ in range(3)]
        _, _, ratio = quadrature_check(datum, 1.0, fs,
                                       box=((0.0, 1.0),) * 3, resolution=32)
        assert ratio <= 1 + 1e-6


def test_quadrature_zero_function_reports_zero_ratio():
    datum = loomis_whitney_datum(2)
    zero = GridFunction(((0.0, 1.0), (0.0, 1.0)), np.zeros((8, 8)))
    lhs, rhs, ratio = quadrature_check(datum, 1.0, [zero] * 3,
                                       box=((0.0, 1.0),) * 3, resolution=8)
    assert (lhs, rhs, ratio) == (0.0, 0.0, 0.0)


def test_grid_function_file_round_trip():
    rng = np.random.default_rng(2)
    f = GridFunction(((0.0, 1.0), (-1.0, 3.0)), rng.uniform(size=(4, 6)))
    text = write_grid_function(f)
    g = read_grid_function(text)
    assert g.bounds == f.bounds
    assert np.array_equal(g.values, f.values)
    assert write_grid_function(g) == text


def test_gaussian_domination_for_all_fixtures():
    rng = np.random.default_rng(0)
    for name, (make_datum, make_pres) in ALL_FIXTURES.items():
        datum, pres = make_datum(), make_pres()
        cert = bound_constant(datum, pres)
        for _ in range(30):
            ratio = gaussian_ratio(datum, GaussianInput.random(datum, rng))
            assert ratio <= cert.value * (1 + 1e-9), name
