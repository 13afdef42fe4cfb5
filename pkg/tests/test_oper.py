import numpy as np
import pytest
from scipy.integrate import quad

from jspectral import (
    GeometryError,
    LinOp,
    Space,
    Vec,
    adjoint,
    apply,
    apply_adjoint,
    compose,
    hardy,
    hardy_dual,
    identity,
    kernel_op,
    pairing,
    power,
)
from jspectral.space import Functional


def test_hardy_integrates_constants_exactly():
    sp = Space.uniform(128, 2.0)
    T = hardy(sp, sp)
    out = apply(T, Vec(np.ones(128), sp))
    assert np.max(np.abs(out.coeffs - sp.nodes)) <= 1e-14


def test_hardy_on_cosine_matches_closed_form():
    sp = Space.uniform(1024, 2.0)
    T = hardy(sp, sp)
    for n in (1, 3):
        f = Vec(np.cos(n * np.pi * sp.nodes), sp)
        got = apply(T, f).coeffs
        want = np.sin(n * np.pi * sp.nodes) / (n * np.pi)
        # composite midpoint is second order
        assert np.max(np.abs(got - want)) <= 0.5 * (n * np.pi / 1024) ** 2


def test_hardy_last_row_is_integral_up_to_last_node():
    sp = Space.uniform(64, 2.0)
    T = hardy(sp, sp)
    f = np.exp(sp.nodes)
    oracle = quad(np.exp, 0, sp.nodes[-1])[0]
    assert (T.matrix @ f)[-1] == pytest.approx(oracle, rel=1e-4)


def test_hardy_requires_common_interval():
    a = Space.uniform(32, 2.0, b=1.0)
    b = Space.uniform(32, 2.0, b=2.0)
    with pytest.raises(GeometryError):
        hardy(a, b)


def test_kernel_op_with_unit_kernel_is_hardy():
    sp = Space.uniform(64, 2.0)
    K = kernel_op(sp, sp, lambda x, y: 1.0)
    H = hardy(sp, sp)
    assert np.max(np.abs(K.matrix - H.matrix)) == 0.0


def test_kernel_op_zero_kernel():
    sp = Space.uniform(32, 2.0)
    K = kernel_op(sp, sp, lambda x, y: 0.0)
    assert np.all(K.matrix == 0.0)


def test_kernel_op_rejects_nonfinite():
    sp = Space.uniform(32, 2.0)
    with pytest.raises(GeometryError):
        kernel_op(sp, sp, lambda x, y: np.full(np.broadcast(x, y).shape, np.inf))


def test_second_antiderivative_kernel_matches_double_hardy():
    # k(x, y) = x - y realizes the second antiderivative, i.e. hardy squared
    sp = Space.uniform(512, 2.0)
    K = kernel_op(sp, sp, lambda x, y: x - y)
    H2 = compose(hardy(sp, sp), hardy(sp, sp))
    for m in (0, 1, 2):
        f = sp.nodes ** m
        exact = sp.nodes ** (m + 2) / ((m + 1) * (m + 2))
        for M in (K.matrix, H2.matrix):
            assert np.max(np.abs(M @ f - exact)) <= 5.0 / 512 ** 2


def test_adjoint_of_hardy_is_dual_hardy():
    sp = Space.uniform(64, 2.0)
    T = hardy(sp, sp)
    Td = hardy_dual(sp, sp)
    assert np.max(np.abs(adjoint(T).matrix - Td.matrix)) <= 1e-15


def test_adjoint_of_identity():
    sp = Space.uniform(16, 3.0)
    I = identity(sp)
    assert np.allclose(adjoint(I).matrix, np.eye(16))


def test_adjoint_pairing_identity_random():
    rng = np.random.default_rng(3)
    dom = Space.uniform(40, 3.0)
    cod = Space.uniform(40, 2.0)
    T = LinOp(rng.standard_normal((40, 40)), dom, cod)
    Ts = adjoint(T)
    assert np.max(np.abs(adjoint(Ts).matrix - T.matrix)) <= 1e-12
    for _ in range(10):
        v = Vec(rng.standard_normal(40), dom)
        f = Functional(rng.standard_normal(40), cod)
        lhs = pairing(apply(T, v), f)
        rhs = pairing(v, apply_adjoint(T, f))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_compose_identity_and_power_rules():
    sp = Space.uniform(32, 2.0)
    rng = np.random.default_rng(5)
    T = LinOp(rng.standard_normal((32, 32)) / 32, sp, sp)
    assert np.allclose(compose(identity(sp), T).matrix, T.matrix)
    assert np.allclose(power(T, 1).matrix, T.matrix)
    assert np.allclose(power(T, 3).matrix, compose(T, power(T, 2)).matrix,
                       atol=1e-13)
    A = LinOp(rng.standard_normal((32, 32)), sp, sp)
    B = LinOp(rng.standard_normal((32, 32)), sp, sp)
    C = LinOp(rng.standard_normal((32, 32)), sp, sp)
    left = compose(compose(A, B), C).matrix
    right = compose(A, compose(B, C)).matrix
    assert np.max(np.abs(left - right)) <= 1e-10 * np.max(np.abs(left))


def test_power_of_hardy_gives_second_antiderivative():
    sp = Space.uniform(512, 2.0)
    T = power(hardy(sp, sp), 2)
    out = apply(T, Vec(np.ones(512), sp)).coeffs
    assert np.max(np.abs(out - sp.nodes ** 2 / 2)) <= 2.0 / 512 ** 2


def test_space_mismatch_raises():
    a = Space.uniform(16, 2.0)
    b = Space.uniform(24, 2.0)
    T = hardy(a, a)
    S = hardy(b, b)
    with pytest.raises(GeometryError):
        compose(T, S)
    with pytest.raises(GeometryError):
        apply(T, Vec(np.zeros(24), b))


def test_quadrature_order_on_polynomials():
    # halving h shrinks the hardy error on degree-2 polynomials about 4x
    errs = []
    for n in (128, 256):
        sp = Space.uniform(n, 2.0)
        T = hardy(sp, sp)
        f = sp.nodes ** 2
        exact = sp.nodes ** 3 / 3
        errs.append(np.max(np.abs(T.matrix @ f - exact)))
    assert errs[1] <= errs[0] / 3.0


def test_csv_json_roundtrip():
    sp = Space.uniform(8, 2.0)
    T = hardy(sp, sp)
    T2 = LinOp.from_csv(T.to_csv(), sp, sp)
    assert np.array_equal(T2.matrix, T.matrix)
    assert "matrix" in T.to_json()
