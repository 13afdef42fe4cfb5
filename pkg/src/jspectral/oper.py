"""Linear operators between discretized L_p spaces.

Matrices act on coefficient vectors; adjoints are taken with respect to the
weighted pairings, A* = W_dom^-1 A^T W_cod, so the adjoint pairing identity
is enforced algebraically rather than approximated.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .space import Functional, GeometryError, Space, Vec, _readonly


class LinOp:
    """Dense operator: matrix (rows = codomain dim, cols = domain dim)."""

    __slots__ = ("matrix", "dom", "cod")

    def __init__(self, matrix, dom: Space, cod: Space):
        matrix = _readonly(matrix)
        if matrix.shape != (cod.dim, dom.dim):
            raise GeometryError("matrix shape does not match the spaces")
        if not np.all(np.isfinite(matrix)):
            raise GeometryError("operator matrix has non-finite entries")
        self.matrix = matrix
        self.dom = dom
        self.cod = cod

    def apply_coeffs(self, coeffs):
        return self.matrix @ coeffs

    def apply_adjoint_coeffs(self, coeffs):
        """Coefficients of T* phi for functional coefficients phi on cod."""
        return (self.matrix.T @ (self.cod.weights * coeffs)) / self.dom.weights

    def __repr__(self):
        return f"LinOp({self.dom!r} -> {self.cod!r})"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf)
        for row in self.matrix:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {"matrix": self.matrix.tolist(),
             "dom": json.loads(self.dom.to_json()),
             "cod": json.loads(self.cod.to_json())},
            sort_keys=True,
        )

    @classmethod
    def from_csv(cls, text, dom, cod):
        rows = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row]
        return cls(np.asarray(rows), dom, cod)


def apply(T: LinOp, v: Vec) -> Vec:
    if not v.space.same_grid(T.dom):
        raise GeometryError("vector does not live on the operator domain grid")
    return Vec(T.apply_coeffs(v.coeffs), T.cod)


def adjoint(T: LinOp) -> LinOp:
    """Adjoint with respect to the weighted pairings; maps cod* to dom*."""
    A = (T.matrix.T * T.cod.weights[None, :]) / T.dom.weights[:, None]
    return LinOp(A, T.cod.dual(), T.dom.dual())


def apply_adjoint(T: LinOp, f: Functional) -> Functional:
    if not f.space.same_grid(T.cod):
        raise GeometryError("functional does not live on the operator codomain grid")
    return Functional(T.apply_adjoint_coeffs(f.coeffs), T.dom)


def compose(B: LinOp, A: LinOp) -> LinOp:
    """B after A."""
    if not A.cod.same_grid(B.dom):
        raise GeometryError("compose needs cod(A) and dom(B) on the same grid")
    return LinOp(B.matrix @ A.matrix, A.dom, B.cod)


def power(T: LinOp, k: int) -> LinOp:
    if not T.dom.same_grid(T.cod):
        raise GeometryError("powers need a square operator (same grid)")
    if k < 1:
        raise GeometryError("power requires k >= 1")
    M = np.linalg.matrix_power(T.matrix, k)
    return LinOp(M, T.dom, T.cod)


def identity(dom: Space, cod: Space | None = None) -> LinOp:
    """Identity embedding; cod may carry a different exponent on the same grid."""
    cod = dom if cod is None else cod
    if not dom.same_grid(cod):
        raise GeometryError("identity embedding needs a common grid")
    return LinOp(np.eye(dom.dim), dom, cod)


def scale(T: LinOp, c: float) -> LinOp:
    return LinOp(c * T.matrix, T.dom, T.cod)


def _require_common_grid(dom, cod):
    if not dom.same_grid(cod):
        raise GeometryError("Volterra constructors need dom and cod on one grid")
    if dom.b != cod.b:
        raise GeometryError("interval lengths differ")


def hardy(dom: Space, cod: Space) -> LinOp:
    """Hardy operator (Hf)(x) = integral_0^x f(t) dt.

    Lower-triangular weight accumulation with the half-cell at the diagonal:
    row i sums w_j for j < i plus w_i / 2, which is exact for cellwise
    constants and second order for smooth integrands.
    """
    _require_common_grid(dom, cod)
    w = dom.weights
    A = np.tril(np.tile(w, (dom.dim, 1)), -1) + np.diag(w / 2.0)
    return LinOp(A, dom, cod)


def hardy_dual(dom: Space, cod: Space) -> LinOp:
    """Companion operator (H*f)(x) = integral_x^b f(t) dt."""
    _require_common_grid(dom, cod)
    w = dom.weights
    A = np.triu(np.tile(w, (dom.dim, 1)), 1) + np.diag(w / 2.0)
    return LinOp(A, dom, cod)


def kernel_op(dom: Space, cod: Space, k) -> LinOp:
    """Volterra operator (Tf)(x) = integral_0^x k(x, y) f(y) dy.

    k must be vectorized over numpy arrays; k = 1 reproduces hardy.
    """
    _require_common_grid(dom, cod)
    x = cod.nodes[:, None]
    y = dom.nodes[None, :]
    K = np.asarray(k(x, y), dtype=float)
    K = np.broadcast_to(K, (cod.dim, dom.dim)).copy()
    if not np.all(np.isfinite(K)):
        raise GeometryError("kernel produced non-finite values")
    mask = np.tril(np.ones((cod.dim, dom.dim)), -1) + np.eye(cod.dim) * 0.5
    return LinOp(K * mask * dom.weights[None, :], dom, cod)
