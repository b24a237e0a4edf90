from fractions import Fraction as F

import pytest

from transseries.diffpoly import DiffPolynomial
from transseries.transbasis import Transbasis
from transseries.zerotest import extend


def make_xex():
    """The basis (x, e^x) with its top tower node."""
    b = Transbasis.initial(0)
    b, _, _ = b.extended_with_exp({(F(-1),): F(1)}, name="exp(x)", phi_str="x")
    return b, b.top_node()


def atoms(node):
    x = node.from_monomial((F(-1), F(0)))
    ex = node.from_monomial((F(0), F(-1)))
    return x, ex


def lambert_p(node):
    """The quasi-linear polynomial whose distinguished solution U feeds the
    Lambert-W verification, over (x, e^x)."""
    x, ex = atoms(node)
    xinv = x.inverse()
    emx = ex.inverse()
    em2x = node.from_monomial((F(0), F(2)))
    return DiffPolynomial(
        node,
        {
            (): (x - 1) * em2x,
            (0, 1): xinv - emx + emx * xinv,
            (1,): 1 - x * emx,
            (1, 1): xinv,
            (2,): 1,
        },
        deriv_index=1,
    )


@pytest.fixture(scope="session")
def xex():
    return make_xex()


@pytest.fixture(scope="session")
def xex_node(xex):
    return xex[1]


@pytest.fixture(scope="session")
def P7(xex_node):
    return lambert_p(xex_node)


@pytest.fixture(scope="session")
def u_node(xex_node, P7):
    return extend(xex_node, P7, name="U")


@pytest.fixture(scope="session")
def omega(u_node):
    x, ex = atoms(u_node.parent)
    U = u_node.generator()
    coeff = u_node.lift(ex) * (U + u_node.lift(x.inverse()) * U.derive())
    return DiffPolynomial(
        u_node,
        {(): coeff, (1,): coeff, (0, 1): u_node.lift(-x.inverse())},
        deriv_index=1,
    )


@pytest.fixture(scope="session")
def v_node(u_node, omega):
    return extend(u_node, omega, name="V")


@pytest.fixture(scope="session")
def lambert_Q(u_node):
    x, ex = atoms(u_node.parent)
    U = u_node.generator()
    IQ = U + 1 - u_node.lift(x * ex.inverse())
    return DiffPolynomial(u_node, {(): IQ - 1, (1,): IQ}, deriv_index=1)
