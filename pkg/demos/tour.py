"""Library tour: the same pipeline as demos/lambert_w.ts, driven through the
Python API.  Run with  python3 demos/tour.py
"""

from fractions import Fraction as F

from transseries import (
    DiffPolynomial,
    Trace,
    Transbasis,
    extend,
    render_element,
    zero_test,
)


def show(label, stream, order, render=render_element):
    terms = ", ".join(
        f"{render(c)} @ e^-{e}x" for e, c in stream.terms_upto(F(order))
    )
    print(f"{label}: {terms}")


def main():
    # the transbasis (x, e^x): exponent vectors are (a, b) for x^-a e^-bx
    basis = Transbasis.initial(0)
    basis, _, _ = basis.extended_with_exp({(F(-1),): F(1)}, name="exp(x)", phi_str="x")
    node = basis.top_node()
    x = node.from_monomial((F(-1), F(0)))
    ex = node.from_monomial((F(0), F(-1)))

    # a quasi-linear equation P(f) = 0, f < 1
    P = DiffPolynomial(
        node,
        {
            (): (x - 1) * ex.inverse() ** 2,
            (0, 1): x.inverse() - ex.inverse() + ex.inverse() * x.inverse(),
            (1,): 1 - x * ex.inverse(),
            (1, 1): x.inverse(),
            (2,): 1,
        },
    )
    print("quasi-linear:", P.is_quasilinear(), "| dominant part:", P.dominant())

    # adjoin the distinguished solution U; the extension node carries the
    # zero test for all differential-rational expressions in U
    unode = extend(node, P, name="U")
    U = unode.generator()
    show("U", unode.solution_stream(), 4)

    # a second equation over the U-extension and its solution V
    coeff = unode.lift(ex) * (U + unode.lift(x.inverse()) * U.derive())
    omega = DiffPolynomial(
        unode, {(): coeff, (1,): coeff, (0, 1): unode.lift(-x.inverse())}
    )
    vnode = extend(unode, omega, name="V")
    show("V", vnode.solution_stream(), 4)

    # decide that (U + 1 - x e^-x)(1 + V) - 1 vanishes identically
    IQ = U + 1 - unode.lift(x * ex.inverse())
    Q = DiffPolynomial(unode, {(): IQ - 1, (1,): IQ})
    trace = Trace()
    verdict = zero_test(vnode.context(), [Q], trace)
    print("zero test:", verdict)
    print(trace.render())


if __name__ == "__main__":
    main()
