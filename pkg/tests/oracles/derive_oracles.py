"""Independent oracles for values frozen into the test suite.

Run ``python tests/oracles/derive_oracles.py`` to regenerate.  Nothing
here imports the package: every value comes from sympy (exact symbolic
polar integration) or mpmath (high-precision quadrature).
"""

import mpmath as mp
import sympy as sp

mp.mp.dps = 30
t, phi, delta, x1, x2 = sp.symbols("t phi delta x1 x2", real=True)
lam, mu = sp.symbols("lam mu", positive=True)
rho = 3 / (2 * sp.pi * delta**3 * t)
s1, s2 = t * sp.cos(phi), t * sp.sin(phi)


def ball(expr):
    """Integral of ``expr(s) rho(|s|)`` over the disk of radius delta."""
    inner = sp.integrate(sp.expand(expr * rho * t), (t, 0, delta))
    return sp.simplify(sp.integrate(sp.expand(sp.expand_trig(inner)), (phi, 0, 2 * sp.pi)))


def moments():
    m = ball(s1**2 + s2**2)
    m4 = [[ball(s1**4 / t**2), ball(s1**2 * s2**2 / t**2)], [None, ball(s2**4 / t**2)]]
    m6 = ball((s1**2 + s2**2) ** 2) / m
    return m, m4, sp.simplify(m6)


def shift(u1, u2):
    """``L_delta u - L_0 u`` for a polynomial field, symbolic in x and delta."""
    m = ball(s1**2 + s2**2)
    d = 2
    c_alpha, c_beta = 16, 2
    sub = {x1: x1 + s1, x2: x2 + s2}
    du1 = sp.expand(u1.subs(sub, simultaneous=True) - u1)
    du2 = sp.expand(u2.subs(sub, simultaneous=True) - u2)
    proj = (du1 * sp.cos(phi) + du2 * sp.sin(phi))
    bond = [ball(proj * sp.cos(phi)), ball(proj * sp.sin(phi))]
    theta = sp.expand(ball(du1 * s1 + du2 * s2))
    dth = sp.expand(theta.subs(sub, simultaneous=True) - theta)
    grad = [ball(dth * s1), ball(dth * s2)]
    nonlocal_ = [c_alpha * mu / m * b + c_beta * d * (lam - mu) / m**2 * g for b, g in zip(bond, grad)]
    div = sp.diff(u1, x1) + sp.diff(u2, x2)
    local = [
        mu * (sp.diff(u1, x1, 2) + sp.diff(u1, x2, 2)) + (mu + lam) * sp.diff(div, x1),
        mu * (sp.diff(u2, x1, 2) + sp.diff(u2, x2, 2)) + (mu + lam) * sp.diff(div, x2),
    ]
    return [sp.simplify(sp.expand(a - b)) for a, b in zip(nonlocal_, local)], nonlocal_


def scalars(r):
    """Continuous scalar symbols of the unit inverse-distance profile."""
    c = 3 / (2 * mp.pi)

    def integrand(kind):
        def f(tt, ph):
            arg = r * tt * mp.sin(ph)
            base = c  # rho(t) * t with rho = c / t
            if kind == "p":
                return base * (1 - mp.cos(arg)) * mp.cos(ph) ** 2
            if kind == "q":
                return base * (1 - mp.cos(arg)) * mp.sin(ph) ** 2
            return base * mp.sin(arg) * tt * mp.sin(ph)

        return f

    out = []
    for kind in "pqb":
        f = integrand(kind)
        out.append(mp.quad(lambda tt: mp.quad(lambda ph: f(tt, ph), [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi]), mp.linspace(0, 1, 9)))
    return out


def spline_norm():
    x = sp.symbols("x", nonnegative=True)
    # cubic B-spline with support [-2, 2] and value 2/3 at 0
    inner = sp.Rational(2, 3) - x**2 + x**3 / 2
    outer = (2 - x) ** 3 / 6
    return 2 * (sp.integrate(inner**2, (x, 0, 1)) + sp.integrate(outer**2, (x, 1, 2)))


if __name__ == "__main__":
    m, m4, m6 = moments()
    print("m =", m, " M4 =", m4[0][0], m4[0][1], m4[1][1], " M6 =", m6)
    E, nu = sp.Integer(1), sp.Rational(2, 5)
    print("lam =", E * nu / ((1 + nu) * (1 - 2 * nu)), " mu =", E / (2 * (1 + nu)))
    u1 = x1**2 * (1 - x1) ** 2 + x2**2 * (1 - x2) ** 2
    diff, full = shift(u1, sp.Integer(0))
    print("manufactured shift =", diff)
    val = [sp.nsimplify(sp.expand(v.subs({x1: sp.Rational(3, 10), x2: sp.Rational(7, 10), delta: sp.Rational(1, 5)})))
           for v in full]
    print("L_delta u at (0.3, 0.7), delta=0.2 =", val)
    print("spline self-integral / h =", spline_norm())
    for r in (0.3, 1.0, 2.5, 7.0):
        print(f"scalars({r}) =", [mp.nstr(v, 20) for v in scalars(mp.mpf(r))])
    for x in (0.5, 5.0, 30.0, 100.0):
        print(f"int_0^{x} J0 =", mp.nstr(mp.quad(mp.besselj0 if hasattr(mp, 'besselj0') else (lambda s: mp.besselj(0, s)), mp.linspace(0, x, 40)), 20))
