"""Reference values frozen into the unit tests, computed independently of the C++ code."""
import mpmath as mp
import sympy as sp
from scipy.special import lpmv

mp.mp.dps = 30


def recursion(nu):
    s, z = sp.symbols("s z")
    p = sp.Integer(1)
    for n in range(1, nu + 1):
        p = sp.expand((1 - s**2) * sp.diff(p, s) + (z - n * s) * p)
    return sp.Poly(p, s, z)


def seed(x):
    ax = abs(x)
    if ax <= 1:
        return mp.mpf(1)
    if ax >= 2:
        return mp.mpf(0)
    a = mp.e ** (-1 / (2 - ax))
    b = mp.e ** (-1 / (ax - 1))
    return a / (a + b)


def phi(x):
    return seed(x) - seed(2 * x)


def phi_j(j, lam):
    return phi(lam * mp.mpf(2) ** (-j))


def free_profile(j, r):
    # (1/2pi) int phi_j(k^2) e^{ikr} dk over k in +-[2^{(j-1)/2}, 2^{(j+1)/2}]
    lo, hi = mp.mpf(2) ** ((j - 1) / mp.mpf(2)), mp.mpf(2) ** ((j + 1) / mp.mpf(2))
    pts = mp.linspace(lo, hi, 9)
    return mp.quad(lambda k: phi_j(j, k * k) * mp.cos(k * r), pts) / mp.pi


def lowpass_diag_nu1(j):
    # (1/2pi) int Phi_j(k^2) k^2/(1+k^2) dk
    hi = mp.mpf(2) ** ((j + 1) / mp.mpf(2))
    pts = mp.linspace(0, hi, 9)
    return mp.quad(lambda k: seed(k * k * mp.mpf(2) ** (-j)) * k * k / (1 + k * k), pts) / mp.pi


def free_weighted_l2(j, alpha):
    # Plancherel: ||k_j||^2 = (1/pi) int g^2, ||r k_j||^2 = (1/pi) int g'^2, g = phi_j(k^2)
    lo, hi = mp.mpf(2) ** ((j - 1) / mp.mpf(2)), mp.mpf(2) ** ((j + 1) / mp.mpf(2))
    pts = mp.linspace(lo, hi, 65)
    a0 = mp.quad(lambda k: phi_j(j, k * k) ** 2, pts) / mp.pi
    if alpha == 0:
        return mp.sqrt(a0)
    a1 = mp.quad(lambda k: mp.diff(lambda t: phi_j(j, t * t), k) ** 2, pts) / mp.pi
    return mp.sqrt(a0 + mp.mpf(2) ** j * a1)


def chi_c1():
    # sup |phi| + sup |phi'| on [1/2, 2]
    xs = mp.linspace(mp.mpf(1) / 2, 2, 4001)
    v = max(abs(phi(x)) for x in xs)
    d = max(abs(mp.diff(phi, x)) for x in xs if x not in (1, mp.mpf(1) / 2, 2))
    return v, d


if __name__ == "__main__":
    for nu in (3, 4):
        print(f"p_{nu} terms:", recursion(nu).terms())
    for l, m, x in [(3, 1, 0.3), (3, 2, -0.7), (4, 3, 0.55), (2, 2, 0.9)]:
        print(f"P_{l}^{m}({x}) =", repr(lpmv(m, l, x)))
    for j, r in [(0, 0.0), (0, 1.0), (0, 3.0), (4, 0.5), (-4, 2.0)]:
        print(f"free_profile(j={j}, r={r}) =", mp.nstr(free_profile(j, r), 17))
    for j in (0, 2):
        print(f"lowpass_diag_nu1(j={j}) =", mp.nstr(lowpass_diag_nu1(j), 17))
    for j in (-2, 0, 2):
        for alpha in (0, 1):
            print(f"free_weighted_l2(j={j}, alpha={alpha}) =", mp.nstr(free_weighted_l2(j, alpha), 17))
    v, d = chi_c1()
    print("sup chi =", mp.nstr(v, 12), " sup chi' =", mp.nstr(d, 12))
