#!/usr/bin/env python3
"""Smoke test for the escapedim_py extension module.

Build and stage the module first:

    cargo build --release -p escapedim-py
    cp target/release/libescapedim_py.so python/escapedim_py.so

then run:  python3 python/smoke_test.py
"""
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import escapedim_py as ed


def approx(a, b, tol):
    return abs(a - b) <= tol


def main():
    # elliptic core: critical value structure of the square lattice
    ell = ed.Elliptic(1)
    e1, e2, e3 = ell.critical_values()
    assert abs(e2) < 1e-10, f"e2 = {e2}"
    assert abs(e1 + e3) < 1e-10
    assert approx(e1.real, 0.696601964842838, 1e-10)

    # periodicity and evenness of wp
    z = 0.3 + 0.4j
    assert abs(ell.wp(z + math.pi) - ell.wp(z)) < 1e-11
    assert abs(ell.wp(-z) - ell.wp(z)) < 1e-12

    # G interpolates its critical values
    assert abs(ell.g(0)) < 1e-12
    assert abs(ell.g(math.pi / 2 + 0.5j * math.pi) - 1) < 1e-9

    # poles of H in one period cell
    ph = ell.poles_of_h(0.0, math.pi, 0.0, math.pi)
    assert len(ph) == 4
    assert all(m == 1 for (_, m, _) in ph)

    # dimension formula values
    assert approx(ed.theoretical_bound(1, 1.0), 2.0 / 3.0, 1e-15)
    assert approx(ed.theoretical_bound(2, 2.0), 4.0 / 3.0, 1e-15)
    assert approx(ed.critical_point_x(1), math.cosh(math.pi / 2), 1e-12)

    # synthetic atlas: |a_j| = j, |b_j| = 1, M = 1 has t* = 1/2
    recs = []
    for j in range(1, 1 << 13):
        th = (2.399963 * j) % (2 * math.pi) - math.pi
        recs.append((j * complex(math.cos(th), math.sin(th)), 1, 1 + 0j))
    atlas = ed.atlas_from_records(1, float(1 << 13), recs)
    est = atlas.critical_exponent(rho=1.0)
    assert abs(est["t_star"] - 0.5) <= 0.05, est
    assert approx(est["theoretical"], 2.0 / 3.0, 1e-12)

    # comb and conformal map: the uniform comb gives g = cos(a z + b)
    comb = ed.Comb.uniform(2048)
    mp = ed.Map(comb, eval_radius=50.0, target_accuracy=1e-6, max_solved=512)
    z = 0.7 - 0.9j
    g = mp.g(z)
    gp = mp.g_prime(z)
    a2 = gp * gp / (1 - g * g)
    resid = abs(gp * gp + a2 * g * g - a2)
    assert resid < 1e-6, resid
    assert mp.accuracy < 1e-6

    # sector comb pipeline at small scale: poles of F(g) and the estimate
    ell2 = ed.Elliptic(1)
    comb = ed.Comb.sector(0.5)
    mp = ed.Map(comb, eval_radius=2e3, target_accuracy=1e-5, max_solved=1024)
    atlas = ed.compose_poles(mp, ell2, 2e3)
    assert len(atlas) > 100
    est = atlas.critical_exponent(rho=1.0, min_blocks=6)
    assert abs(est["t_star"] - 2.0 / 3.0) < 0.08, est

    print("escapedim_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
