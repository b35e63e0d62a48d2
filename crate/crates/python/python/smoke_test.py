"""Smoke test for the frolov extension module.

    maturin develop --release   # from crates/python
    python python/smoke_test.py
"""

import math

import frolov


def main():
    roots = frolov.chebyshev_roots(4)
    assert all(a > b for a, b in zip(roots, roots[1:]))
    assert abs(roots[0] - 2 * math.cos(math.pi / 8)) < 1e-15

    sys4 = frolov.ChebyshevSystem(4)
    assert sys4.admissible and sys4.dim == 4
    assert sys4.gram_residual() < 1e-12
    assert sys4.reduction == [[1, 0, -2, 0], [0, 1, 0, -3], [0, 0, 1, 0], [0, 0, 0, 1]]
    assert not frolov.ChebyshevSystem(3).admissible

    stats = sys4.count_nodes(1024)
    assert (stats.cube_points, stats.ellipsoid_points) == (1025, 5061)

    nodes = frolov.ChebyshevSystem(2).enumerate_nodes(64)
    assert len(nodes) == 65 and nodes.stats.ellipsoid_points == 101
    assert all(abs(v) <= 0.5 for x in nodes.nodes() for v in x)
    assert nodes[-1] == nodes.nodes()[-1]

    sys2 = frolov.ChebyshevSystem(2)
    r = sys2.integrate(64, "const")
    assert r.value == 65 / 64 and r.error == 1 / 64

    bump = lambda x: math.prod(0.25 - v * v for v in x) if all(abs(v) <= 0.5 for v in x) else 0.0
    mine = sys2.integrate(4096, bump, exact=1 / 36)
    builtin = sys2.integrate(4096, "quadbump")
    assert abs(mine.value - builtin.value) < 1e-15, (mine, builtin)

    try:
        sys2.integrate(64, lambda x: 1 / 0)
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("callable exception was swallowed")

    try:
        frolov.ChebyshevSystem(1)
    except ValueError:
        pass
    else:
        raise AssertionError("d = 1 accepted")

    assert frolov.ellipsoid_count(2.0, 5.0, [1.0, 1.0]) == 81
    lo, hi = frolov.ellipsoid_bounds(2.0, 5.0, [1.0, 1.0])
    assert lo <= 81 <= hi
    assert frolov.ellipsoid_count(2.0, 0.0, [1.0, 1.0]) == 1
    limit, cap, factor = frolov.overhead_limit(2)
    assert abs(limit - math.pi / 2) < 1e-12 and factor < 2.07
    print("smoke test passed")


if __name__ == "__main__":
    main()
