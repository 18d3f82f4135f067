"""Smoke test for the `mde` extension module.

Build it first, e.g. `pip install --no-build-isolation -e crates/python`,
then run `python python/smoke_test.py`.
"""

import math
import os
import sys
import tempfile

import mde


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    two = mde.RegressionData([[1.0], [1.0]], [1.0, 3.0])
    res = mde.fit(two)
    check(res.estimate == [2.0] and res.loss == 0.0 and res.converged, "two-point fixture")

    data = mde.simulate(40, 3, beta=[1.0, -1.5, 2.0], seed=7)
    check((data.n, data.p, len(data.x), len(data.y)) == (40, 3, 40, 40), "simulate shape")
    again = mde.simulate(40, 3, beta=[1.0, -1.5, 2.0], seed=7)
    check(data.x == again.x and data.y == again.y, "simulate is seeded")

    res = mde.fit(data)
    check(res.converged and len(res.estimate) == 3, f"fit converges: {res!r}")
    check(all(abs(a - b) < 1.0 for a, b in zip(res.estimate, [1.0, -1.5, 2.0])), "estimate near truth")
    check(all(b <= a + 1e-9 * (1 + abs(a)) for a, b in zip(res.loss_trace, res.loss_trace[1:])), "loss trace descends")
    check(math.isclose(mde.loss(data, res.estimate), res.loss, rel_tol=1e-9), "loss matches fit")

    small = mde.simulate(8, 2, seed=3)
    b = [0.3, -0.7]
    closed = mde.loss(small, b)
    integral = mde.loss_by_integration(small, b)
    check(math.isclose(closed, integral, rel_tol=1e-8), "closed form equals integral")
    for l in range(small.p):
        z = mde.coordinate_update(small, b, l)
        zb, _ = mde.brute_force_coordinate_min(small, b, l)
        check(z == zb, f"coordinate {l} update equals brute force")

    nm = mde.nelder_mead_fit(data, init=res.estimate)
    check(nm.loss <= res.loss + 1e-9, "nelder-mead does not increase the loss from the fit")

    weights = [[1.0] * data.p for _ in range(data.n)]
    check(mde.fit(data, weights=weights, init="zeros").converged, "explicit weights")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "sim.csv")
        data.to_csv(path)
        back = mde.RegressionData.from_csv(path, "y")
        check(back.x == data.x and back.y == data.y, "csv round trip")

    try:
        mde.RegressionData([[1.0, 2.0], [3.0]], [1.0, 2.0])
    except mde.MdeError:
        check(True, "ragged rows rejected")
    else:
        check(False, "ragged rows rejected")
    try:
        mde.loss(small, [1.0])
    except ValueError:
        check(True, "wrong-length b rejected")
    else:
        check(False, "wrong-length b rejected")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
