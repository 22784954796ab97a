"""Smoke test for the matrixopt Python bindings.

Build and install the extension first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml --release

then run ``python python/smoke_test.py``.
"""

import math
import os
import sys
import tempfile

import matrixopt


def check(cond, what):
    if not cond:
        sys.exit(f"FAIL: {what}")
    print(f"ok   {what}")


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def main():
    check("newton-admm" in matrixopt.methods(), "method list")
    check("t8" in matrixopt.generators() and "t9" in matrixopt.tables(), "generator and table lists")

    # 2x2 Sylvester problem solved two ways
    p = matrixopt.SylvesterProblem([[4.0, 1.0], [0.0, 3.0]], [[2.0, 0.5], [0.0, 1.0]], [[1.0, 2.0], [3.0, 4.0]])
    direct = p.solve("direct")
    check(direct.converged and p.residual(direct.solution) < 1e-12, "direct Sylvester solve")
    bfgs = p.solve("bfgs", tol=1e-12, linesearch="wolfe")
    gap = max(abs(x - y) for rx, ry in zip(bfgs.solution, direct.solution) for x, y in zip(rx, ry))
    check(bfgs.converged and gap < 1e-8, f"BFGS agrees with direct (gap {gap:.1e})")
    check(bfgs.config["linesearch"] == "wolfe", "keyword settings reach the solver")

    # hand-check AX + XB = C
    x = direct.solution
    lhs = [[u + v for u, v in zip(r1, r2)] for r1, r2 in zip(matmul(p.a, x), matmul(x, p.b))]
    check(all(math.isclose(u, v, abs_tol=1e-12) for r1, r2 in zip(lhs, p.c) for u, v in zip(r1, r2)), "solution satisfies the equation")

    # Riccati family through ADMM and Newton-ADMM
    care = matrixopt.CareProblem.generate("t8", 16)
    admm = care.solve("admm", alpha=0.91, beta=2.8, gamma=0.0014)
    check(admm.converged and admm.final_residual <= 1e-8, f"ADMM on t8(16): {admm.iterations} iterations")
    na = care.solve("newton-admm", alpha=0.8, beta=50.0)
    check(na.converged and "outer_iterations" in na.detail, f"Newton-ADMM on t8(16): {na.iterations} inner iterations")
    report = na.to_dict()
    check(set(report) >= {"method", "iterations", "final_residual", "termination", "detail", "solution"}, "report dict keys")

    # scalar Lyapunov equation -4x + 3 = 0
    lyap = matrixopt.LyapunovProblem([[-2.0]], [[3.0]])
    check(abs(lyap.solve().solution[0][0] - 0.75) < 1e-14, "scalar Lyapunov solve")

    # MatrixMarket round trip
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "x.mtx")
        matrixopt.write_matrix_market(path, direct.solution)
        check(matrixopt.read_matrix_market(path) == direct.solution, "MatrixMarket round trip")

    rows = matrixopt.bench("t3", cap=10)
    check(len(rows) == 1 and rows[0]["termination"] == "converged", "bench on t3")

    for bad, exc in [(lambda: p.solve("nosuch"), ValueError), (lambda: p.solve("ccom", speed=3), ValueError)]:
        try:
            bad()
        except exc:
            print(f"ok   {exc.__name__} raised")
        else:
            sys.exit(f"FAIL: expected {exc.__name__}")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
