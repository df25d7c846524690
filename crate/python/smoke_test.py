"""Smoke test for the ilspbs Python bindings.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import math

import ilspbs


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    pr = ilspbs.IlsProblem.example1()
    assert pr.dims == (3, 4, 3), pr.dims
    assert pr.hessian_is_spd()

    s = ilspbs.analyze(pr)
    assert close(s["mu_max"], 0.4976, 5e-4), s
    assert close(s["alpha_opt"], 1.1704, 1e-4), s
    # the root modulus is square-root sensitive to mu at the double root
    assert close(ilspbs.predicted_rho(pr, s["alpha_opt"]), s["rho_opt"], 1e-3)

    res = ilspbs.pbs_iterate(pr, "opt")
    assert res.converged and res.iterations == 24, res
    x_ref = pr.reference_solution()
    err = math.sqrt(sum((a - b) ** 2 for a, b in zip(res.x, x_ref)))
    assert err <= 1e-9 * math.sqrt(sum(v * v for v in x_ref))

    sweep = ilspbs.alpha_sweep(pr, [0.7, 1.0, 1.8])
    assert [it for _, it, _ in sweep] == [48, 36, 53], sweep

    for prec in ("pbs", "bs1", "bs2", "bs3"):
        g = ilspbs.gmres(pr, prec=prec, restart=10)
        assert g.converged and g.rel_residual <= 1e-11, (prec, g)

    a1 = ilspbs.SparseMatrix.from_dense([[4.0, 1.0], [0.0, 3.0], [1.0, 0.0]])
    a2 = ilspbs.SparseMatrix.from_triplets(1, 2, [(0, 0, 0.5)])
    custom = ilspbs.IlsProblem(a1, a2, [1.0, 2.0, 3.0], [1.0])
    assert ilspbs.gmres(custom, prec="pbs", alpha="opt").converged

    rows = ilspbs.bench(ilspbs.IlsProblem.pde(6))
    assert [r["method"] for r in rows] == ["PBS", "BS1", "BS2", "BS3", "No-Prec"], rows
    assert all(r["converged"] for r in rows[:4])

    try:
        ilspbs.IlsProblem(a1, a2, [1.0], [1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("dimension mismatch not reported")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
