"""Smoke test for the diracjm extension module.

Build and install first, e.g. `maturin build --release -m crates/py/Cargo.toml`
followed by `pip install target/wheels/diracjm-*.whl`.
"""

import cmath

import diracjm


def main():
    free = diracjm.Solver(1.0, diracjm.Potential(), scale=1.0, size=20)
    r = free.solve(1.7)
    assert abs(r.t - 1) < 1e-10 and abs(r.r) < 1e-10, r

    barrier = diracjm.Potential(v=diracjm.Profile("gaussian", height=2.0))
    assert barrier.parity == "even"
    solver = diracjm.Solver(1.0, barrier, scale=1.5, size=30)
    energies = [1.1 + 0.2 * i for i in range(10)]
    results = solver.sweep(energies)
    assert [round(x.energy, 12) for x in results] == [round(e, 12) for e in energies]
    for x in results:
        assert x.unitarity_defect < 1e-8, x
        t_oracle, _ = diracjm.oracle(barrier, 1.0, x.energy)
        assert abs(x.t - t_oracle) < 1e-5, (x, t_oracle)

    shifted = diracjm.Potential(v=diracjm.Profile("gaussian", height=2.0, center=0.5))
    coupled = diracjm.Solver(1.0, shifted, scale=1.5, size=30).solve(2.0)
    assert coupled.path == "coupled" and coupled.coupling > 0
    assert abs(coupled.transmission + coupled.reflection - 1) < 1e-6
    assert abs(cmath.phase(coupled.w_plus)) <= cmath.pi

    csv = diracjm.run_config("basis.N = 10\nenergy.steps = 3\n")
    rows = [line for line in csv.splitlines() if not line.startswith("#")]
    assert rows[0].startswith("energy,k,re_T") and len(rows) == 4

    try:
        diracjm.Solver(1.0, barrier, size=1)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid basis size accepted")

    print("diracjm smoke test passed")


if __name__ == "__main__":
    main()
