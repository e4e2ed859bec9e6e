"""Smoke test for the annealfem_py extension module.

Build and install first, e.g. `maturin develop --release -m crates/python/Cargo.toml`.
"""

import annealfem_py as af


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    # u'' = 0 on (0, 1), two elements
    s = af.element_vectors(0.0, 1.0, 1.0, 2)
    assert s == [[1.0, 1.0, -2.0, 0.0, 0.0]] * 2, s
    assert close(af.oracle(s, 0.0, 1.0), [0.0, 0.5, 1.0])

    j = af.element_coupling(s[0], [0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
    assert close(sum(j, []), [0.125, 0.375, 0.375, 0.375, 0.5, 0.375, 0.375, 0.375, 0.125], 1e-12), j

    g = af.assemble(s, [[0.0, 0.5, 1.0]] * 3, dirichlet=[(0, 0), (2, 2)])
    spins, energy = af.solve_exact(g)
    state, feasible = af.decode(spins, [[0.0, 0.5, 1.0]] * 3)
    assert feasible and close(state, [0.0, 0.5, 1.0]), (state, spins)
    assert abs(g.energy(spins) - energy) < 1e-12

    reads = af.solve_sa(g, sweeps=500, reads=10, seed=3)
    assert abs(reads[0][1] - energy) < 1e-9
    assert reads == af.solve_sa(g, sweeps=500, reads=10, seed=3)

    again = af.IsingGraph.from_edge_list(g.to_edge_list())
    assert again.fields == g.fields and again.couplings == g.couplings

    # bar with a stiffness jump
    truss = af.truss_vectors([1.0, 1.0, 0.5, 0.5], [0.0] * 4)
    exact = af.oracle(truss, 0.0, 1.0)
    run = af.run_box(truss, 0.0, 1.0, r_init=0.2, r_min=1e-4, init_center=[0.0, 0.25, 0.5, 0.75, 1.0])
    assert run["converged"]
    err = max(abs(a - b) for a, b in zip(run["center"], exact))
    assert err <= 2e-4, err
    energies = [h["energy_after"] for h in run["history"]]
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    dist = sum((a - b) ** 2 for a, b in zip(run["center"], exact)) ** 0.5
    assert dist <= run["bound"]
    assert abs(af.error_bound(truss, run["slack"]) - run["bound"]) < 1e-15

    try:
        af.element_vectors(1.0, 0.0, 1.0, 2)
    except ValueError as e:
        assert "x_l" in str(e)
    else:
        raise AssertionError("reversed interval accepted")

    print(f"ok: truss max nodal error {err:.3e} after {len(run['history'])} steps")


if __name__ == "__main__":
    main()
