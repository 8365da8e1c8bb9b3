"""Smoke test for the pyhrkit extension module.

Build and install first, e.g.

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyhrkit-*.whl
"""

import json

import numpy as np

import pyhrkit as h


def unit(n, i, j):
    m = [[0j] * n for _ in range(n)]
    m[i][j] = 1 + 0j
    return m


def close(a, b, tol=1e-10):
    return np.max(np.abs(np.array(a) - np.array(b))) <= tol


def corner_state():
    a = h.Subalgebra([2], [unit(2, 0, 0), unit(2, 1, 1), unit(2, 0, 1)])
    assert a.dim == 3 and a.validate().passed
    phi = h.ScalarCharacter(a, [1, 0, 0])
    for engine in (h.scalar_extend_l2, h.scalar_extend_reflexive):
        s = engine(a, phi)
        assert close(s.density, unit(2, 0, 0)), s.density
        assert s.check().passed and s.check_extension(a, phi).passed
    dim_e, dim_f, bound, dist = h.scalar_extend_l2(a, phi).construction
    assert (dim_e, dim_f) == (1, 0) and dist >= bound - 1e-8


def pinching():
    a = h.Subalgebra([2], [unit(2, 0, 0), unit(2, 1, 1), unit(2, 0, 1)])
    d = h.Subalgebra([2], [unit(2, 0, 0), unit(2, 1, 1)], selfadjoint=True)
    phi = h.DCharacter(a, d, [unit(2, 0, 0), unit(2, 1, 1), [[0, 0], [0, 0]]])
    psi = h.d_character_extend(a, phi, seed=0)
    assert psi.check(d).passed
    x = np.array([[1, 2], [3, 4]], dtype=complex)
    assert close(psi(x.tolist()), np.diag(np.diag(x)))
    again = h.ExpectationRecipe.from_json(psi.to_json())
    assert close(again(x.tolist()), psi(x.tolist()), 0.0)


def wedderburn():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    elems = []
    for i in range(2):
        for j in range(2):
            elems.append(q @ np.array(unit(3, i, j)) @ q.conj().T)
    elems.append(q @ np.array(unit(3, 2, 2)) @ q.conj().T)
    d = h.Subalgebra([3], [e.tolist() for e in elems], selfadjoint=True)
    sizes, units = h.matrix_units(d, seed=1)
    assert sorted(sizes) == [1, 2], sizes


def feasibility():
    no = h.example1([0, 0.25, 0.5, 0.75])
    assert no.verdict == "infeasible"
    a = np.array([[0.25] * 4, [0, 0.0625, 0.125, 0.1875]])
    y = np.array(no.farkas)
    assert np.all(a.T @ y >= -1e-10) and np.array([1, 1]) @ y <= -1e-6
    yes = h.example1([0, 0.5, 1])
    assert yes.verdict == "feasible"
    out, masses = h.prop25([0, 0.5, 1])
    assert out.verdict == "feasible" and abs(sum(masses) - 1) < 1e-12
    assert h.prop25([0, 0.5])[0].verdict == "infeasible"


def transpose_not_cp():
    images = [np.array(unit(2, i, j)).T.tolist() for i in range(2) for j in range(2)]
    choi = h.choi_of_map(images, 2)
    ours = h.eigvalsh(choi)
    theirs = np.linalg.eigvalsh(np.array(choi))
    assert close(ours, theirs, 1e-12) and abs(ours[0] + 1) < 1e-10


def errors():
    try:
        a = h.Subalgebra([2], [[[1, 0], [0, 1]], unit(2, 0, 1), unit(2, 1, 0)])
        h.scalar_extend_l2(a, h.ScalarCharacter(a, [1, 0, 0]))
    except ValueError as e:
        assert "closure" in str(e) or "multiplicativity" in str(e), e
    else:
        raise AssertionError("non-closed span accepted")


def cli():
    code, out, _ = h.run_cli(["--format", "machine", "counterexample", "example1", "--points", "0,0.25,0.5,0.75"])
    assert code == 3
    doc = json.loads(out)
    assert doc["format_version"] == h.FORMAT_VERSION
    code, _, _ = h.run_cli(["demo"], seed="4")
    assert code == 0
    assert h.run_cli(["demo"], seed="x")[0] == 2


if __name__ == "__main__":
    for test in (corner_state, pinching, wedderburn, feasibility, transpose_not_cp, errors, cli):
        test()
        print(f"ok  {test.__name__}")
    print("smoke test passed")
