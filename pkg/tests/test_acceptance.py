"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured values;
the lines are also collected and repeated in the terminal summary.  Run
``python tests/test_acceptance.py`` to get just the eleven lines.
"""
import time

import numpy as np
import pytest

from conftest import rand_herm, rand_unitary
from mfd import io
from mfd.cli import main as cli_main
from mfd.dense import dagger, expih_batch, opnorm
from mfd.diag1d import diagonalize_cycle, diagonalize_path
from mfd.disk2d import (
    diagonalize_complex2,
    extend_triangle,
    fill_anchor_residual,
    fill_boundary_exact,
    snap_vertex_homomorphism,
)
from mfd.domain import s3
from mfd.field import Monomial, evaluate_hom
from mfd.generators import boundary_loop, crossing, interval_random, monopole, sphere_random, winding
from mfd.homotopy import basic_homotopy
from mfd.obstruction import TENSION_NOTE, band_chern_numbers, chern_number, degree3, gen_example, s3_points

RESULTS = []


def record(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_interval_diagonalization():
    fld = interval_random(128, 4, seed=7)
    L = fld.generators[0].lipschitz_hint
    t0 = time.perf_counter()
    fr = diagonalize_path(fld, eps=np.inf)
    elapsed = time.perf_counter() - t0
    res = fr.meta["report"].max
    bound = 2 * L / 128 + 1e-8
    P = fr.projections()  # (V, n, n, n)
    sum_err = opnorm(P.sum(axis=1) - np.eye(4)).max()
    prod = np.einsum("viab,vjbc->vijac", P, P)
    want = np.einsum("ij,viac->vijac", np.eye(4), P)
    orth_err = np.abs(prod - want).max()
    ok = L <= 1 and res <= bound and sum_err <= 1e-9 and orth_err <= 1e-9 and elapsed < 1.0
    record(1, "interval diagonalization", ok,
           f"L={L:.3f} residual={res:.2e} <= {bound:.2e}, projection errors "
           f"{sum_err:.1e}/{orth_err:.1e}, {elapsed:.2f}s")


def test_02_eigenvalue_crossing():
    fr = diagonalize_path(crossing(128), eta=0.05, eps=0.06)
    res = fr.meta["report"].max
    record(2, "eigenvalue crossing", res <= 0.06, f"residual={res:.2e} <= 0.06")


def test_03_winding_cycle():
    fr = diagonalize_cycle(winding(256), eps=0.05)
    res = fr.meta["report"].max
    w = fr.meta["windings"]
    ok = res <= 0.05 and w[0] == 1
    record(3, "winding, unbraided cycle", ok, f"residual={res:.2e}, label windings={w}")


def test_04_covering_obstruction(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cli_main(["gen", "--kind", "braid", "--m", "256"])
    code = cli_main(["diag", "--report", "r.txt"])
    cert = io.load("r.txt")["obstructions"][0]
    ok = (
        code == 2
        and cert.kind == "monodromy"
        and cert.value == [1, 0]
        and "(1 2)" in cert.verdict
        and cert.details["det_winding"] == 1
        and cert.tension_flag
        and TENSION_NOTE in cert.verdict
    )
    record(4, "covering obstruction", ok,
           f"exit={code}, perm={cert.value}, det_winding={cert.details['det_winding']}, "
           f"tension_flag={cert.tension_flag}")


def test_05_basic_homotopy():
    fld = interval_random(64, 3, seed=5)
    fr = diagonalize_path(fld, eps=np.inf)
    K = rand_herm(np.random.default_rng(11), 3)
    K /= np.linalg.norm(K, 2)
    eye = np.broadcast_to(np.eye(3), (65, 3, 3))
    ok = True
    maxes = []
    for delta in (1e-3, 1e-2, 5e-2):
        u = expih_batch(np.broadcast_to(K, (65, 3, 3)), delta)
        p = basic_homotopy(fr, u)
        ok &= np.array_equal(p.U[0], u) and np.array_equal(p.U[-1], eye)
        for eps_meas in (p.max_commutator, 2.5 * p.defect, 4 * p.defect):
            if p.defect < eps_meas / 2:
                ok &= p.log_norm <= 2 * np.arcsin(eps_meas / 4)
        maxes.append(p.max_commutator)
    ok &= all(a <= b for a, b in zip(maxes, maxes[1:]))
    record(5, "basic homotopy", bool(ok),
           "exact endpoints, log-norm bound holds, path commutators "
           + ", ".join(f"{m:.2e}" for m in maxes))


def test_06_triangle_extension():
    worst = 0.0
    exact = True
    for seed in range(5):
        data = boundary_loop(seed, 0.02)
        fill = extend_triangle(data)
        exact &= fill_boundary_exact(fill, data)
        worst = max(worst, fill_anchor_residual(fill, data.base))
    record(6, "triangle extension", exact and worst <= 0.08,
           f"boundary bit-exact={exact}, interior residual={worst:.3f} <= 0.08")


def test_07_sphere_convergence():
    res = []
    for k in (0, 1, 2):
        fld = sphere_random(k, 3, seed=0)
        t0 = time.perf_counter()
        fr = diagonalize_complex2(fld, eps=0.1, strict=False)
        elapsed = time.perf_counter() - t0
        res.append(fr.meta["report"].max)
    L = fld.generators[0].lipschitz_hint
    ratios = [res[1] / res[0], res[2] / res[1]]
    ok = L <= 1 and res[2] <= 0.1 and max(ratios) <= 0.7 and elapsed < 10
    record(7, "2-D convergence", ok,
           "residuals " + ", ".join(f"{r:.4f}" for r in res)
           + f", ratios {ratios[0]:.2f}/{ratios[1]:.2f}, k=2 in {elapsed:.2f}s")


def test_08_chern_certificate():
    fld = monopole(2)
    a = fld.generators[0].samples
    tri = fld.domain.triangles
    _, V = np.linalg.eigh(a)
    lower = chern_number(V[:, :, [0]], tri)
    const = chern_number(np.broadcast_to(np.diag([1.0, 0.0]).astype(complex), a.shape), tri)
    total = sum(band_chern_numbers(a, tri))
    record(8, "Chern certificate", lower == -1 and const == 0 and total == 0,
           f"lower band={lower}, constant={const}, band sum={total}")


def test_09_degree_certificate():
    dom = s3(2)
    d_u = degree3(gen_example("s3_unitary", dom))
    d_r = degree3(gen_example("s3_unitary", dom, reflect=True))
    d_i = degree3(np.broadcast_to(np.eye(2, dtype=complex), (dom.n_vertices, 2, 2)), dom)
    # reassemble a unitary from continuous diagonal frames and labels
    rng = np.random.default_rng(9)
    x = dom.coords
    Ks = np.array([0.3 * rand_herm(rng, 2) for _ in range(4)])
    F = expih_batch(np.einsum("vk,kab->vab", x, Ks)) @ rand_unitary(rng, 2)
    phi = 0.8 * x[:, 0] - 0.5 * x[:, 2]
    lab = np.stack([np.exp(1j * phi), np.exp(-1j * phi)], axis=1)
    d_f = degree3((F * lab[:, None, :]) @ dagger(F), dom)
    ok = (d_u, d_i, d_r, d_f) == (1, 0, -1, 0)
    record(9, "degree certificate", ok, f"s3_unitary={d_u}, identity={d_i}, reflected={d_r}, reassembled={d_f}")


def test_10_count1_pipeline(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cli_main(["gen", "--kind", "count1-b", "--k", "2"])
    code = cli_main(["diag", "--report", "r.txt"])
    certs = io.load("r.txt")["obstructions"]
    fld = io.load("field.json")
    z, _ = s3_points(fld.domain)
    u = fld.generators[1].samples
    ident = np.abs(u + dagger(u) - 2 * z.real[:, None, None] * np.eye(2)).max()
    where = {}
    for c in certs:
        if c.kind == "chern":
            key = tuple(float(v) for v in np.round(fld.domain.coords[c.details["vertex"]], 6) + 0.0)
            where[key] = c.value
    ok = (
        code == 2
        and sorted(where.values()) == [-1, 1]
        and set(where) == {(1.0, 0.0, 0.0, 0.0), (-1.0, 0.0, 0.0, 0.0)}
        and ident <= 1e-12
    )
    record(10, "Count1 pipeline", ok, f"exit={code}, link Chern numbers {where}, identity error={ident:.1e}")


def test_11_snapping():
    rng = np.random.default_rng(2024)
    ok = True
    parts = []
    for delta in (1e-4, 1e-3, 1e-2):
        V = rand_unitary(rng, 5)
        lab = rng.normal(size=(2, 5)) + 1j * rng.normal(size=(2, 5))
        X = np.array([(V * l) @ dagger(V) for l in lab])
        E = rng.normal(size=X.shape) + 1j * rng.normal(size=X.shape)
        E *= delta / np.linalg.norm(E, 2, axis=(1, 2))[:, None, None]
        d = snap_vertex_homomorphism(X + E)
        A, B = d.matrix(0), d.matrix(1)
        comm = np.linalg.norm(A @ B - B @ A, 2)
        dist = max(np.linalg.norm(A - X[0] - E[0], 2), np.linalg.norm(B - X[1] - E[1], 2))
        z0, c0, z1 = Monomial(0, 1, 0), Monomial(0, 0, 1), Monomial(1, 1, 0)
        lab_d = d.joint_labels
        both = (d.frame * (lab_d[:, 0] * lab_d[:, 1])) @ dagger(d.frame)
        mult = max(
            np.abs(evaluate_hom(d, Monomial(0, 1, 1)) - evaluate_hom(d, z0) @ evaluate_hom(d, c0)).max(),
            np.abs(evaluate_hom(d, Monomial(0, 2, 0)) - evaluate_hom(d, z0) @ evaluate_hom(d, z0)).max(),
            np.abs(both - evaluate_hom(d, z0) @ evaluate_hom(d, z1)).max(),
        )
        ok &= comm <= 1e-12 and dist <= 10 * delta and mult <= 1e-10
        parts.append(f"d={delta:.0e}: dist/d={dist / delta:.2f}, comm={comm:.0e}, mult={mult:.0e}")
    record(11, "snapping", bool(ok), "; ".join(parts))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
