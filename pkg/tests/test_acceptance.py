"""Acceptance suite.

One test per acceptance criterion, each printing a single
``ACCEPTANCE Cn: PASS/FAIL`` line (run pytest with ``-s`` to see them
live).  The heavy sweep fixtures are shared module-wide; everything runs on
whichever kernel backend is active.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from hodgebench import (SimplicialMesh, SweepConfig, assemble_rhs,
                        assemble_system, build_complex, build_preconditioner,
                        build_structured_mesh, check_exactness, emit_table,
                        mass_matrix, minres_solve, poincare_constant,
                        run_sweep, spectral_report)

from helpers import random_simplex, whitney_mass_oracle

ALPHAS = (1e-4, 1e-2, 1.0, 1e2, 1e4)
ORACLE_LEVELS = {2: (2, 4, 8), 3: (1, 2)}
KAPPA_LEVEL = {2: 4, 3: 2}
_timings = {}


@contextmanager
def criterion(cid):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {cid}: FAIL")
        raise
    else:
        print(f"\nACCEPTANCE {cid}: PASS")


@pytest.fixture(scope="module")
def sweeps():
    out = {}
    for dim in (2, 3):
        t0 = time.perf_counter()
        out[dim] = run_sweep(SweepConfig(dim=dim, record_timing=False))
        _timings[dim] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def oracle_data():
    complexes = {}
    reports = {}
    for dim, levels in ORACLE_LEVELS.items():
        for level in levels:
            cx = build_complex(build_structured_mesh(dim, level))
            complexes[(dim, level)] = cx
            for k in range(1, dim + 1):
                assert cx.num_dofs(k) + cx.num_dofs(k - 1) <= 2000
                for alpha in ALPHAS:
                    reports[(dim, level, k, alpha)] = spectral_report(
                        cx, k, alpha)
    return complexes, reports


def test_c1_iteration_count_robustness(sweeps):
    """Sweep counts stay small and flat across five levels and nine decades
    of alpha in both dimensions."""
    with criterion("C1 (iteration-count robustness)"):
        for dim, degrees in ((2, (1, 2)), (3, (1, 2, 3))):
            rows = sweeps[dim].rows
            assert not sweeps[dim].any_failed
            levels = {r.h for r in rows}
            assert len(levels) == 5
            for k in degrees:
                counts = [r.iterations for r in rows if r.k == k]
                assert len(counts) == 5 * len(ALPHAS)
                assert max(counts) <= 10, (dim, k, max(counts))
                assert max(counts) / min(counts) <= 3.0, (dim, k, counts)
        total = _timings[2] + _timings[3]
        assert total < 600.0, f"sweeps took {total:.0f}s"
        print(f"\n  2D+3D sweeps in {total:.1f}s; counts within bounds")


def test_c2_inf_sup_bound(oracle_data):
    """Fitted-norm inf-sup constant at least 1 on every oracle point."""
    with criterion("C2 (inf-sup bound beta >= 1)"):
        _, reports = oracle_data
        worst = min(rep.beta for rep in reports.values())
        assert worst >= 1.0 - 1e-8, worst
        print(f"\n  min beta over {len(reports)} points: {worst:.12f}")


def test_c3_norm_equivalence_bound(oracle_data):
    """Equivalence extremes within 1 + max of the discrete constants."""
    with criterion("C3 (norm equivalence bound)"):
        _, reports = oracle_data
        margin = -np.inf
        for rep in reports.values():
            bound = 1.0 + max(rep.poincare.values()) + 1e-6
            ratio = rep.equivalence_high / rep.equivalence_low
            assert ratio <= bound, (rep.k, rep.alpha, ratio, bound)
            margin = max(margin, ratio - bound)
        print(f"\n  worst ratio-minus-bound margin: {margin:.3e}")


def test_c4_flipped_bounds(oracle_data):
    """Flipped inf-sup bound and exact collapse of the flipped q-norm."""
    with criterion("C4 (flipped inf-sup and q-norm identity)"):
        _, reports = oracle_data
        worst_rel = 0.0
        for rep in reports.values():
            bound = (rep.poincare[rep.k - 1] + 1.0) ** -0.5 - 1e-8
            assert rep.beta_flipped >= bound, (rep.k, rep.alpha)
            worst_rel = max(worst_rel, rep.flipped_q_relerr)
        assert worst_rel <= 1e-10, worst_rel
        print(f"\n  max flipped-q relative error: {worst_rel:.3e}")


def test_c5_kappa_alpha_robustness(oracle_data):
    """Preconditioned condition number flat in alpha on a fixed mesh."""
    with criterion("C5 (kappa robustness in alpha)"):
        _, reports = oracle_data
        for dim in (2, 3):
            level = KAPPA_LEVEL[dim]
            for k in range(1, dim + 1):
                kappas = [reports[(dim, level, k, a)].kappa for a in ALPHAS]
                assert all(np.isfinite(kappas)), (dim, k)
                ratio = max(kappas) / min(kappas)
                assert ratio <= 1.5, (dim, k, ratio)
        print("\n  kappa ratios within 1.5 on fixed meshes, all finite")


def test_c6_structural_exactness():
    """dd = 0 with zero tolerance; cohomology (1, 0, ..., 0)."""
    with criterion("C6 (structural exactness)"):
        for dim, levels in ((2, (1, 2, 4)), (3, (1, 2))):
            for m in levels:
                cx = build_complex(build_structured_mesh(dim, m))
                for k in range(dim - 1):
                    assert cx.coboundary[k + 1].matmul(cx.coboundary[k]).nnz == 0
                rep = check_exactness(cx)
                assert rep.cohomology == (1,) + (0,) * dim, (dim, m)
                assert rep.is_exact
        print("\n  dd = 0 exactly; cohomology (1, 0, ..., 0) everywhere")


def test_c7_poincare_convergence():
    """Discrete square constants approach the analytic eigenvalues: the
    degree-0 constant the Neumann value 1/pi^2, the degree-1 constant the
    Dirichlet value 1/(2 pi^2)."""
    with criterion("C7 (Poincare convergence on the unit square)"):
        neumann = 1.0 / np.pi ** 2
        dirichlet = 1.0 / (2.0 * np.pi ** 2)
        errs0, errs1 = [], []
        for m in (8, 16, 24):
            cx = build_complex(build_structured_mesh(2, m))
            assert cx.num_dofs(1) <= 2000
            errs0.append(abs(poincare_constant(cx, 0) - neumann) / neumann)
            errs1.append(abs(poincare_constant(cx, 1) - dirichlet) / dirichlet)
        assert errs0[-1] <= 0.05, errs0
        assert errs1[-1] <= 0.05, errs1
        assert errs0[-1] <= errs0[0] and errs1[-1] <= errs1[0]
        print(f"\n  rel. errors at finest mesh: degree0 {errs0[-1]:.3%} "
              f"(Neumann), degree1 {errs1[-1]:.3%} (Dirichlet)")


def test_c8_solver_and_mass_correctness(oracle_data):
    """MINRES agrees with dense solves; mass matrices match the high-order
    quadrature oracle."""
    with criterion("C8 (solver and mass-matrix correctness)"):
        complexes, _ = oracle_data
        worst = 0.0
        for (dim, level), cx in complexes.items():
            for k in range(1, dim + 1):
                f, g = assemble_rhs(cx, k, "standard", "standard")
                for alpha in ALPHAS:
                    system = assemble_system(cx, k, alpha)
                    system.F[:] = f
                    system.G[:] = g
                    pre = build_preconditioner(cx, k, alpha)
                    x, rep = minres_solve(system, pre, tol=1e-7, maxiter=300)
                    assert rep.converged
                    dense = np.linalg.solve(system.block_matrix().to_dense(),
                                            system.block_rhs())
                    err = (np.linalg.norm(x - dense)
                           / np.linalg.norm(dense))
                    assert err <= 1e-6, (dim, level, k, alpha, err)
                    worst = max(worst, err)
        rng = np.random.default_rng(99)
        worst_mass = 0.0
        for dim in (2, 3):
            for _ in range(2):
                verts = random_simplex(dim, rng)
                mesh = SimplicialMesh(dim, verts, [list(range(dim + 1))])
                for k in range(dim + 1):
                    got = mass_matrix(mesh, k).to_dense()
                    want = whitney_mass_oracle(verts, k)
                    diff = float(np.max(np.abs(got - want)))
                    assert diff <= 1e-12, (dim, k, diff)
                    worst_mass = max(worst_mass, diff)
        print(f"\n  worst solve error {worst:.2e} (<=1e-6); "
              f"worst mass deviation {worst_mass:.2e} (<=1e-12)")


def test_c9_deterministic_csv(monkeypatch):
    """Byte-identical CSV across reruns at a fixed thread count (timing
    column pinned to zero via record_timing=False)."""
    with criterion("C9 (deterministic CSV)"):
        cfg = SweepConfig(dim=2, degrees=(1, 2), levels=(2, 4),
                          alphas=(1e-2, 1.0, 1e2), record_timing=False)
        monkeypatch.setenv("HODGE_THREADS", "1")
        first = emit_table(run_sweep(cfg), "csv")
        second = emit_table(run_sweep(cfg), "csv")
        assert first == second
        monkeypatch.setenv("HODGE_THREADS", "2")
        third = emit_table(run_sweep(cfg), "csv")
        fourth = emit_table(run_sweep(cfg), "csv")
        assert third == fourth
        assert first == third
        print(f"\n  {len(first.splitlines()) - 1} rows byte-identical "
              f"across reruns and thread counts")
