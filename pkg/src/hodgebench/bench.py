"""Benchmark driver: (h, alpha, k) sweeps, table emission, oracle reports.

A sweep builds one complex per mesh level, assembles the saddle system and
the standard loads per degree, reuses the symbolic factorization of the two
preconditioner blocks across the alpha sweep (the sparsity pattern does not
depend on alpha) and records MINRES iteration counts.  Output ordering is
level-major, then degree, then alpha, independent of how many worker
threads ran the tuples.
"""

from __future__ import annotations

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .derham import DeRhamComplex, check_exactness
from .errors import DenseSizeError
from .mesh import build_structured_mesh, mesh_size, read_gmsh
from .minres import minres_solve
from .precond import BlockPreconditioner, preconditioner_matrices
from .saddle import SaddleSystem, assemble_rhs, system_blocks
from . import sparse
from .spectral import spectral_report

DEFAULT_LEVELS = {2: (8, 16, 32, 64, 128), 3: (3, 4, 6, 8, 11)}
DEFAULT_ORACLE_LEVELS = {2: (2, 4, 8), 3: (1, 2)}
DEFAULT_DEGREES = {2: (1, 2), 3: (1, 2, 3)}
DEFAULT_ALPHAS = (1e-4, 1e-2, 1.0, 1e2, 1e4)

CSV_HEADER = "dim,k,alpha,h,ndof_u,ndof_p,iterations,final_relres,wall_time"

# bound tolerances used by the oracle report flags
INF_SUP_TOL = 1e-8
EQUIVALENCE_TOL = 1e-6
FLIPPED_TOL = 1e-8
FLIPPED_Q_RELTOL = 1e-10
KAPPA_RATIO_BOUND = 1.5


@dataclass(frozen=True)
class SweepConfig:
    dim: int = 2
    degrees: tuple = None
    alphas: tuple = DEFAULT_ALPHAS
    levels: tuple = None          # ints (structured) and/or MSH file paths
    tol: float = 1e-7
    maxiter: int = 200
    fmt: str = "csv"
    out: str = None
    max_dof: int = sparse.DENSE_CAP
    record_timing: bool = True

    def resolved(self, oracle=False):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        degrees = self.degrees
        if degrees is None or len(degrees) == 0:
            degrees = DEFAULT_DEGREES[self.dim]
        degrees = tuple(int(k) for k in degrees)
        if len(degrees) == 0:
            raise ValueError("at least one degree is required")
        for k in degrees:
            if not 1 <= k <= self.dim:
                raise ValueError(f"degree {k} out of range 1..{self.dim}")
        levels = self.levels
        if levels is None or len(levels) == 0:
            levels = (DEFAULT_ORACLE_LEVELS if oracle else DEFAULT_LEVELS)[self.dim]
        levels = tuple(levels)
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) == 0:
            raise ValueError("at least one alpha is required")
        if any(a <= 0 for a in alphas):
            raise ValueError("alphas must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.fmt not in ("csv", "markdown"):
            raise ValueError(f"format must be csv or markdown, got {self.fmt}")
        return degrees, levels, alphas


@dataclass(frozen=True)
class SweepRow:
    dim: int
    k: int
    alpha: float
    h: float
    ndof_u: int
    ndof_p: int
    iterations: int
    final_relres: float
    wall_time: float

    @property
    def failed(self):
        return self.iterations < 0


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    @property
    def any_failed(self):
        return any(r.failed for r in self.rows)


def _build_level(dim, level):
    if isinstance(level, (int, np.integer)):
        mesh = build_structured_mesh(dim, int(level))
    else:
        with open(level, "rb") as fh:
            mesh = read_gmsh(fh)
        if mesh.dim != dim:
            raise ValueError(
                f"mesh file {level!r} has dimension {mesh.dim}, expected {dim}")
    return DeRhamComplex.build(mesh), mesh_size(mesh)


def _run_level_degree(cx, h, k, alphas, tol, maxiter, record_timing):
    """All alpha instances of one (level, k) pair, reusing symbolic data."""
    dim = cx.dim
    rows = []
    a_blk, bmat = system_blocks(cx, k)
    f_load, g_load = assemble_rhs(cx, k, "standard", "standard")
    mass_q = cx.mass[k - 1]
    pv_sym = pq_sym = None
    for alpha in alphas:
        t0 = time.perf_counter()
        try:
            system = SaddleSystem(k=k, alpha=alpha, A=a_blk, Bmat=bmat,
                                  C=mass_q.scaled(alpha), F=f_load, G=g_load)
            pv_mat, pq_mat = preconditioner_matrices(cx, k, alpha)
            if pv_sym is None:
                pv_sym = sparse.analyze(pv_mat)
                pq_sym = sparse.analyze(pq_mat)
            pre = BlockPreconditioner.from_matrices(
                pv_mat, pq_mat, alpha, pv_symbolic=pv_sym, pq_symbolic=pq_sym)
            _, report = minres_solve(system, pre, tol=tol, maxiter=maxiter)
            wall = time.perf_counter() - t0 if record_timing else 0.0
            rows.append(SweepRow(dim=dim, k=k, alpha=alpha, h=h,
                                 ndof_u=system.ndof_u, ndof_p=system.ndof_p,
                                 iterations=report.iterations,
                                 final_relres=report.final_relres,
                                 wall_time=wall))
        except Exception:
            wall = time.perf_counter() - t0 if record_timing else 0.0
            rows.append(SweepRow(dim=dim, k=k, alpha=alpha, h=h,
                                 ndof_u=cx.num_dofs(k), ndof_p=cx.num_dofs(k - 1),
                                 iterations=-1, final_relres=float("nan"),
                                 wall_time=wall))
    return rows


def worker_count():
    return max(1, int(os.environ.get("HODGE_THREADS", "1")))


def run_sweep(config):
    """Run the full (level, k, alpha) sweep described by the config.

    Failures are recorded as rows with iterations = -1 and the sweep
    continues; a level whose mesh cannot be built fails all its tuples.
    """
    degrees, levels, alphas = config.resolved()
    level_data = []
    for lv in levels:
        try:
            level_data.append(_build_level(config.dim, lv))
        except Exception:
            level_data.append(None)
    tasks = [(li, k) for li in range(len(levels)) for k in degrees]

    def run(task):
        li, k = task
        if level_data[li] is None:
            return [SweepRow(dim=config.dim, k=k, alpha=alpha,
                             h=float("nan"), ndof_u=0, ndof_p=0,
                             iterations=-1, final_relres=float("nan"),
                             wall_time=0.0)
                    for alpha in alphas]
        cx, h = level_data[li]
        return _run_level_degree(cx, h, k, alphas, config.tol, config.maxiter,
                                 config.record_timing)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run, tasks))
    else:
        chunks = [run(t) for t in tasks]
    result = SweepResult()
    for chunk in chunks:
        result.rows.extend(chunk)
    return result


def _fmt_float(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def emit_table(result, fmt="csv"):
    """Render a sweep result as CSV or as h-by-log10(alpha) markdown grids."""
    if not result.rows:
        raise ValueError("cannot emit a table for an empty sweep result")
    if fmt == "csv":
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for r in result.rows:
            out.write(
                f"{r.dim},{r.k},{_fmt_float(r.alpha)},{_fmt_float(r.h)},"
                f"{r.ndof_u},{r.ndof_p},{r.iterations},"
                f"{_fmt_float(r.final_relres)},{_fmt_float(r.wall_time)}\n")
        return out.getvalue().encode()
    if fmt == "markdown":
        return _emit_markdown(result)
    raise ValueError(f"unknown format {fmt!r}")


def _alpha_label(alpha):
    lg = math.log10(alpha)
    rounded = round(lg)
    return str(int(rounded)) if abs(lg - rounded) < 1e-9 else f"{lg:.3g}"


def _emit_markdown(result):
    out = io.StringIO()
    degrees = []
    for r in result.rows:
        if r.k not in degrees:
            degrees.append(r.k)
    for k in degrees:
        rows_k = [r for r in result.rows if r.k == k]
        alphas = []
        hs = []
        for r in rows_k:
            if r.alpha not in alphas:
                alphas.append(r.alpha)
            if r.h not in hs:
                hs.append(r.h)
        table = {(r.h, r.alpha): r for r in rows_k}
        out.write(f"## dim={rows_k[0].dim}, k={k}: MINRES iterations\n\n")
        header = ["h \\ log10(alpha)"] + [_alpha_label(a) for a in alphas]
        out.write("| " + " | ".join(header) + " |\n")
        out.write("|" + "---|" * len(header) + "\n")
        for h in hs:
            cells = [f"{h:.3e}"]
            for a in alphas:
                r = table.get((h, a))
                if r is None:
                    cells.append("-")
                elif r.failed:
                    cells.append("FAIL")
                else:
                    cells.append(str(r.iterations))
            out.write("| " + " | ".join(cells) + " |\n")
        out.write("\n")
    return out.getvalue().encode()


def parse_csv(data):
    """Inverse of emit_table(..., "csv"); round-trips exactly."""
    if isinstance(data, bytes):
        data = data.decode()
    lines = [ln for ln in data.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    result = SweepResult()
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 9:
            raise ValueError(f"malformed CSV row: {ln!r}")
        result.rows.append(SweepRow(
            dim=int(parts[0]), k=int(parts[1]), alpha=float(parts[2]),
            h=float(parts[3]), ndof_u=int(parts[4]), ndof_p=int(parts[5]),
            iterations=int(parts[6]), final_relres=float(parts[7]),
            wall_time=float(parts[8])))
    return result


def run_oracle_report(config):
    """Spectral verification report over the oracle sweep; returns bytes.

    Every row carries the measured constants plus pass/fail flags against
    the theoretical bounds evaluated with the mesh's own discrete Poincare
    constants.  A summary per (level, k) checks that kappa is flat in alpha.
    """
    degrees, levels, alphas = config.resolved(oracle=True)
    out = io.StringIO()
    out.write("# spectral oracle report\n")
    out.write("level,k,alpha,ndof,beta,beta_ok,eq_low,eq_high,eq_bound,eq_ok,"
              "beta_f,beta_f_bound,flip_ok,flip_q_relerr,kappa,kappa_ok,"
              "cP_k,cP_km1,exact_ok\n")
    all_ok = True
    for level in levels:
        cx, h = _build_level(config.dim, level)
        for k in degrees:
            ndof = cx.num_dofs(k) + cx.num_dofs(k - 1)
            if ndof > config.max_dof:
                raise DenseSizeError(
                    f"level {level!r} needs {ndof} DoF at k={k}, above the "
                    f"dense cap {config.max_dof}")
        try:
            exact = check_exactness(cx, cap=config.max_dof)
        except DenseSizeError as exc:
            raise DenseSizeError(f"level {level!r}: {exc}") from exc
        for k in degrees:
            ndof = cx.num_dofs(k) + cx.num_dofs(k - 1)
            kappas = []
            for alpha in alphas:
                rep = spectral_report(cx, k, alpha, cap=config.max_dof)
                cp_k = rep.poincare[k]
                cp_km1 = rep.poincare[k - 1]
                beta_ok = rep.beta >= 1.0 - INF_SUP_TOL
                eq_bound = 1.0 + max(cp_k, cp_km1) + EQUIVALENCE_TOL
                eq_ok = rep.equivalence_high / rep.equivalence_low <= eq_bound
                bf_bound = (cp_km1 + 1.0) ** -0.5 - FLIPPED_TOL
                flip_ok = (rep.beta_flipped >= bf_bound
                           and rep.flipped_q_relerr <= FLIPPED_Q_RELTOL)
                kappa_ok = math.isfinite(rep.kappa)
                kappas.append(rep.kappa)
                row_ok = (beta_ok and eq_ok and flip_ok and kappa_ok
                          and exact.is_exact)
                all_ok = all_ok and row_ok
                out.write(
                    f"{level},{k},{_fmt_float(alpha)},{ndof},"
                    f"{rep.beta:.12g},{_flag(beta_ok)},"
                    f"{rep.equivalence_low:.12g},{rep.equivalence_high:.12g},"
                    f"{eq_bound:.12g},{_flag(eq_ok)},"
                    f"{rep.beta_flipped:.12g},{bf_bound:.12g},{_flag(flip_ok)},"
                    f"{rep.flipped_q_relerr:.3e},"
                    f"{rep.kappa:.12g},{_flag(kappa_ok)},"
                    f"{cp_k:.12g},{cp_km1:.12g},{_flag(exact.is_exact)}\n")
            ratio = max(kappas) / min(kappas)
            ratio_ok = ratio <= KAPPA_RATIO_BOUND
            all_ok = all_ok and ratio_ok
            out.write(f"# level={level} k={k} kappa ratio over alpha sweep: "
                      f"{ratio:.6g} (bound {KAPPA_RATIO_BOUND}) "
                      f"{_flag(ratio_ok)}\n")
    out.write(f"# overall: {_flag(all_ok)}\n")
    return out.getvalue().encode()


def _flag(ok):
    return "PASS" if ok else "FAIL"


def oracle_report_passed(report_bytes):
    return report_bytes.decode().rstrip().endswith("PASS")


# -- kernel backend micro-benchmark ------------------------------------------

def kernel_benchmark(dim=2, level=24, repeats=3):
    """Compare the compiled and pure-python kernels on one operator.

    Times the LDLt numeric factorization, a triangular solve and a CSR
    matvec of the q-block preconditioner matrix at k=1, alpha=1 on a
    structured mesh.  Returns a printable report string.
    """
    from .kernels import pykern
    try:
        from .kernels import _ckern
        backends = [("python", pykern), ("compiled", _ckern)]
    except ImportError:
        backends = [("python", pykern)]

    cx, _ = _build_level(dim, level)
    _, pq_mat = preconditioner_matrices(cx, 1, 1.0)
    sym = sparse.analyze(pq_mat)
    s = pq_mat.add_scaled(pq_mat.transpose(), 1.0).scaled(0.5)
    data = s.data[sym.gather]
    diag = s.diagonal()
    floor = 1e-14 * float(np.max(np.abs(diag)))
    rng = np.random.default_rng(0)
    b = rng.standard_normal(sym.n)
    x = rng.standard_normal(pq_mat.ncols)

    lines = [f"kernel benchmark: dim={dim} level={level} n={sym.n} "
             f"nnz={pq_mat.nnz} L-nnz={int(sym.lp[-1])} repeats={repeats}"]
    results = {}
    for name, mod in backends:
        li, lx, d, fail = mod.ldlt_numeric(
            sym.n, sym.indptr, sym.indices, data, sym.parent, sym.lp, floor)
        assert fail == -1
        t_fac = _best_time(repeats, lambda: mod.ldlt_numeric(
            sym.n, sym.indptr, sym.indices, data, sym.parent, sym.lp, floor))
        t_sol = _best_time(repeats, lambda: mod.ldlt_solve(sym.lp, li, lx, d, b))
        t_mv = _best_time(repeats, lambda: mod.csr_matvec(
            pq_mat.indptr, pq_mat.indices, pq_mat.data, x))
        results[name] = (t_fac, t_sol, t_mv)
        lines.append(f"  {name:9s} factorize {t_fac * 1e3:10.2f} ms   "
                     f"solve {t_sol * 1e3:8.3f} ms   matvec {t_mv * 1e3:8.3f} ms")
    if len(results) == 2:
        pf, ps, pm = results["python"]
        cf, cs, cm = results["compiled"]
        lines.append(f"  speedup   factorize {pf / cf:10.1f} x    "
                     f"solve {ps / cs:8.1f} x    matvec {pm / cm:8.1f} x")
    else:
        lines.append("  compiled backend not available; build the extension "
                     "to compare (pip install -e . or setup.py build_ext)")
    return "\n".join(lines) + "\n"


def _best_time(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best
