"""Refinement studies: order fits, convergence tables, spurious-mode scans."""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from .assembly import BcSpec, assemble
from .eigsolve import solve_smallest
from .material import Material
from .mesh import generate_lshape_mesh, generate_square_mesh, tag_bottom_dirichlet

ALPHA_BRACKET = (0.25, 4.0)
DEFAULT_BETAS = tuple(4.0 ** k for k in range(-3, 4))


@dataclass
class ConvergenceFit:
    """Least-squares fit of w(h) ~ omega_ext + C h^alpha."""
    omega_ext: float
    C: float
    alpha: float
    residual: float


def _fit_at_alpha(h, w, alpha):
    A = np.column_stack([np.ones(len(h)), h ** alpha])
    coef, _, _, _ = np.linalg.lstsq(A, w, rcond=None)
    r = float(np.linalg.norm(A @ coef - w))
    return coef, r


def fit_order(h, w):
    """Fit frequencies against mesh size with the model w = omega + C h^alpha.

    The order alpha is found by a one-dimensional search on [0.25, 4]:
    a coarse grid of step 0.05 followed by golden-section refinement, with
    an exact linear least-squares solve for (omega, C) at each candidate.
    Deterministic for fixed input.

    Requires at least 3 samples with strictly decreasing h and finite w.
    """
    h = np.asarray(h, dtype=float)
    w = np.asarray(w, dtype=float)
    if len(h) < 3:
        raise ValueError("need at least 3 samples to fit an order")
    if len(h) != len(w):
        raise ValueError("h and w must have the same length")
    if np.any(np.diff(h) >= 0):
        raise ValueError("h must be strictly decreasing")
    if not np.all(np.isfinite(w)):
        raise ValueError("frequencies must be finite")

    lo, hi = ALPHA_BRACKET
    grid = np.arange(lo, hi + 1e-12, 0.05)
    res = np.array([_fit_at_alpha(h, w, a)[1] for a in grid])
    best = int(np.argmin(res))
    a = max(lo, grid[best] - 0.05)
    b = min(hi, grid[best] + 0.05)

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _fit_at_alpha(h, w, c)[1]
    fd = _fit_at_alpha(h, w, d)[1]
    while b - a > 1e-12:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _fit_at_alpha(h, w, c)[1]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _fit_at_alpha(h, w, d)[1]
    alpha = 0.5 * (a + b)
    coef, r = _fit_at_alpha(h, w, alpha)
    return ConvergenceFit(omega_ext=float(coef[0]), C=float(coef[1]),
                          alpha=float(alpha), residual=r)


# ---------------------------------------------------------------------------
# single-case runner shared by the study drivers and the CLI


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to run one refinement sweep."""
    material: Material
    domain: str = "square"
    family: str = "triangles"
    n_list: tuple = (16, 32, 64)
    scheme: str = "dofi_dofi"
    beta: float = 1.0
    bc: str = "clamped"  # 'clamped' | 'bottom-dirichlet'
    num_modes: int = 4
    seed: int = 0

    def as_dict(self):
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        return d


def build_mesh(domain, family, n, seed=0, bc="clamped"):
    """Generate and (for mixed problems) retag a mesh for one case."""
    if domain == "square":
        mesh = generate_square_mesh(n, family, seed=seed)
    elif domain == "lshape":
        mesh = generate_lshape_mesh(n, family, seed=seed)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    if bc == "bottom-dirichlet":
        mesh = tag_bottom_dirichlet(mesh)
    elif bc != "clamped":
        raise ValueError(f"unknown bc {bc!r}")
    return mesh


def _bc_spec(bc):
    return BcSpec("clamped_all" if bc == "clamped" else "dirichlet_on_tagged")


def solve_case(config, n, beta=None):
    """Mesh, assemble, and solve one refinement level; returns a Spectrum."""
    mesh = build_mesh(config.domain, config.family, n, seed=config.seed,
                      bc=config.bc)
    system = assemble(mesh, config.material, scheme=config.scheme,
                      beta=config.beta if beta is None else beta,
                      bc=_bc_spec(config.bc))
    return solve_smallest(system, m=config.num_modes)


# ---------------------------------------------------------------------------
# convergence study


@dataclass
class ConvergenceTable:
    """Frequencies per refinement plus fitted order and extrapolated limit.

    frequencies has shape (num_modes, len(n_list)); row i tracks the i-th
    lowest frequency across refinements by sorted index.
    """
    config: StudyConfig
    n_list: tuple
    frequencies: np.ndarray
    fits: list = field(default_factory=list)

    def row(self, i):
        return self.frequencies[i], self.fits[i]

    def format_table(self):
        head = ["mode"] + [f"N={n}" for n in self.n_list] + ["order", "extrapolated"]
        lines = ["  ".join(f"{c:>14s}" for c in head)]
        for i in range(len(self.fits)):
            cells = [f"omega_{i + 1}"]
            cells += [f"{v:.6f}" for v in self.frequencies[i]]
            cells += [f"{self.fits[i].alpha:.2f}", f"{self.fits[i].omega_ext:.6f}"]
            lines.append("  ".join(f"{c:>14s}" for c in cells))
        return "\n".join(lines)

    def to_csv(self, path):
        write_study_csv(self, path)

    def to_json(self, path):
        write_study_json(self, path)


def convergence_study(config):
    """Run assemble+solve per refinement and fit every tracked frequency.

    Frequencies are tracked across refinements by index after sorting,
    which is reliable for the well-separated lowest modes targeted here.
    A failing solve aborts with the failing refinement identified.
    """
    freqs = np.empty((config.num_modes, len(config.n_list)))
    for j, n in enumerate(config.n_list):
        try:
            spec = solve_case(config, n)
        except Exception as err:
            raise RuntimeError(f"solve failed at N={n}: {err}") from err
        if len(spec.frequencies) < config.num_modes:
            raise RuntimeError(f"solve at N={n} produced only "
                               f"{len(spec.frequencies)} finite modes")
        freqs[:, j] = spec.frequencies[:config.num_modes]
    h = 1.0 / np.asarray(config.n_list, dtype=float)
    fits = [fit_order(h, freqs[i]) for i in range(config.num_modes)]
    return ConvergenceTable(config=config, n_list=tuple(config.n_list),
                            frequencies=freqs, fits=fits)


# ---------------------------------------------------------------------------
# spurious-mode scan


@dataclass
class SpuriousEntry:
    frequency: float
    spurious: bool
    matched: float  # nearest baseline frequency, NaN when flagged


@dataclass
class SpuriousReport:
    """Flags per (beta, refinement) against the baseline-beta spectrum.

    A frequency is flagged spurious when no baseline frequency at the same
    refinement lies within relative distance ``match_tol`` (a modeling
    choice: the scaling study reports frequencies, and modes that nothing in
    the reference spectrum explains are the spurious ones).
    """
    config: StudyConfig
    betas: tuple
    n_list: tuple
    baseline_beta: float
    match_tol: float
    entries: dict  # (beta, n) -> list of SpuriousEntry

    def flags(self, beta, n):
        return [e.spurious for e in self.entries[(beta, n)]]

    def flag_count(self, beta, n):
        return sum(self.flags(beta, n))

    def format_grid(self, n):
        head = ["mode"] + [f"beta={b:g}" for b in self.betas]
        lines = ["  ".join(f"{c:>12s}" for c in head)]
        modes = len(self.entries[(self.betas[0], n)])
        for i in range(modes):
            row = [f"omega_{i + 1}"]
            for b in self.betas:
                e = self.entries[(b, n)][i]
                mark = "*" if e.spurious else ""
                row.append(f"{e.frequency:.4f}{mark}")
            lines.append("  ".join(f"{c:>12s}" for c in row))
        return "\n".join(lines)

    def to_csv(self, path):
        write_spurious_csv(self, path)

    def to_json(self, path):
        write_spurious_json(self, path)


def spurious_scan(config, betas=DEFAULT_BETAS, baseline_beta=1.0,
                  match_tol=0.1):
    """Sweep the stabilization multiplier and flag unmatched frequencies.

    For each refinement in ``config.n_list`` the spectrum at
    ``baseline_beta`` is the reference; every frequency of every other beta
    is matched to its nearest baseline frequency in relative distance and
    flagged when the distance exceeds ``match_tol``.  ``baseline_beta`` must
    be among ``betas``.
    """
    betas = tuple(betas)
    if baseline_beta not in betas:
        raise ValueError("baseline beta must be included in the sweep")
    entries = {}
    for n in config.n_list:
        spectra = {}
        for b in betas:
            spec = solve_case(config, n, beta=b)
            if len(spec.frequencies) == 0:
                raise RuntimeError(f"empty spectrum at beta={b}, N={n}")
            spectra[b] = spec.frequencies
        base = spectra[baseline_beta]
        for b in betas:
            row = []
            for f in spectra[b]:
                dist = np.abs(f - base) / np.abs(base)
                i = int(np.argmin(dist))
                if dist[i] > match_tol:
                    row.append(SpuriousEntry(float(f), True, float("nan")))
                else:
                    row.append(SpuriousEntry(float(f), False, float(base[i])))
            entries[(b, n)] = row
    return SpuriousReport(config=config, betas=betas,
                          n_list=tuple(config.n_list),
                          baseline_beta=baseline_beta, match_tol=match_tol,
                          entries=entries)


# ---------------------------------------------------------------------------
# report serialization (fixed column headers)


def _fmt(x):
    return f"{x:.17g}"


def _config_json(config, extra=None):
    doc = {"tool": "vemelast", "version": __version__,
           "config": config.as_dict()}
    if extra:
        doc.update(extra)
    return doc


def write_study_csv(table, path):
    """CSV: one row per frequency; columns mode, N=<n>..., order, extrapolated."""
    cfg = json.dumps(table.config.as_dict(), sort_keys=True)
    lines = [f"# vemelast {__version__}", f"# config: {cfg}"]
    lines.append(",".join(["mode"] + [f"N={n}" for n in table.n_list]
                          + ["order", "extrapolated"]))
    for i, fit in enumerate(table.fits):
        row = [str(i + 1)] + [_fmt(v) for v in table.frequencies[i]]
        row += [_fmt(fit.alpha), _fmt(fit.omega_ext)]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_study_json(table, path):
    rows = []
    for i, fit in enumerate(table.fits):
        rows.append({"mode": i + 1,
                     "frequencies": {str(n): table.frequencies[i, j]
                                     for j, n in enumerate(table.n_list)},
                     "order": fit.alpha,
                     "extrapolated": fit.omega_ext,
                     "fit_constant": fit.C,
                     "fit_residual": fit.residual})
    doc = _config_json(table.config, {"rows": rows})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_spurious_csv(report, path):
    """CSV: columns N, beta, mode, frequency, spurious, matched_baseline."""
    cfg = json.dumps(report.config.as_dict(), sort_keys=True)
    lines = [f"# vemelast {__version__}", f"# config: {cfg}",
             f"# baseline_beta: {report.baseline_beta:g}  "
             f"match_tol: {report.match_tol:g}",
             "N,beta,mode,frequency,spurious,matched_baseline"]
    for n in report.n_list:
        for b in report.betas:
            for i, e in enumerate(report.entries[(b, n)]):
                matched = "" if e.spurious else _fmt(e.matched)
                lines.append(f"{n},{_fmt(b)},{i + 1},{_fmt(e.frequency)},"
                             f"{int(e.spurious)},{matched}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_spurious_json(report, path):
    cells = []
    for (b, n), row in sorted(report.entries.items()):
        cells.append({"beta": b, "N": n,
                      "frequencies": [e.frequency for e in row],
                      "spurious": [e.spurious for e in row]})
    doc = _config_json(report.config,
                       {"baseline_beta": report.baseline_beta,
                        "match_tol": report.match_tol,
                        "cells": cells})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
