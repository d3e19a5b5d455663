"""Command-line front end: mesh generation, solves, studies, mode export.

Subcommands
-----------
mesh          generate a mesh file plus a shape-quality report
solve         frequencies of one configuration (stdout + optional CSV/JSON)
study         refinement sweep with fitted orders and extrapolated limits
spurious      stabilization-multiplier sweep with spurious-mode flags
export-modes  solve and write eigenmodes as a legacy-VTK vector field

Flags given on the command line override values from a JSON file passed via
--config; every output embeds the fully resolved configuration and the tool
version.  Identical invocations produce byte-identical outputs.
"""

import argparse
import json
import sys
from dataclasses import dataclass, asdict, fields

import numpy as np

from . import __version__
from .assembly import assemble
from .eigsolve import solve_smallest
from .material import Material, material_from_young_poisson
from .mesh import quality_report, write_mesh
from .study import (
    DEFAULT_BETAS,
    StudyConfig,
    build_mesh,
    convergence_study,
    spurious_scan,
    _bc_spec,
)
from .vtkio import write_modes_vtk

SCHEME_ALIASES = {"dofi": "dofi_dofi", "dofi_dofi": "dofi_dofi",
                  "trace": "trace"}


@dataclass
class RunConfig:
    """Resolved experiment configuration, serialized into every output."""
    domain: str = "square"
    family: str = "triangles"
    n: int = None
    n_list: list = None
    young: float = 1.0
    poisson: float = 0.35
    lambda_s: float = None
    mu_s: float = None
    rho: float = 1.0
    scheme: str = "dofi"
    beta: float = 1.0
    bc: str = "clamped"
    modes: int = 10
    seed: int = 0
    out: str = None
    format: str = "csv"

    def material(self):
        if (self.lambda_s is None) != (self.mu_s is None):
            raise ValueError("--lambda and --mu must be given together")
        if self.lambda_s is not None:
            return Material(lambda_s=self.lambda_s, mu_s=self.mu_s,
                            rho=self.rho)
        return material_from_young_poisson(self.young, self.poisson, self.rho)

    def study_config(self, n_list=None, num_modes=None):
        return StudyConfig(material=self.material(), domain=self.domain,
                           family=self.family,
                           n_list=tuple(n_list or self.n_list),
                           scheme=SCHEME_ALIASES[self.scheme], beta=self.beta,
                           bc=self.bc,
                           num_modes=num_modes or self.modes, seed=self.seed)

    def as_dict(self):
        return asdict(self)


_JSON_ALIASES = {"lambda": "lambda_s", "mu": "mu_s"}


def resolve_config(args):
    """RunConfig from defaults, then --config file values, then flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        names = {f.name for f in fields(RunConfig)}
        for key, val in doc.items():
            key = _JSON_ALIASES.get(key, key)
            if key not in names:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = val
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = RunConfig(**values)
    if cfg.scheme not in SCHEME_ALIASES:
        raise ValueError(f"unknown scheme {cfg.scheme!r}")
    if cfg.bc not in ("clamped", "bottom-dirichlet"):
        raise ValueError(f"unknown bc {cfg.bc!r}")
    if cfg.format not in ("csv", "json"):
        raise ValueError(f"unknown format {cfg.format!r}")
    if cfg.beta <= 0:
        raise ValueError("beta must be positive")
    if cfg.modes < 1:
        raise ValueError("modes must be >= 1")
    return cfg


def _parse_n_list(text):
    try:
        out = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers")
    if not out:
        raise argparse.ArgumentTypeError("empty N list")
    return out


def _add_common(p, families):
    p.add_argument("--domain", choices=("square", "lshape"))
    p.add_argument("--family", choices=families)
    p.add_argument("--n", type=int)
    p.add_argument("--n-list", dest="n_list", type=_parse_n_list,
                   help="comma-separated refinements, e.g. 16,32,64")
    p.add_argument("--young", type=float)
    p.add_argument("--poisson", type=float)
    p.add_argument("--lambda", dest="lambda_s", type=float,
                   help="first Lame coefficient (with --mu, overrides "
                        "--young/--poisson)")
    p.add_argument("--mu", dest="mu_s", type=float,
                   help="second Lame coefficient")
    p.add_argument("--rho", type=float, help="mass density")
    p.add_argument("--scheme", choices=("dofi", "trace"))
    p.add_argument("--beta", type=float, help="stabilization multiplier")
    p.add_argument("--bc", choices=("clamped", "bottom-dirichlet"))
    p.add_argument("--modes", type=int, help="number of eigenpairs")
    p.add_argument("--seed", type=int, help="mesh generator seed")
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", choices=("csv", "json"))


FAMILIES = ("squares", "triangles", "triangles_midpoint", "deformed_squares",
            "deformed_triangles_midpoint", "voronoi")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vemelast",
        description="Virtual element solver for the planar elasticity "
                    "eigenproblem on polygonal meshes with small edges.")
    parser.add_argument("--version", action="version",
                        version=f"vemelast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (("mesh", "generate a mesh file and quality report"),
                        ("solve", "compute the lowest frequencies"),
                        ("study", "refinement sweep with order fits"),
                        ("spurious", "stabilization sweep with flags"),
                        ("export-modes", "write eigenmodes to legacy VTK")):
        p = sub.add_parser(name, help=descr)
        _add_common(p, FAMILIES)
    return parser


def _require(cfg, attr, command):
    if getattr(cfg, attr) is None:
        raise ValueError(f"'{command}' requires --{attr.replace('_', '-')}")


def _solve_one(cfg):
    mesh = build_mesh(cfg.domain, cfg.family, cfg.n, seed=cfg.seed, bc=cfg.bc)
    system = assemble(mesh, cfg.material(), scheme=SCHEME_ALIASES[cfg.scheme],
                      beta=cfg.beta, bc=_bc_spec(cfg.bc))
    spectrum = solve_smallest(system, m=min(cfg.modes, system.free_count))
    return mesh, system, spectrum


def cmd_mesh(cfg):
    _require(cfg, "n", "mesh")
    mesh = build_mesh(cfg.domain, cfg.family, cfg.n, seed=cfg.seed, bc=cfg.bc)
    report = quality_report(mesh)
    out = cfg.out or "mesh.json"
    write_mesh(mesh, out)
    print(f"wrote {out}: {mesh.num_vertices} vertices, "
          f"{mesh.num_cells} cells, area {mesh.total_area():.12g}")
    print(f"gamma_min {report.gamma_min:.6g}")
    print(f"N_max {report.n_max}")
    print(f"min_edge_ratio {report.min_edge_ratio:.6g}")
    print(f"c(h) {report.c_h:.6g}")
    return 0


def _write_solve_output(cfg, spectrum):
    if cfg.out is None:
        return
    doc_cfg = json.dumps(cfg.as_dict(), sort_keys=True)
    if cfg.format == "csv":
        lines = [f"# vemelast {__version__}", f"# config: {doc_cfg}",
                 "mode,frequency,eigenvalue,residual"]
        for i, (w, k, r) in enumerate(zip(spectrum.frequencies,
                                          spectrum.eigenvalues,
                                          spectrum.residuals)):
            lines.append(f"{i + 1},{w:.17g},{k:.17g},{r:.17g}")
        with open(cfg.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        doc = {"tool": "vemelast", "version": __version__,
               "config": cfg.as_dict(),
               "frequencies": list(spectrum.frequencies),
               "eigenvalues": list(spectrum.eigenvalues),
               "residuals": list(spectrum.residuals)}
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")


def cmd_solve(cfg):
    _require(cfg, "n", "solve")
    _, system, spectrum = _solve_one(cfg)
    if len(spectrum.frequencies) < cfg.modes:
        print(f"warning: only {len(spectrum.frequencies)} finite modes "
              f"available ({cfg.modes} requested)", file=sys.stderr)
    for i, w in enumerate(spectrum.frequencies):
        print(f"omega_{i + 1} {w:.6f}")
    _write_solve_output(cfg, spectrum)
    return 0


def cmd_study(cfg):
    _require(cfg, "n_list", "study")
    table = convergence_study(cfg.study_config())
    print(table.format_table())
    if cfg.out:
        if cfg.format == "csv":
            table.to_csv(cfg.out)
        else:
            table.to_json(cfg.out)
    return 0


def cmd_spurious(cfg):
    _require(cfg, "n_list", "spurious")
    report = spurious_scan(cfg.study_config(), betas=DEFAULT_BETAS,
                           baseline_beta=1.0)
    for n in report.n_list:
        print(f"N = {n} (spurious entries marked *)")
        print(report.format_grid(n))
    if cfg.out:
        if cfg.format == "csv":
            report.to_csv(cfg.out)
        else:
            report.to_json(cfg.out)
    return 0


def cmd_export_modes(cfg):
    _require(cfg, "n", "export-modes")
    mesh, system, spectrum = _solve_one(cfg)
    out = cfg.out or "modes.vtk"
    modes = [spectrum.eigenvectors[:, i]
             for i in range(len(spectrum.frequencies))]
    title = f"vemelast {__version__} " + json.dumps(cfg.as_dict(),
                                                    sort_keys=True)
    write_modes_vtk(mesh, system.dof_map, modes, out, title=title)
    print(f"wrote {out}: {len(modes)} modes on {mesh.num_vertices} points")
    return 0


COMMANDS = {"mesh": cmd_mesh, "solve": cmd_solve, "study": cmd_study,
            "spurious": cmd_spurious, "export-modes": cmd_export_modes}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
