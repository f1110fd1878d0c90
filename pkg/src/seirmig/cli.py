"""Command-line interface: ``seirmig <subcommand> --config PATH [--out DIR]``.

Every command validates the whole configuration, computes its results in
memory and only then writes files, so a failing run leaves nothing behind.

Exit codes: 0 success, 2 invalid configuration or parameters, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import discrepancies, effectiveness, equilibria, heatmap, reproduction, sensitivity
from .config import RunConfig, load_config
from .effectiveness import EfficacyCombination
from .errors import ConfigError, DegenerateParameterError, DomainError, SeirmigError
from .integrator import integrate
from .model import HEADER_NAMES
from .parallel import default_threads
from .selfcheck import run_selfcheck, selfcheck_text

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3

COMMANDS = ("simulate", "equilibria", "r0", "sensitivity", "heatmap", "effectiveness", "discrepancies", "selfcheck")


class Outputs:
    """Files collected in memory and written together at the end."""

    def __init__(self):
        self.files = {}
        self.stdout = []
        self.failed = []

    def add(self, name: str, text: str):
        if not text.endswith("\n"):
            text += "\n"
        self.files[name] = text

    def write(self, directory: str):
        os.makedirs(directory, exist_ok=True)
        for name, text in self.files.items():
            with open(os.path.join(directory, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)


def _kv(pairs) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs)


def _weights(cfg: RunConfig):
    if cfg.weights is not None:
        return "explicit", cfg.weights
    return "dfe", reproduction.dfe_weights_from_equilibrium(cfg.params)


def _params_for_dynamics(cfg: RunConfig):
    if cfg.effectiveness.apply_to_dynamics and cfg.efficacies is not None:
        return effectiveness.intervened_params(cfg.params, EfficacyCombination(*cfg.efficacies))
    return cfg.params


def cmd_simulate(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    params = _params_for_dynamics(cfg)
    traj = integrate(cfg.init, params, cfg.mode, cfg.integration)
    out = Outputs()
    out.add("trajectory.csv", traj.to_csv())
    meta = [
        ("incidence", str(cfg.mode)),
        ("method", type(cfg.integration.method).__name__),
        ("t0", repr(cfg.integration.t0)),
        ("t_end", repr(cfg.integration.t_end)),
        ("record_every", repr(cfg.integration.record_every)),
        ("samples", str(len(traj))),
        ("accepted_steps", str(traj.stats["accepted"])),
        ("rejected_steps", str(traj.stats["rejected"])),
        ("rhs_evaluations", str(traj.stats["rhs_evals"])),
    ]
    meta += [(f"param.{k}", repr(v)) for k, v in params.as_dict().items()]
    meta += [(f"final.{n}", repr(float(v))) for n, v in zip(HEADER_NAMES, traj.final)]
    out.add("simulate.txt", _kv(meta))
    return out


def cmd_equilibria(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    dfe = equilibria.disease_free_equilibrium(cfg.params, cfg.mode)
    search = equilibria.search_infected_equilibria(cfg.params, cfg.mode)
    reports = [("dfe", dfe)] + [(f"infected_{i + 1}", r) for i, r in enumerate(search.reports)]
    text = [f"incidence = {cfg.mode}\n", f"infected_count = {len(search.reports)}\n",
            f"newton_starts = {search.starts}\n", f"newton_converged = {search.converged}\n"]
    text += [f"diagnostic_{i} = {d}\n" for i, d in enumerate(search.diagnostics)]
    csv = ["label,kind," + ",".join(HEADER_NAMES) + ",residual_norm,stability"]
    out = Outputs()
    for label, rep in reports:
        text.append("\n" + rep.to_text(prefix=f"{label}."))
        csv.append(",".join([label, rep.kind] + [repr(v) for v in rep.state] + [repr(rep.residual_norm), rep.stability]))
        out.add(f"eigenvalues_{label}.csv", rep.eigenvalue_csv())
    out.add("equilibria.txt", "".join(text))
    out.add("equilibria.csv", "\n".join(csv) + "\n")
    return out


def cmd_r0(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    p = cfg.params
    name, w = _weights(cfg)
    closed = reproduction.r0_closed_form(p, w)
    ng = reproduction.next_generation(p, w)
    numeric = reproduction.spectral_radius(ng.k_matrix)
    full = float(np.max(np.abs(np.linalg.eigvals(ng.full_k))))
    pairs = [
        ("weights", name), ("p1", repr(w.p1)), ("p2", repr(w.p2)),
        ("r0_closed_form", repr(closed.value)),
        ("r0_urban", repr(closed.urban)), ("r0_rural", repr(closed.rural)),
        ("urban_dominant", "true" if closed.urban_dominant else "false"),
        ("r0_spectral_radius", repr(numeric)),
        ("r0_eigensolver_4x4", repr(full)),
    ]
    conventions = [("dfe_fraction", reproduction.dfe_weights_from_equilibrium(p)),
                   ("unit", reproduction.UNIT_WEIGHTS)]
    for conv, cw in conventions:
        pairs.append((f"convention.{conv}", repr(reproduction.r0_closed_form(p, cw).value)))
    if cfg.efficacies is not None:
        eff = EfficacyCombination(*cfg.efficacies)
        r_e = reproduction.effective_r0(p, w, eff)
        pairs.append(("efficacies", ", ".join(repr(v) for v in cfg.efficacies)))
        pairs.append(("r_e", repr(r_e)))
        pr = effectiveness.percentage_reduction(closed.value, r_e) if closed.value else None
        pairs.append(("pr_percent", repr(pr) if pr is not None else "undefined"))
    out = Outputs()
    text = _kv(pairs)
    out.add("r0.txt", text)
    out.stdout.append(text)
    return out


def _sweep_spec(cfg: RunConfig) -> sensitivity.SweepSpec:
    s = cfg.sensitivity
    spec = sensitivity.SweepSpec(
        s.parameter, s.lo, s.hi, s.step, cfg.params, cfg.init, cfg.integration, cfg.mode, s.values,
    )
    for v in spec.grid():
        try:
            spec.params_for(v)
        except DomainError as exc:
            raise ConfigError(f"[sensitivity] {s.parameter}={v!r}: {exc}") from None
    return spec


def cmd_sensitivity(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    s = cfg.sensitivity
    result = sensitivity.run_sweep(_sweep_spec(cfg), threads)
    verdict = sensitivity.classify(result, s.peak_threshold, s.tail_threshold)
    out = Outputs()
    out.add("sweep.csv", sensitivity.sweep_to_csv(result))
    out.add("sweep_components.csv", sensitivity.components_to_csv(result))
    out.add("sweep_meta.txt", sensitivity.sweep_metadata(result, verdict, s.peak_threshold, s.tail_threshold))
    return out


def _grid_spec(cfg: RunConfig) -> heatmap.GridSpec:
    h = cfg.heatmap
    try:
        return heatmap.GridSpec(
            heatmap.Axis(h.x, h.x_lo, h.x_hi, h.x_count),
            heatmap.Axis(h.y, h.y_lo, h.y_hi, h.y_count),
            cfg.params, cfg.weights,
        )
    except DomainError as exc:
        raise ConfigError(f"[heatmap] {exc}") from None


def cmd_heatmap(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    spec = _grid_spec(cfg)
    grid = heatmap.compute_grid(spec, threads)
    finite = grid.r0[np.isfinite(grid.r0)]
    pairs = [
        ("x", spec.x.name), ("x_lo", repr(spec.x.lo)), ("x_hi", repr(spec.x.hi)), ("x_count", str(spec.x.count)),
        ("y", spec.y.name), ("y_lo", repr(spec.y.lo)), ("y_hi", repr(spec.y.hi)), ("y_count", str(spec.y.count)),
        ("weights", "dfe" if spec.weights is None else f"explicit({spec.weights.p1!r}, {spec.weights.p2!r})"),
        ("r0_min", repr(float(finite.min()))), ("r0_max", repr(float(finite.max()))),
    ]
    counts = grid.region_counts()
    pairs += [(f"cells.{r}", str(counts.get(r, 0))) for r in (heatmap.DFE_STABLE, heatmap.ENDEMIC, heatmap.DEGENERATE)]
    out = Outputs()
    out.add("heatmap_long.csv", heatmap.grid_to_long_csv(grid))
    out.add("heatmap_matrix.csv", heatmap.grid_to_matrix_csv(grid))
    out.add("heatmap.txt", _kv(pairs))
    return out


def _combos(cfg: RunConfig):
    path = cfg.effectiveness.combos_file
    if path is None:
        return effectiveness.builtin_combinations()
    try:
        with open(path, encoding="utf-8") as fh:
            return effectiveness.parse_combinations(fh.read())
    except OSError as exc:
        raise ConfigError(f"[effectiveness] cannot read {path}: {exc}") from None
    except DomainError as exc:
        raise ConfigError(f"[effectiveness] {path}: {exc}") from None


def cmd_effectiveness(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    combos = _combos(cfg)
    name, w = _weights(cfg)
    rows = effectiveness.effectiveness_table(cfg.params, w, combos)
    r0 = reproduction.r0_closed_form(cfg.params, w).value
    out = Outputs()
    out.add("effectiveness.csv", effectiveness.table_to_csv(rows))
    best = max(rows, key=lambda r: r.ce_rank)
    out.add("effectiveness.txt", _kv([
        ("weights", name), ("p1", repr(w.p1)), ("p2", repr(w.p2)), ("r0", repr(r0)),
        ("combinations", str(len(rows))), ("most_effective_id", str(best.id)),
        ("most_effective_pr_percent", repr(best.pr)),
    ]))
    return out


def cmd_discrepancies(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    report = discrepancies.build_report(cfg.params, cfg.init, cfg.integration, cfg.discrepancy_points, threads)
    out = Outputs()
    out.add("discrepancies.txt", report.to_text())
    return out


def cmd_selfcheck(cfg: RunConfig, threads: int, seed: int) -> Outputs:
    results = run_selfcheck(seed, cfg.selfcheck_draws)
    out = Outputs()
    text = f"seed = {seed}\ndraws = {cfg.selfcheck_draws}\n" + selfcheck_text(results)
    out.add("selfcheck.txt", text)
    out.stdout.append(text)
    out.failed = [name for name, ok, _ in results if not ok]
    return out


HANDLERS = {
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "r0": cmd_r0,
    "sensitivity": cmd_sensitivity,
    "heatmap": cmd_heatmap,
    "effectiveness": cmd_effectiveness,
    "discrepancies": cmd_discrepancies,
    "selfcheck": cmd_selfcheck,
}

# validation performed before any computation, per command
PREFLIGHT = {
    "sensitivity": _sweep_spec,
    "heatmap": _grid_spec,
    "effectiveness": _combos,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seirmig", description="Urban/rural migration SEIR model toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", required=True, help="path to the INI configuration")
        p.add_argument("--out", help="output directory (default: [output] directory)")
        p.add_argument("--threads", type=int, help="worker processes (default: [run] threads or CPU count)")
        p.add_argument("--seed", type=int, help="random seed (default: [run] seed, 42)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    try:
        cfg = load_config(args.config)
        threads = args.threads if args.threads is not None else (cfg.threads or default_threads())
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        seed = args.seed if args.seed is not None else cfg.seed
        if cmd in PREFLIGHT:
            PREFLIGHT[cmd](cfg)
        if cmd in ("r0", "effectiveness"):
            _weights(cfg)
    except (ConfigError, DomainError, DegenerateParameterError) as exc:
        print(f"seirmig {cmd}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        out = HANDLERS[cmd](cfg, threads, seed)
    except (ConfigError, DomainError, DegenerateParameterError) as exc:
        print(f"seirmig {cmd}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SeirmigError as exc:
        where = f" at t={exc.t!r}" if getattr(exc, "t", None) is not None else ""
        print(f"seirmig {cmd}: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out.write(args.out or cfg.output_dir)
    for text in out.stdout:
        sys.stdout.write(text)
    if out.failed:
        print(f"seirmig {cmd}: failed checks: {', '.join(out.failed)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
