"""Command-line front end: config ingestion, dispatch, report emission.

Subcommands: cohomology, curvature-integral, heat-trace, verify-morse,
kernel-asymptotics, moishezon-check, all.  Exit codes: 0 when every check
passes, 1 when an inequality or regression guard fails beyond tolerance,
2 on configuration errors (one-line diagnostic per failure on stderr).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import moishezon as mz
from . import report as rpt
from . import verify as vf
from .catalog import build_catalog_orbifold
from .cohomology import cohomology_table
from .curvature import morse_integral
from .errors import ConfigurationError, OrbmorseError
from .spectral import assemble_kodaira_laplacian, heat_trace

SUBCOMMANDS = ("cohomology", "curvature-integral", "heat-trace", "verify-morse",
               "kernel-asymptotics", "moishezon-check", "all")

DEFAULT_TOLERANCES = {
    "tol_degeneracy": 1e-8,
    "tol_spectral_gap": 1e-8,
    "tol_quadrature": 1e-3,
    "tol_chain": 1e-9,
}


@dataclass
class RunConfig:
    """Validated run configuration."""

    catalog_id: str
    catalog_params: dict
    p_list: list
    u_list: list
    q_list: list
    resolution_quadrature: int = 256
    resolution_spectral: int = 32
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    report_name: str = "report.json"

    @classmethod
    def from_mapping(cls, raw):
        try:
            catalog = raw["catalog"]
            run = raw.get("run", {})
            cfg = cls(
                catalog_id=str(catalog["id"]),
                catalog_params=dict(catalog.get("params", {})),
                p_list=[int(p) for p in run.get("p_list", [4, 8, 16])],
                # default probes both the kernel regime and the large-u
                # Morse regime
                u_list=[float(u) for u in run.get("u_list", [0.5, 1.0, 5.0, 50.0])],
                q_list=[int(q) for q in run.get("q_list", [0, 1])],
                resolution_quadrature=int(run.get("resolution_quadrature", 256)),
                resolution_spectral=int(run.get("resolution_spectral", 32)),
                tolerances={**DEFAULT_TOLERANCES, **raw.get("tolerances", {})},
                seed=int(raw.get("seed", 0)),
                report_name=str(raw.get("output", {}).get("report_name", "report.json")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed configuration: {exc}")
        cfg.validate()
        return cfg

    def validate(self):
        if any(b <= a for a, b in zip(self.p_list, self.p_list[1:])) or not self.p_list:
            raise ConfigurationError("p_list must be non-empty and strictly increasing")
        if any(u <= 0 for u in self.u_list):
            raise ConfigurationError("u_list entries must be positive")
        for name, value in self.tolerances.items():
            if value <= 0:
                raise ConfigurationError(f"tolerance {name} must be positive")
        # normalize catalog parameter containers for reproducible reports
        self.catalog_params = {k: (list(v) if isinstance(v, (tuple,)) else v)
                               for k, v in self.catalog_params.items()}


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a mapping")
    return RunConfig.from_mapping(raw)


# ---------------------------------------------------------------------------
# subcommand implementations: each returns (results, diagnostics, artifacts)
# where results entries are (name, passed, data) and artifacts maps
# relative file names to text payloads.


def _run_cohomology(cfg, orb, bundle, threads):
    table = cohomology_table(orb, cfg.p_list)
    data = {"entries": {f"{p},{q}": table.h(p, q)
                        for (p, q) in sorted(table.entries)}}
    return ([("cohomology-table", True, data)], [],
            {"cohomology.csv": table.to_csv()})


def _run_curvature_integral(cfg, orb, bundle, threads):
    n = orb.dimension
    results = []
    for q in cfg.q_list:
        if q > n:
            continue
        val = morse_integral(orb, bundle, {q}, resolution=cfg.resolution_quadrature,
                             tol=cfg.tolerances["tol_degeneracy"],
                             with_diagnostics=True)
        results.append((f"curvature-integral-q{q}", True,
                        {"value": val.value,
                         "degenerate_fraction": val.degenerate_fraction,
                         "resolution": val.resolution}))
    return results, [], {}


def _run_heat_trace(cfg, orb, bundle, threads):
    if orb.catalog_id != "torus":
        raise ConfigurationError("heat traces require the flat torus catalog entry")
    results = []
    artifacts = {}
    tasks = [(p, q) for p in cfg.p_list for q in (0, 1)]

    def build(task):
        p, q = task
        return assemble_kodaira_laplacian(orb, bundle, p, q,
                                          cfg.resolution_spectral).spectral_table()

    with ThreadPoolExecutor(max_workers=threads) as pool:
        tables = list(pool.map(build, tasks))
    for (p, q), table in zip(tasks, tables):
        artifacts[f"spectrum_p{p}_q{q}.csv"] = table.to_csv()
        traces = {repr(u): heat_trace(table, u) for u in cfg.u_list}
        results.append((f"heat-trace-p{p}-q{q}", True,
                        {"zero_dim": table.zero_dim, "traces": traces}))
    return results, [], artifacts


def _run_verify_morse(cfg, orb, bundle, threads):
    results = []
    diagnostics = []
    artifacts = {}
    if orb.catalog_id == "torus" and orb.params.get("d", 0) >= 1:
        tol = cfg.tolerances["tol_chain"]
        for p in cfg.p_list:
            for u in cfg.u_list:
                residuals, _ = vf.exact_chain_residuals(orb, bundle, p, u,
                                                        cfg.resolution_spectral)
                ok = all(r >= -tol for r in residuals) and abs(residuals[-1]) <= tol
                results.append((f"trace-chain-p{p}-u{repr(u)}", ok,
                                {"residuals": residuals}))
    n = orb.dimension
    for q in cfg.q_list:
        if q > n:
            continue
        try:
            series = vf.verify_strong_morse(orb, bundle, q, cfg.p_list,
                                            resolution=cfg.resolution_quadrature)
        except OrbmorseError as exc:
            diagnostics.append(("warning", f"strong Morse at q={q} skipped: {exc}"))
            continue
        pos = [max(r, 0.0) for r in series.residuals]
        tail_ok = all(b <= a + 1e-12 for a, b in zip(pos, pos[1:]))
        ok = tail_ok
        if q == n:
            ok = ok and abs(series.residuals[-1]) <= 2.0 / cfg.p_list[-1]
        results.append((f"strong-morse-q{q}", ok, series.as_record()))
        artifacts[f"strong_morse_q{q}.csv"] = rpt.residual_series_csv(
            series.p_list, series.residuals)
        if not series.fit.reliable:
            diagnostics.append(("warning",
                                f"convergence fit at q={q} marked unreliable "
                                f"(R^2={series.fit.r_squared:.3f})"))
    if n in cfg.q_list:
        gap = vf.telescoping_identity_gap(orb, bundle, n,
                                          resolution=cfg.resolution_quadrature)
        ok = gap <= cfg.tolerances["tol_quadrature"]
        results.append(("telescoping-identity", ok, {"gap": gap}))
    return results, diagnostics, artifacts


def _run_kernel_asymptotics(cfg, orb, bundle, threads):
    if orb.catalog_id != "local-model":
        raise ConfigurationError(
            "kernel asymptotics run on the local quotient models")
    results = []
    k = orb.params["k"]
    x_reg = np.array([1.0 + 0.0j] * orb.dimension)

    def one_u(u):
        fit = vf.verify_kernel_asymptotics_regular(orb, bundle, x_reg, u, cfg.p_list)
        ratio = vf.singular_diagonal_factor(
            orb, bundle, np.zeros(orb.dimension, dtype=complex), u, cfg.p_list[-1])
        p_mid = cfg.p_list[len(cfg.p_list) // 2]
        Z = np.array([1.0 / math.sqrt(p_mid) + 0.0j] * orb.dimension)
        rec = vf.verify_kernel_asymptotics_singular(orb, bundle, Z, u, [p_mid])[0]
        return u, fit, ratio, rec

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(one_u, cfg.u_list))
    for u, fit, ratio, rec in rows:
        slope_ok = fit.slope <= -0.4
        ratio_ok = abs(ratio - k) <= 0.05
        shrink = rec.residual_without_twist / max(rec.residual_with_twist, 1e-300)
        shrink_ok = shrink >= 10.0
        ok = slope_ok and ratio_ok and shrink_ok
        results.append((f"kernel-asymptotics-u{repr(u)}", ok,
                        {"regular_fit": fit.as_record(),
                         "singular_ratio": ratio,
                         "twist_shrink_factor": shrink}))
    return results, [], {}


def _run_moishezon(cfg, orb, bundle, threads):
    rng = np.random.default_rng(cfg.seed)
    verdict = mz.moishezon_check(orb, bundle, resolution=cfg.resolution_quadrature,
                                 tol=cfg.tolerances["tol_degeneracy"], rng=rng,
                                 quadrature_tolerance=cfg.tolerances["tol_quadrature"])
    results = [("moishezon-verdict", True, verdict.__dict__)]
    diagnostics = []
    expected_big = ((orb.catalog_id == "wps" and not orb.params.get("dent"))
                    or (orb.catalog_id == "torus" and orb.params.get("d", 0) >= 1))
    try:
        table = cohomology_table(orb, _bigness_powers(cfg))
        est = mz.bigness_check(table, orb.dimension)
        ranks = {}
        rank_max = -1
        for p in cfg.p_list[: min(len(cfg.p_list), 4)]:
            try:
                ranks[p] = mz.kodaira_rank(orb, bundle, p, rng=rng)
                rank_max = max(rank_max, ranks[p])
            except OrbmorseError as exc:
                diagnostics.append(("info", f"rank at p={p} skipped: {exc}"))
        agree = est.big == (rank_max == orb.dimension)
        guard = (not expected_big) or est.big
        results.append(("bigness", est.big == expected_big and agree and guard,
                        {"estimate": est.limsup_estimate, "noise": est.noise_floor,
                         "big": est.big, "expected_big": expected_big,
                         "kodaira_ranks": {str(p): r for p, r in ranks.items()},
                         "growth_exponent": mz.section_growth_exponent(table)}))
    except OrbmorseError as exc:
        diagnostics.append(("info", f"bigness estimate skipped: {exc}"))
    return results, diagnostics, {}


def _bigness_powers(cfg):
    top = max(4096, cfg.p_list[-1])
    ps = sorted({int(round(x)) for x in np.geomspace(2, top, 40)})
    return ps


RUNNERS = {
    "cohomology": _run_cohomology,
    "curvature-integral": _run_curvature_integral,
    "heat-trace": _run_heat_trace,
    "verify-morse": _run_verify_morse,
    "kernel-asymptotics": _run_kernel_asymptotics,
    "moishezon-check": _run_moishezon,
}


def run(subcommand, config: RunConfig, out_dir, threads=1, strict=False):
    """Execute one subcommand and write report + CSV artifacts.

    Returns the process exit code.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    orb, bundle = build_catalog_orbifold(config.catalog_id, **_param_kwargs(config))
    names = [s for s in SUBCOMMANDS[:-1]] if subcommand == "all" else [subcommand]
    results, diagnostics, artifacts = [], [], {}
    for name in names:
        try:
            r, d, a = RUNNERS[name](config, orb, bundle, threads)
        except OrbmorseError as exc:
            if subcommand == "all":
                diagnostics.append(("info", f"{name} skipped for this model: {exc}"))
                continue
            raise ConfigurationError(str(exc))
        results.extend(r)
        diagnostics.extend(d)
        artifacts.update(a)
    failures = [name for (name, passed, _) in results if not passed]
    for name in failures:
        diagnostics.append(("failure", f"check {name} failed beyond tolerance"))
    if strict:
        failures += [m for (lvl, m) in diagnostics if lvl == "warning"]
    report = rpt.build_report(subcommand, config.catalog_id, config.catalog_params,
                              results, diagnostics, config.seed)
    rpt.validate_report(report)
    (out / config.report_name).write_text(rpt.dumps_report(report))
    for fname, payload in artifacts.items():
        (out / fname).write_text(payload)
    return 1 if failures else 0


def _param_kwargs(config):
    out = {}
    for key, value in config.catalog_params.items():
        out[key] = tuple(value) if isinstance(value, list) else value
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="orbmorse",
        description="verification workflows for orbifold Morse inequalities")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", default="out", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--strict", action="store_true",
                        help="treat warnings as failures")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        return run(args.subcommand, config, args.out, threads=args.threads,
                   strict=args.strict)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OrbmorseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
