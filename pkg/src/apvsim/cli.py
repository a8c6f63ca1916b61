"""Command-line front end: ``apvsim {budget,lightshift,ramsey,sweep,validate}``."""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .budget import format_table, full_budget, load_scenario, scenario_from_mapping
from .config import ConfigError, load_document, resolve_relative
from .physics import TWO_PI, NoQuadrupoleCoupling, crossed_fields, light_shifts, species_pnc_scale
from .ramsey import EstimatorError, effective_efficiency, plan_from_mapping, run_experiment
from .species import SpeciesError, load_species

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
DEFAULT_SCENARIO = "pkg:scenarios/default.yaml"

# sweep axes that rescale the Ramsey plan instead of editing one document field
DERIVED_AXES = ("coherence_tau", "obs_time")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _path(ref: str) -> Path:
    return resolve_relative(".", ref) if ref.startswith("pkg:") else Path(ref)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _aligned(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])

    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return "" if v is None else str(v)

    cells = [keys] + [[fmt(r[k]) for k in keys] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(keys))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


class Output:
    """Routes human text to stdout and machine-readable files to ``--out``."""

    def __init__(self, args, command: str):
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.fmt = getattr(args, "format", "table")
        self.command = command
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def emit(self, text_table: str, doc: dict, rows: list[dict], stem: str | None = None):
        stem = stem or self.command
        if self.fmt == "json":
            sys.stdout.write(dumps(doc))
        elif self.fmt == "csv":
            sys.stdout.write(to_csv(rows))
        else:
            print(text_table)
        if self.out:
            (self.out / f"{stem}.json").write_text(dumps(doc))
            (self.out / f"{stem}.csv").write_text(to_csv(rows))

    def manifest(self, inputs: list[str], snapshot: dict, seed=None):
        if not self.out:
            return
        doc = {
            "command": self.command,
            "inputs": inputs,
            "config": snapshot,
            "seed": seed,
            "tool_version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        (self.out / "manifest.json").write_text(dumps(doc))


def _load_species_list(refs):
    if not refs:
        raise UsageError("at least one --species file is required")
    return [load_species(_path(r)) for r in refs]


def _scenario(ref: str | None):
    return load_scenario(_path(ref or DEFAULT_SCENARIO))


def _budget_rows(species_list, scenario):
    reports = []
    for sp in species_list:
        sp = scenario.apply(sp)
        reports.append(full_budget(sp, scenario.inputs_for(sp), scenario.constants,
                                   e0_double_prime=scenario.e0_double_prime))
    return reports


def cmd_budget(args) -> int:
    species = _load_species_list(args.species)
    scenario = _scenario(args.scenario)
    reports = _budget_rows(species, scenario)
    out = Output(args, "budget")
    rows = [r.to_dict() for r in reports]
    out.emit(format_table(reports), {"schema_version": 1, "reports": rows}, rows)
    out.manifest(list(args.species) + [args.scenario or DEFAULT_SCENARIO], scenario.snapshot())
    return EXIT_OK


def cmd_lightshift(args) -> int:
    species = _load_species_list(args.species)
    scenario = _scenario(args.scenario)
    rows = []
    for sp in species:
        sp = scenario.apply(sp)
        e0p = scenario.e0_prime if args.e0_prime is None else args.e0_prime
        e_prime, e_dprime = crossed_fields(sp, e0p, scenario.e0_double_prime, args.manifold)
        scale = species_pnc_scale(sp, scenario.e0_double_prime)
        shifts = light_shifts(sp, e_prime, e_dprime, scale, args.manifold,
                              quad_detuning=TWO_PI * args.quad_detuning_hz)
        hz = shifts.as_hz()
        rows.append({
            "species": sp.name,
            "manifold": args.manifold,
            "e0_prime": e0p,
            "pnc_scale": scale,
            "pnc_shift_plus_hz": hz["pnc_shift_hz"]["+1/2"],
            "pnc_shift_minus_hz": hz["pnc_shift_hz"]["-1/2"],
            "quad_shift_plus_hz": hz["quad_shift_hz"]["+1/2"],
            "quad_shift_minus_hz": hz["quad_shift_hz"]["-1/2"],
            "larmor_change_hz": hz["larmor_change_hz"],
        })
    out = Output(args, "lightshift")
    out.emit(_aligned(rows), {"schema_version": 1, "shifts": rows}, rows)
    out.manifest(list(args.species) + [args.scenario or DEFAULT_SCENARIO],
                 {**scenario.snapshot(), "e0_prime_override": args.e0_prime, "manifold": args.manifold,
                  "quad_detuning_hz": args.quad_detuning_hz})
    return EXIT_OK


def _result_doc(result, plan) -> dict:
    doc = result.to_dict()
    doc["expected_pnc_shift_hz"] = result.expected_pnc_shift / TWO_PI
    f_eff = effective_efficiency(result, plan)
    doc["effective_efficiency"] = f_eff if math.isfinite(f_eff) else None
    doc["species"] = plan.species.name
    return doc


def cmd_ramsey(args) -> int:
    plan_path = _path(args.plan)
    plan, noise, snapshot = plan_from_mapping(load_document(plan_path, "plan"), plan_path, args.seed)
    result = run_experiment(plan, noise, workers=args.workers)
    doc = _result_doc(result, plan)
    summary = [{
        "species": plan.species.name,
        "pnc_shift_hz": doc["pnc_shift_estimate_hz"],
        "stderr_hz": doc["pnc_shift_stderr_hz"],
        "expected_hz": doc["expected_pnc_shift_hz"],
        "trials_used": result.trials_used,
        "blocks_discarded": result.blocks_discarded,
        "seed": result.seed,
    }]
    out = Output(args, "ramsey")
    out.emit(_aligned(summary), doc, list(result.block_records))
    out.manifest([str(args.plan)], snapshot, plan.seed)
    return EXIT_OK


def parse_axis(spec: str) -> tuple[str, list[float]]:
    """``name=start:stop:num`` (inclusive linspace) or ``name=v1,v2,...``."""
    name, sep, values = spec.partition("=")
    if not sep or not name:
        raise UsageError(f"bad axis spec {spec!r}; expected name=start:stop:num or name=v1,v2,...")
    try:
        if ":" in values:
            start, stop, num = values.split(":")
            points = [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        else:
            points = [float(v) for v in values.split(",")]
    except ValueError:
        raise UsageError(f"bad axis values in {spec!r}") from None
    if len(points) < 2:
        raise UsageError(f"axis {name!r} needs at least 2 points")
    return name.strip(), points


def _set_dotted(doc: dict, key: str, value, source: str):
    parts = key.split(".")
    node = doc
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError("not a mapping", source=source, field=key)
    old = node.get(parts[-1])
    if (isinstance(old, int) and not isinstance(old, bool)) or parts[-1] in ("trials_per_block", "blocks"):
        if value != int(value):
            raise ConfigError("integer field swept with non-integer value", source=source, field=key)
        value = int(value)
    node[parts[-1]] = value


def _fit_exponent(xs, ys) -> float | None:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(xs[ok]), np.log(ys[ok]), 1)[0])


def cmd_sweep(args) -> int:
    name, points = parse_axis(args.axis)
    out = Output(args, "sweep")
    rows = []
    if args.plan:
        plan_path = _path(args.plan)
        base = load_document(plan_path, "plan")
        base_plan, _, _ = plan_from_mapping(copy.deepcopy(base), plan_path, args.seed)
        t_base = base_plan.trials_per_arm * base_plan.sequence.free_time
        for value in points:
            doc = copy.deepcopy(base)
            if name in DERIVED_AXES:
                # free time tracks tau/2 and the shot count tracks t, as in the shot-noise law
                noise_doc = doc.setdefault("noise", {})
                base_tau = noise_doc.get("decoherence_tau") or base_plan.species.coherence_time
                tau = value if name == "coherence_tau" else base_tau
                t = value if name == "obs_time" else t_base
                noise_doc["decoherence_tau"] = tau
                noise_doc["use_quench_rates"] = False
                doc["sequence"]["free_time"] = tau / 2.0
                per_block = int(round(t / (tau / 2.0))) // (2 * doc["blocks"])
                if per_block < 1:
                    raise ConfigError(f"{name} = {value} leaves no trials per block", source=str(plan_path))
                doc["trials_per_block"] = per_block
            else:
                _set_dotted(doc, name, value, str(plan_path))
            plan, noise, _ = plan_from_mapping(doc, plan_path, args.seed)
            res = run_experiment(plan, noise, workers=args.workers)
            rows.append({
                "parameter": name,
                "value": value,
                "pnc_shift_hz": res.pnc_shift_estimate / TWO_PI,
                "pnc_shift_stderr_hz": res.pnc_shift_stderr / TWO_PI,
                "expected_pnc_shift_hz": res.expected_pnc_shift / TWO_PI,
                "trials_used": res.trials_used,
                "blocks_discarded": res.blocks_discarded,
            })
        exponent = _fit_exponent(points, [r["pnc_shift_stderr_hz"] for r in rows])
        inputs, snapshot, seed = [str(args.plan)], base, base_plan.seed
    else:
        species = _load_species_list(args.species)
        sc_path = _path(args.scenario or DEFAULT_SCENARIO)
        base = load_document(sc_path, "scenario")
        for value in points:
            doc = copy.deepcopy(base)
            _set_dotted(doc, name, value, str(sc_path))
            for report in _budget_rows(species, scenario_from_mapping(doc, str(sc_path))):
                rows.append({"parameter": name, "value": value, **report.to_dict()})
        exponent = None
        inputs, snapshot, seed = list(args.species) + [str(sc_path)], base, None
    doc = {"schema_version": 1, "parameter": name, "rows": rows, "stderr_exponent": exponent}
    text = _aligned(rows)
    if exponent is not None:
        text += f"\nstderr ~ {name}^{exponent:.3f}"
    out.emit(text, doc, rows)
    out.manifest(inputs, {"base": snapshot, "axis": args.axis}, seed)
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = [(r, "species") for r in args.species or []]
    checks += [(r, "scenario") for r in args.scenario_files or []]
    checks += [(r, "plan") for r in args.plan_files or []]
    if not checks:
        raise UsageError("nothing to validate; pass --species, --scenario or --plan files")
    failed = 0
    for ref, kind in checks:
        try:
            path = _path(ref)
            if kind == "species":
                load_species(path)
            elif kind == "scenario":
                load_scenario(path)
            else:
                plan_from_mapping(load_document(path, "plan"), path)
            print(f"ok      {kind:8s} {ref}")
        except (ConfigError, SpeciesError) as exc:
            failed += 1
            print(f"invalid {kind:8s} {exc}")
    return EXIT_INVALID if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apvsim", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, outputs=True):
        if outputs:
            p.add_argument("--out", help="directory for JSON/CSV outputs and manifest.json")
            p.add_argument("--format", choices=("table", "json", "csv"), default="table",
                           help="what to print on standard output")

    p = sub.add_parser("budget", help="uncertainty budget per species")
    p.add_argument("--species", nargs="+", default=[], metavar="PATH")
    p.add_argument("--scenario", metavar="PATH")
    common(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("lightshift", help="per-sublevel PNC shifts and Larmor change")
    p.add_argument("--species", nargs="+", default=[], metavar="PATH")
    p.add_argument("--scenario", metavar="PATH")
    p.add_argument("--e0-prime", type=float, help="override E' amplitude (V/m)")
    p.add_argument("--manifold", default="D3/2", choices=("D3/2", "D5/2"))
    p.add_argument("--quad-detuning-hz", type=float, default=1e6)
    common(p)
    p.set_defaults(func=cmd_lightshift)

    p = sub.add_parser("ramsey", help="Monte Carlo Ramsey campaign")
    p.add_argument("--plan", required=True, metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_ramsey)

    p = sub.add_parser("sweep", help="one-parameter sweep of a budget or Ramsey plan")
    p.add_argument("--axis", required=True, help="name=start:stop:num or name=v1,v2,...")
    p.add_argument("--plan", metavar="PATH")
    p.add_argument("--species", nargs="+", default=[], metavar="PATH")
    p.add_argument("--scenario", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check input files against their schemas")
    p.add_argument("--species", nargs="+", metavar="PATH")
    p.add_argument("--scenario", dest="scenario_files", nargs="+", metavar="PATH")
    p.add_argument("--plan", dest="plan_files", nargs="+", metavar="PATH")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, SpeciesError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EstimatorError, NoQuadrupoleCoupling, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
