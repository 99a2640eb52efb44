"""Batch experiment driver.

    riesz <subcommand> --config PATH [--set key=value]... [--out DIR]
          [--workers N] [--seed S] [--dump-field]

Subcommands: apply, resolvent-verify, kernel-decay, probe, spectrum-map,
norms, mikhlin.  Each run writes manifest.json plus <subcommand>.csv into the
output directory, atomically.  Exit status: 0 when every in-config assertion
holds, 2 when one fails, 1 on a usage error (bad flags, unparseable config,
parameters outside module preconditions).

Configs are flat key = value text (a TOML-compatible subset): numbers,
true/false, double-quoted strings, and [comma, separated, lists]; # starts a
comment.  --set overrides win over the file and accept bare strings.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .fieldio import atomic_write_text, dump_field, load_field
from .grid import Field, GridSpec, inverse_transform
from .multiplier import apply as apply_op
from .neumann import (
    apply_forward,
    apply_reverse,
    decay_slope,
    forward_decomposition,
    make_plan,
    reverse_decomposition,
    seminorm_table,
    tail_kernel_bound,
    tail_term_seminorms,
)
from .norms import (
    HerzParams,
    WeightSpec,
    ap_constant_estimate,
    besov_norm,
    build_lp_family,
    default_cube_family,
    herz_norm,
    lp_norm,
    triebel_norm,
    weighted_lp_norm,
)
from .probes import ProbeSpec, decay_curve, halving_factors, probe_grid, spectrum_map
from .symbols import (
    bochner_symbol,
    bump_phi0,
    cutoff_pair,
    mikhlin_check,
    resolvent_symbol,
    scalar_symbol,
)

CSV_SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing

def _parse_value(text, where):
    text = text.strip()
    if not text:
        raise UsageError(f"{where}: empty value")
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(part, where) for part in _split_top(inner)]
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    raise UsageError(f"{where}: cannot parse value {text!r}")


def _split_top(text):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p for p in (part.strip() for part in parts) if p]


def parse_config_text(text):
    config = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw
        if '"' not in line:
            line = line.split("#", 1)[0]
        elif line.lstrip().startswith("#"):
            line = ""
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise UsageError(f"config line {lineno}: missing key")
        config[key] = _parse_value(value, f"config line {lineno} ({key})")
    return config


def apply_overrides(config, pairs):
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--set needs key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            config[key.strip()] = _parse_value(value, f"--set {key}")
        except UsageError:
            config[key.strip()] = value.strip()
    return config


# ---------------------------------------------------------------------------
# mini-DSL for symbols and input fields

def _parse_call(text, where):
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise UsageError(f"{where}: expected name(arg, ...), got {text!r}")
    name, _, inner = text.partition("(")
    return name.strip(), _split_top(inner[:-1])


def _scalar(text, where):
    try:
        return complex(text)
    except ValueError as exc:
        raise UsageError(f"{where}: bad number {text!r}") from exc


def _kwargs(parts, where):
    out = {}
    for part in parts:
        if "=" not in part:
            raise UsageError(f"{where}: expected key=value, got {part!r}")
        key, _, value = part.partition("=")
        out[key.strip()] = value.strip()
    return out


def parse_symbol_spec(text, where="symbol"):
    """Symbol DSL: bochner(delta=), resolvent(z=,delta=), cutoff1(r0=),
    cutoff2(r0=), bump(rho=), scalar(c), product(s,...), sum(s,...),
    scale(c, s)."""
    name, parts = _parse_call(text, where)
    if name in ("product", "sum"):
        if not parts:
            raise UsageError(f"{where}: {name} needs at least one component")
        symbols = [parse_symbol_spec(p, where) for p in parts]
        out = symbols[0]
        for sym in symbols[1:]:
            out = out * sym if name == "product" else out + sym
        return out
    if name == "scale":
        if len(parts) != 2:
            raise UsageError(f"{where}: scale needs (number, symbol)")
        return _scalar(parts[0], where) * parse_symbol_spec(parts[1], where)
    if name == "scalar":
        if len(parts) != 1:
            raise UsageError(f"{where}: scalar needs one number")
        return scalar_symbol(_scalar(parts[0], where))
    kw = _kwargs(parts, where)
    try:
        if name == "bochner":
            return bochner_symbol(float(kw["delta"]))
        if name == "resolvent":
            return resolvent_symbol(_scalar(kw["z"], where), float(kw["delta"]))
        if name == "cutoff1":
            return cutoff_pair(float(kw["r0"]))[0]
        if name == "cutoff2":
            return cutoff_pair(float(kw["r0"]))[1]
        if name == "bump":
            return bump_phi0(float(kw["rho"]))
    except KeyError as exc:
        raise UsageError(f"{where}: {name} is missing argument {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{where}: {exc}") from exc
    raise UsageError(f"{where}: unknown symbol kind {name!r}")


def parse_field_spec(text, grid, rng, where="field"):
    """Field DSL: gaussian(width=), bump(radius=), random(band=)."""
    name, parts = _parse_call(text, where)
    kw = _kwargs(parts, where)
    if name == "gaussian":
        width = float(kw.get("width", "1"))
        r = grid.x_radius()
        return Field.spatial(grid, np.exp(-(r**2) / (2.0 * width**2)))
    if name == "bump":
        radius = float(kw.get("radius", "1"))
        spec = bump_phi0(radius)
        mesh = grid.x_mesh()
        return Field.spatial(grid, spec.evaluate(mesh))
    if name == "random":
        band = float(kw.get("band", "2"))
        spec = np.zeros(grid.shape, dtype=complex)
        mask = grid.xi_radius() <= band
        count = int(mask.sum())
        spec[mask] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        return inverse_transform(Field.frequency(grid, spec))
    raise UsageError(f"{where}: unknown field kind {name!r}")


# ---------------------------------------------------------------------------
# output helpers

def _format_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _grid_from_config(config, default=None):
    if "grid_size" not in config and default is not None:
        return default
    try:
        return GridSpec(
            int(config.get("grid_dim", 1)),
            int(config["grid_size"]),
            float(config["grid_half_width"]),
        )
    except KeyError as exc:
        raise UsageError(f"grid needs grid_size and grid_half_width ({exc} missing)")
    except ValueError as exc:
        raise UsageError(str(exc))


def _require(config, key, kind=float):
    if key not in config:
        raise UsageError(f"config key {key!r} is required")
    try:
        return kind(config[key])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config key {key!r}: {exc}")


def _complex_key(config, key, default=None):
    if key not in config:
        if default is None:
            raise UsageError(f"config key {key!r} is required")
        return default
    value = config[key]
    if isinstance(value, str):
        try:
            return complex(value)
        except ValueError as exc:
            raise UsageError(f"config key {key!r}: {exc}")
    return complex(value)


# ---------------------------------------------------------------------------
# subcommands

def run_apply(config, out_dir, seed, workers):
    grid = _grid_from_config(config, GridSpec(1, 1024, 16.0))
    symbol = parse_symbol_spec(str(_require(config, "symbol", str)))
    rng = np.random.default_rng(seed)
    f = parse_field_spec(str(config.get("field", "gaussian(width=1)")), grid, rng)
    try:
        out = apply_op(symbol, f)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = [
        {
            "quantity": "input",
            "l1": lp_norm(f, 1),
            "l2": lp_norm(f, 2),
            "sup": float(np.max(np.abs(f.samples))),
        },
        {
            "quantity": "output",
            "l1": lp_norm(out, 1),
            "l2": lp_norm(out, 2),
            "sup": float(np.max(np.abs(out.samples))),
        },
    ]
    checks = []
    if "assert_output_l2_max" in config:
        bound = float(config["assert_output_l2_max"])
        checks.append(("output_l2_max", lp_norm(out, 2) <= bound,
                       f"{lp_norm(out, 2)} <= {bound}"))
    extras = {"grid": grid}
    if config.get("dump_fields", False):
        base_in = f"{out_dir}/fields/input"
        base_out = f"{out_dir}/fields/output"
        os.makedirs(f"{out_dir}/fields", exist_ok=True)
        dump_field(f, base_in)
        dump_field(out, base_out)
        extras["field_dumps"] = [base_in, base_out]
    return rows, ["quantity", "l1", "l2", "sup"], checks, extras


def run_resolvent_verify(config, out_dir, seed, workers):
    z = _complex_key(config, "z", 2.0 + 0.0j)
    delta = float(config.get("delta", 1.0))
    direction = str(config.get("direction", "both"))
    if direction not in ("forward", "reverse", "both"):
        raise UsageError(f"direction must be forward, reverse or both, got {direction}")
    grid = _grid_from_config(config, GridSpec(1, 2048, 40.0))
    tail_tol = float(config.get("tail_tol", 1e-10))
    op_fields = int(config.get("op_fields", 5))
    band = float(config.get("band", 3.0))
    tol_operator = float(config.get("tol_operator", 1e-8))
    rng = np.random.default_rng(seed)

    def random_band_limited():
        spec = np.zeros(grid.shape, dtype=complex)
        mask = grid.xi_radius() <= band
        count = int(mask.sum())
        spec[mask] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        return inverse_transform(Field.frequency(grid, spec))

    kwargs = {}
    if "r0" in config:
        kwargs["r0"] = float(config["r0"])
    if "truncation" in config:
        kwargs["truncation"] = int(config["truncation"])

    rows, checks, extras = [], [], {"grid": grid}
    directions = ("forward", "reverse") if direction == "both" else (direction,)
    for direc in directions:
        try:
            plan = make_plan(z, delta, direction=direc, grid=grid, tail_tol=tail_tol,
                             **kwargs)
        except ValueError as exc:
            raise UsageError(str(exc))
        if direc == "forward":
            dec = forward_decomposition(plan)
            target = resolvent_symbol(z, delta)
            compose = apply_forward
        else:
            dec = reverse_decomposition(plan)
            target = bochner_symbol(delta) * dec.psi2
            compose = apply_reverse
        op_err = 0.0
        for _ in range(op_fields):
            f = random_band_limited()
            err = lp_norm(compose(dec, f) - apply_op(target, f), 2) / lp_norm(f, 2)
            op_err = max(op_err, err)
        contraction = dec.contraction_sup if dec.contraction_sup is not None else 0.0
        for n, seminorm in tail_term_seminorms(plan):
            rows.append(
                {
                    "direction": direc,
                    "n": n,
                    "seminorm": seminorm,
                    "certified_tail": dec.certified_tail,
                    "reconstruction_error": dec.reconstruction_error,
                    "contraction_sup": contraction,
                    "operator_rel_err": op_err,
                }
            )
        extras[f"{direc}_plan"] = (
            f"r0={plan.r0} n0={plan.n0} T={plan.truncation} q={plan.q} "
            f"tail_series_bound={tail_kernel_bound(plan)}"
        )
        checks.append(
            (f"{direc}_reconstruction",
             dec.reconstruction_error <= dec.certified_tail + 1e-10,
             f"{dec.reconstruction_error} <= {dec.certified_tail} + 1e-10")
        )
        checks.append(
            (f"{direc}_operator", op_err <= tol_operator, f"{op_err} <= {tol_operator}")
        )
    columns = ["direction", "n", "seminorm", "certified_tail",
               "reconstruction_error", "contraction_sup", "operator_rel_err"]
    return rows, columns, checks, extras


def run_kernel_decay(config, out_dir, seed, workers):
    z = _complex_key(config, "z", 2.0 + 0.0j)
    delta = float(config.get("delta", 1.0))
    grid = _grid_from_config(config, GridSpec(1, 4096, 64.0))
    alpha0 = int(config.get("alpha0", 2))
    beta0 = int(config.get("beta0", 0))
    n_min = int(config.get("n_min", 20))
    n_max = int(config.get("n_max", 60))
    if n_min < 1 or n_max <= n_min:
        raise UsageError(f"need 1 <= n_min < n_max, got {n_min}, {n_max}")
    kwargs = {"r0": float(config["r0"])} if "r0" in config else {}
    try:
        plan = make_plan(z, delta, grid=grid, alpha0=alpha0, beta0=beta0, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc))
    table = seminorm_table(plan, range(n_min, n_max + 1))
    slope = decay_slope(table)
    ratio_cap = (2.0 * plan.r0) ** delta
    rows, checks = [], []
    previous = None
    ratio_ok = True
    for n, value in table:
        ratio = value / previous if previous else 0.0
        bound = ratio_cap * (n / (n - 1)) ** alpha0 * 1.1 if previous else 0.0
        if previous and ratio > bound:
            ratio_ok = False
        rows.append({"n": n, "seminorm": value, "ratio": ratio, "ratio_bound": bound})
        previous = value
    if config.get("assert_ratio_bound", True):
        checks.append(("seminorm_ratios", ratio_ok, f"ratios within {ratio_cap} * growth * 1.1"))
    return rows, ["n", "seminorm", "ratio", "ratio_bound"], checks, {"slope": slope, "grid": grid}


def _probe_spec_rows(args):
    spec, grid = args
    curve = decay_curve(spec, grid)
    rows = []
    for row in curve.rows:
        rows.append({**row, "slope": curve.slope})
    return rows


def run_probe(config, out_dir, seed, workers):
    lambdas = config.get("lambdas", [0.25, 0.5, 1.0])
    ps = config.get("ps", [1.0, 2.0, 4.0])
    ns = tuple(int(n) for n in config.get("ns", [8, 16, 32, 64, 128]))
    delta = float(config.get("delta", 1.0))
    rho = float(config.get("rho", 0.5))
    weight_a = config.get("weight_a")
    if len(ns) < 4:
        raise UsageError("probe sweeps need at least 4 scale values")
    specs = []
    for lam in lambdas:
        for p in ps:
            try:
                specs.append(ProbeSpec(float(lam), float(p), delta, rho=rho,
                                       n_values=ns,
                                       weight_a=None if weight_a is None else float(weight_a)))
            except ValueError as exc:
                raise UsageError(str(exc))
    grid = probe_grid(max(ns), rho, dim=int(config.get("grid_dim", 1)))
    jobs = [(spec, grid) for spec in specs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grouped = list(pool.map(_probe_spec_rows, jobs))
    else:
        grouped = [_probe_spec_rows(job) for job in jobs]
    rows = [row for group in grouped for row in group]
    rows.sort(key=lambda r: (r["lambda"], r["p"], r["n"]))
    checks = []
    zero_tol = float(config.get("assert_zero_lambda_tol", 1e-12))
    zero_rows = [r for r in rows if r["lambda"] == 0.0]
    if zero_rows:
        worst = max(r["ratio"] for r in zero_rows)
        checks.append(("zero_lambda_annihilation", worst <= zero_tol,
                       f"{worst} <= {zero_tol}"))
    if "assert_max_halving" in config:
        cap = float(config["assert_max_halving"])
        ok, worst = True, 0.0
        for spec in specs:
            if not 0 < spec.lam <= 1:
                continue
            group = [r for r in rows if r["lambda"] == spec.lam and r["p"] == spec.p]
            for factor in halving_factors(group):
                worst = max(worst, factor)
                ok = ok and factor <= cap
        checks.append(("halving", ok, f"max factor {worst} <= {cap}"))
    columns = ["lambda", "lambda_achieved", "xi0", "p", "delta", "n", "ratio", "slope"]
    return rows, columns, checks, {"grid": grid}


def run_spectrum_map(config, out_dir, seed, workers):
    re_spec = config.get("re", [-0.5, 1.5, 9])
    im_spec = config.get("im", [-1.0, 1.0, 9])
    for name, spec in (("re", re_spec), ("im", im_spec)):
        if not (isinstance(spec, list) and len(spec) == 3):
            raise UsageError(f"{name} must be [min, max, steps]")
    p = float(config.get("p", 2.0))
    delta = float(config.get("delta", 1.0))
    ns = tuple(int(n) for n in config.get("ns", [32, 64, 128]))
    pole_margin = float(config.get("pole_margin", 1e-3))
    re_values = np.linspace(float(re_spec[0]), float(re_spec[1]), int(re_spec[2]))
    im_values = np.linspace(float(im_spec[0]), float(im_spec[1]), int(im_spec[2]))
    zs = [complex(a, b) for a in re_values for b in im_values]
    grid = probe_grid(max(ns), float(config.get("rho", 0.5)))
    rows = spectrum_map(zs, p, delta, grid=grid, n_values=ns, pole_margin=pole_margin)
    rows.sort(key=lambda r: (r["re_z"], r["im_z"]))
    for row in rows:
        if not np.isfinite(row["lower_bound"]):
            row["lower_bound"] = -1.0
            row["oracle_p2"] = -1.0
    return rows, ["re_z", "im_z", "pole", "lower_bound", "oracle_p2"], [], {"grid": grid}


def _parse_norm_spec(text, field, where="norms"):
    name, parts = _parse_call(text, where)
    kw = _kwargs(parts, where)
    try:
        if name == "lp":
            return name, text, lp_norm(field, float(kw["p"]))
        if name == "weighted":
            p = float(kw["p"])
            return name, text, weighted_lp_norm(field, p, WeightSpec(float(kw["a"]), p))
        if name == "herz":
            params = HerzParams(float(kw["alpha"]), float(kw["p"]), float(kw["q"]))
            return name, text, herz_norm(field, params)
        if name in ("besov", "triebel"):
            family = build_lp_family(int(kw.get("levels", 4)))
            fn = besov_norm if name == "besov" else triebel_norm
            return name, text, fn(field, float(kw["alpha"]), float(kw["p"]),
                                  float(kw["q"]), family)
        if name == "ap":
            w = WeightSpec(float(kw["a"]), float(kw["p"]))
            family = default_cube_family(field.grid.half_width, field.grid.dim,
                                         int(kw.get("level", 0)))
            return name, text, ap_constant_estimate(w, family, field.grid.dim)
    except KeyError as exc:
        raise UsageError(f"{where}: {name} is missing argument {exc}")
    except ValueError as exc:
        raise UsageError(f"{where}: {exc}")
    raise UsageError(f"{where}: unknown norm kind {name!r}")


def run_norms(config, out_dir, seed, workers):
    base = str(_require(config, "field", str))
    try:
        field = load_field(base)
    except OSError as exc:
        raise UsageError(f"cannot read field dump {base!r}: {exc}")
    specs = config.get("norms", ['lp(p=2)'])
    if not isinstance(specs, list):
        raise UsageError("norms must be a list of norm specs")
    rows = []
    for spec_text in specs:
        kind, text, value = _parse_norm_spec(str(spec_text), field)
        rows.append({"kind": kind, "spec": text, "value": value})
    record = {row["spec"]: row["value"] for row in rows}
    atomic_write_text(f"{out_dir}/norms.json", json.dumps(record, indent=2) + "\n")
    return rows, ["kind", "spec", "value"], [], {"grid": field.grid}


def run_mikhlin(config, out_dir, seed, workers):
    symbol = parse_symbol_spec(str(_require(config, "symbol", str)))
    kmax = int(config.get("kmax", 2))
    try:
        report = mikhlin_check(
            symbol,
            kmax,
            dim=int(config.get("grid_dim", 1)),
            xi_max=float(config.get("xi_max", 4.0)),
            base_points=int(config.get("base_points", 256)),
            refinements=(int(config["refinements"]) if "refinements" in config else None),
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = []
    for k in range(report.kmax + 1):
        for level, points in enumerate(report.points):
            rows.append(
                {
                    "k": k,
                    "level": level,
                    "points": points,
                    "sup": report.sups[level][k],
                    "growth": report.growth[k],
                    "flagged": report.flagged[k],
                }
            )
    checks = []
    if "assert_not_flagged" in config and config["assert_not_flagged"]:
        checks.append(("not_flagged", not report.any_flagged,
                       f"flags: {report.flagged}"))
    return rows, ["k", "level", "points", "sup", "growth", "flagged"], checks, {}


COMMANDS = {
    "apply": run_apply,
    "resolvent-verify": run_resolvent_verify,
    "kernel-decay": run_kernel_decay,
    "probe": run_probe,
    "spectrum-map": run_spectrum_map,
    "norms": run_norms,
    "mikhlin": run_mikhlin,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="riesz", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=False)
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE")
    parser.add_argument("--out", default="riesz-out")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dump-field", action="store_true",
                        help="write input/output field dumps (apply subcommand)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    started = time.time()
    try:
        config = {}
        if args.config:
            try:
                with open(args.config) as handle:
                    text = handle.read()
            except OSError as exc:
                raise UsageError(f"cannot read config {args.config!r}: {exc}")
            config = parse_config_text(text)
        apply_overrides(config, args.overrides)
        if args.dump_field:
            config["dump_fields"] = True

        os.makedirs(args.out, exist_ok=True)
        rows, columns, checks, extras = COMMANDS[args.command](
            config, args.out, args.seed, max(1, args.workers)
        )
    except UsageError as exc:
        print(f"riesz: {exc}", file=sys.stderr)
        return 1

    csv_path = f"{args.out}/{args.command}.csv"
    write_csv(csv_path, columns, rows)
    manifest = {
        "command": args.command,
        "config": {k: (str(v) if isinstance(v, complex) else v) for k, v in config.items()},
        "seed": args.seed,
        "workers": args.workers,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "checks": [{"name": n, "passed": bool(ok), "detail": d} for n, ok, d in checks],
        "extras": {k: str(v) for k, v in extras.items()},
        "wall_time_s": time.time() - started,
        "outputs": [csv_path],
    }
    atomic_write_text(f"{args.out}/manifest.json", json.dumps(manifest, indent=2) + "\n")
    failed = [name for name, ok, _ in checks if not ok]
    if failed:
        print(f"riesz: assertion failed: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def console_main():
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
