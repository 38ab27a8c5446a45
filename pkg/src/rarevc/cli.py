"""Command-line front end.

Exit codes: 0 pass, 1 usage or configuration error, 2 precondition or
verification failure, 3 I/O error.  Every option may also come from a JSON file
given with ``--config`` (keys are the option names without leading dashes, e.g.
``"n-min"``); explicit flags win over the file, the file wins over defaults.
The master seed falls back to the ``RARE_VC_SEED`` environment variable.
"""

from __future__ import annotations

import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .bounds import BoundKind, evaluate
from .classes import CLASS_IDS, get_class
from .montecarlo import (
    DEFAULT_KINDS,
    ConfigurationError,
    ExperimentConfig,
    ExperimentError,
    PreconditionError,
    SymmetrizationConfig,
    bound_input_for,
    run_coverage,
    verify_conditioning,
    verify_symmetrization,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "RARE_VC_SEED"
DEFAULT_SEED = 20211130

FIGURE_KINDS = (
    ("first", BoundKind.RARE_SYM_AFTER, "Thm 3.1", "#1f77b4"),
    ("second", BoundKind.RARE_SYM_BEFORE, "Thm 3.2", "#ff7f0e"),
    ("third", BoundKind.EXPECTATION_ROUTE, "Cor 4.4", "#2ca02c"),
    ("relative", BoundKind.RELATIVE_VC, "Thm B.1", "#d62728"),
)


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _int(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    f = float(value)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(f)


def _kinds(value) -> tuple:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return tuple(BoundKind.parse(v) for v in value)


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def _resolve(params: dict, config_path, spec: dict) -> dict:
    """Merge flags > JSON config > (seed env) > defaults and coerce types.

    ``spec`` maps option name to ``(default, converter)``.
    """
    file_cfg = {}
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise _Exit(EXIT_IO, f"cannot read config {config_path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise _Exit(EXIT_USAGE, f"config {config_path} is not valid JSON: {exc}") from None
        unknown = set(file_cfg) - set(spec)
        if unknown:
            raise _Exit(EXIT_USAGE, f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, (default, convert) in spec.items():
        flag = params.get(key.replace("-", "_"))
        if flag is not None:
            raw = flag
        elif key in file_cfg:
            raw = file_cfg[key]
        elif key == "seed" and os.environ.get(SEED_ENV):
            raw = os.environ[SEED_ENV]
        else:
            raw = default
        try:
            out[key] = None if raw is None else convert(raw)
        except (TypeError, ValueError) as exc:
            raise _Exit(EXIT_USAGE, f"bad value for {key}: {exc}") from None
    return out


def _manifest_value(value):
    if isinstance(value, tuple):
        return ",".join(v.value if isinstance(v, BoundKind) else str(v) for v in value)
    return value


def _write_manifest(path: Path, command: str, cfg: dict) -> None:
    manifest = {
        "command": command,
        "config": {k: _manifest_value(v) for k, v in cfg.items() if v is not None},
        "version": __version__,
        "master_seed": cfg.get("seed"),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    Path(f"{path}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {path}: {exc}") from None


def _set_class(class_id: str, p: float):
    try:
        return get_class(class_id, p)
    except KeyError as exc:
        raise _Exit(EXIT_USAGE, exc.args[0]) from None
    except ValueError as exc:
        raise _Exit(EXIT_USAGE, str(exc)) from None


config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="JSON file with option values (flags override it).",
)


@click.group()
@click.version_option(__version__, prog_name="rarevc")
def cli():
    """Concentration bounds for frequencies of rare events."""


# ---------------------------------------------------------------- bound

BOUND_SPEC = {
    "kind": (None, BoundKind.parse),
    "n": (1_000_000, _int),
    "p": (1e-3, float),
    "delta": (1e-2, float),
    "class": ("tail-halflines", str),
    "vc-dim": (None, _int),
}


@cli.command()
@click.option("--kind", type=click.Choice([k.value for k in BoundKind]), default=None)
@click.option("--n", default=None, help="Sample size [1000000].")
@click.option("--p", default=None, type=float, help="Rare-region mass [1e-3].")
@click.option("--delta", default=None, type=float, help="Failure probability [1e-2].")
@click.option("--class", "class_", default=None, type=click.Choice(CLASS_IDS))
@click.option("--vc-dim", default=None, help="Override the class VC dimension.")
@config_option
def bound(config_path, **params):
    """Evaluate one bound and print its terms."""
    params["class"] = params.pop("class_")
    cfg = _resolve(params, config_path, BOUND_SPEC)
    if cfg["kind"] is None:
        raise click.UsageError("missing --kind")
    set_class = _set_class(cfg["class"], cfg["p"])
    try:
        inp = bound_input_for(set_class, cfg["n"], cfg["delta"])
        if cfg["vc-dim"] is not None:
            inp = type(inp)(inp.n, inp.p, inp.delta, inp.log_shattering, cfg["vc-dim"])
        res = evaluate(cfg["kind"], inp)
    except ValueError as exc:
        raise _Exit(EXIT_USAGE, str(exc)) from None
    click.echo(f"kind: {cfg['kind'].value}")
    click.echo(f"total: {_fmt(res.total)}")
    click.echo(f"term_inv_n: {_fmt(res.term_inv_n)}")
    click.echo(f"term_sqrt: {_fmt(res.term_sqrt)}")
    click.echo(f"valid: {str(res.valid).lower()}")
    if res.precondition_note:
        click.echo(f"note: {res.precondition_note}")
    if not res.valid:
        raise _Exit(EXIT_FAIL)


# ---------------------------------------------------------------- figure

FIGURE_SPEC = {
    "n-min": (32_000, _int),
    "n-max": (100_000_000, _int),
    "points-per-decade": (8, _int),
    "p": (1e-3, float),
    "delta": (1e-2, float),
    "class": ("tail-halflines", str),
    "out-csv": ("figure1.csv", str),
    "out-svg": ("figure1.svg", str),
}


def figure_grid(n_min: int, n_max: int, points_per_decade: int) -> list:
    """Log-spaced integer grid anchored on powers of ten, plus both endpoints.

    Interior points are ``round(10^(j / points_per_decade))``, so every decade
    value inside ``[n_min, n_max]`` is on the grid.
    """
    if n_min < 1 or n_max < n_min or points_per_decade < 1:
        raise ValueError("need 1 <= n-min <= n-max and points-per-decade >= 1")
    lo = math.ceil(points_per_decade * math.log10(n_min) - 1e-9)
    hi = math.floor(points_per_decade * math.log10(n_max) + 1e-9)
    grid = {n_min, n_max}
    grid.update(round(10 ** (j / points_per_decade)) for j in range(lo, hi + 1))
    return sorted(n for n in grid if n_min <= n <= n_max)


def figure_rows(grid, p: float, delta: float, class_id: str = "tail-halflines") -> list:
    set_class = get_class(class_id, p)
    rows = []
    for n in grid:
        inp = bound_input_for(set_class, n, delta)
        rows.append((n, {name: evaluate(kind, inp) for name, kind, _, _ in FIGURE_KINDS}))
    return rows


def figure_csv(rows) -> str:
    names = [name for name, *_ in FIGURE_KINDS]
    header = ["n"] + [f"{k}_bound" for k in names] + [f"{k}_valid" for k in names]
    lines = [",".join(header)]
    for n, res in rows:
        vals = [_fmt(res[k].total) if res[k].valid else "" for k in names]
        flags = [str(res[k].valid).lower() for k in names]
        lines.append(",".join([str(n)] + vals + flags))
    return "\n".join(lines) + "\n"


def figure_svg(rows, p: float, delta: float) -> str:
    """Self-contained 800x600 log-log line chart, one polyline per bound."""
    width, height = 800, 600
    left, right, top, bottom = 90, 170, 50, 70
    pw, ph = width - left - right, height - top - bottom
    ns = [n for n, _ in rows]
    vals = [r[k].total for _, r in rows for k, *_ in FIGURE_KINDS if r[k].valid]
    x0, x1 = math.floor(math.log10(min(ns))), math.ceil(math.log10(max(ns)))
    if vals:
        y0, y1 = math.floor(math.log10(min(vals))), math.ceil(math.log10(max(vals)))
    else:
        y0, y1 = -5, 0
    x1 = max(x1, x0 + 1)
    y1 = max(y1, y0 + 1)

    def sx(n):
        return left + (math.log10(n) - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (y1 - math.log10(v)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.2f}" y="30" text-anchor="middle" font-size="15">'
        f"Maximal deviation bounds, p={_fmt(p)}, delta={_fmt(delta)}</text>",
    ]
    for d in range(x0, x1 + 1):
        x = sx(10**d)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 20}" text-anchor="middle">1e{d}</text>')
    for d in range(y0, y1 + 1):
        y = sy(10**d)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 20}" text-anchor="middle">n</text>')
    out.append(
        f'<text x="20" y="{top + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {top + ph / 2:.2f})">bound</text>'
    )
    for i, (name, _, label, color) in enumerate(FIGURE_KINDS):
        pts = [f"{sx(n):.2f},{sy(r[name].total):.2f}" for n, r in rows if r[name].valid]
        if pts:
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(pts)}"/>'
            )
        ly = top + 20 + 24 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 38}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


@cli.command()
@click.option("--n-min", default=None, help="Smallest sample size [32000].")
@click.option("--n-max", default=None, help="Largest sample size [1e8].")
@click.option("--points-per-decade", default=None, help="Grid density [8].")
@click.option("--p", default=None, type=float, help="Rare-region mass [1e-3].")
@click.option("--delta", default=None, type=float, help="Failure probability [1e-2].")
@click.option("--class", "class_", default=None, type=click.Choice(CLASS_IDS))
@click.option("--out-csv", default=None, help="CSV path [figure1.csv].")
@click.option("--out-svg", default=None, help="SVG path [figure1.svg].")
@config_option
def figure(config_path, **params):
    """Compare the four rare-event bounds over a log-spaced grid of n."""
    params["class"] = params.pop("class_")
    cfg = _resolve(params, config_path, FIGURE_SPEC)
    try:
        grid = figure_grid(cfg["n-min"], cfg["n-max"], cfg["points-per-decade"])
        _set_class(cfg["class"], cfg["p"])
        rows = figure_rows(grid, cfg["p"], cfg["delta"], cfg["class"])
    except ValueError as exc:
        raise _Exit(EXIT_USAGE, str(exc)) from None
    csv_path, svg_path = Path(cfg["out-csv"]), Path(cfg["out-svg"])
    try:
        _write_text(csv_path, figure_csv(rows))
        _write_manifest(csv_path, "figure", cfg)
        _write_text(svg_path, figure_svg(rows, cfg["p"], cfg["delta"]))
        _write_manifest(svg_path, "figure", cfg)
    except OSError as exc:
        raise _Exit(EXIT_IO, str(exc)) from None
    click.echo(f"wrote {csv_path} and {svg_path} ({len(rows)} grid points)")


# ---------------------------------------------------------------- coverage

COVERAGE_SPEC = {
    "n": (100_000, _int),
    "p": (1e-3, float),
    "delta": (0.05, float),
    "reps": (500, _int),
    "seed": (DEFAULT_SEED, _int),
    "class": ("tail-halflines", str),
    "kinds": (DEFAULT_KINDS, _kinds),
    "jobs": (1, _int),
    "out-csv": ("-", str),
}


def coverage_csv(report) -> str:
    lines = ["kind,bound,exceed_count,coverage,coverage_ci_low"]
    for kind, c in report.kinds.items():
        if c.valid:
            fields = [_fmt(c.bound_value), str(c.exceed_count), _fmt(c.coverage), _fmt(c.coverage_ci_low)]
        else:
            fields = ["", "", "", ""]
        lines.append(",".join([kind.value] + fields))
    return "\n".join(lines) + "\n"


@cli.command()
@click.option("--n", default=None, help="Sample size [100000].")
@click.option("--p", default=None, type=float, help="Rare-region mass [1e-3].")
@click.option("--delta", default=None, type=float, help="Failure probability [0.05].")
@click.option("--reps", default=None, help="Monte Carlo replications [500].")
@click.option("--seed", default=None, help=f"Master seed [${SEED_ENV} or {DEFAULT_SEED}].")
@click.option("--class", "class_", default=None, type=click.Choice(CLASS_IDS))
@click.option("--kinds", default=None, help="Comma-separated bound kinds.")
@click.option("--jobs", default=None, help="Worker threads (0 = all cores) [1].")
@click.option("--out-csv", default=None, help="CSV path, '-' for stdout [-].")
@config_option
def coverage(config_path, **params):
    """Empirical coverage of each bound over seeded replications."""
    params["class"] = params.pop("class_")
    cfg = _resolve(params, config_path, COVERAGE_SPEC)
    try:
        config = ExperimentConfig(
            n=cfg["n"], p=cfg["p"], delta=cfg["delta"], replications=cfg["reps"],
            master_seed=cfg["seed"], class_id=cfg["class"], bound_kinds=cfg["kinds"],
        )
        report = run_coverage(config, n_jobs=cfg["jobs"])
    except (ConfigurationError, ValueError) as exc:
        raise _Exit(EXIT_USAGE, str(exc)) from None
    text = coverage_csv(report)
    if cfg["out-csv"] == "-":
        click.echo(text, nl=False)
    else:
        path = Path(cfg["out-csv"])
        _write_text(path, text)
        try:
            _write_manifest(path, "coverage", cfg)
        except OSError as exc:
            raise _Exit(EXIT_IO, str(exc)) from None
    for kind, c in report.kinds.items():
        if c.valid:
            msg = f"{kind.value}: {c.exceed_count}/{config.replications} exceedances, Wilson low {c.coverage_ci_low:.4f}"
        else:
            msg = f"{kind.value}: invalid at these parameters"
        click.echo(msg, err=True)
    if not report.passes():
        click.echo(f"FAIL: some coverage lower limit is below {1 - config.delta}", err=True)
        raise _Exit(EXIT_FAIL)


# ---------------------------------------------------------------- verify

def _a_value(value):
    if isinstance(value, str) and value.strip().lower() in ("max", "maximal"):
        return "max"
    return float(value)


VERIFY_SPECS = {
    "conditioning": {
        "n": (2000, _int),
        "p": (0.05, float),
        "alpha": (0.01, float),
        "reps": (80_000, _int),
        "per-side": (2000, _int),
        "seed": (DEFAULT_SEED, _int),
        "class": ("tail-halflines", str),
        "conditional-p": (None, float),
    },
    "symmetrization": {
        "n": (500, _int),
        "p": (1.0, float),
        "a": (0.5, _a_value),
        "t": (0.1, float),
        "reps": (5000, _int),
        "seed": (DEFAULT_SEED, _int),
    },
}


@cli.command()
@click.option("--lemma", type=click.Choice(sorted(VERIFY_SPECS)), required=True)
@click.option("--n", default=None, help="Sample size.")
@click.option("--p", default=None, type=float, help="Rare-region mass.")
@click.option("--reps", default=None, help="Replications.")
@click.option("--seed", default=None, help="Master seed.")
@click.option("--alpha", default=None, type=float, help="[conditioning] KS level.")
@click.option("--per-side", default=None, help="[conditioning] Samples per side.")
@click.option("--class", "class_", default=None, type=click.Choice(CLASS_IDS))
@click.option("--conditional-p", default=None, type=float,
              help="[conditioning] Use a wrong conditional law (adversarial control).")
@click.option("--a", default=None, help="[symmetrization] Constant a, or 'max'.")
@click.option("--t", default=None, type=float, help="[symmetrization] Threshold t.")
@config_option
def verify(lemma, config_path, **params):
    """Check the conditioning trick or the ghost-sample inequality by simulation."""
    params["class"] = params.pop("class_")
    spec = VERIFY_SPECS[lemma]
    stray = [k for k, v in params.items() if v is not None and k.replace("_", "-") not in spec]
    if stray:
        raise click.UsageError(f"options {stray} do not apply to --lemma {lemma}")
    cfg = _resolve(params, config_path, spec)
    try:
        if lemma == "conditioning":
            config = ExperimentConfig(
                n=cfg["n"], p=cfg["p"], delta=0.5, replications=cfg["reps"],
                master_seed=cfg["seed"], class_id=cfg["class"],
            )
            rep = verify_conditioning(
                config, cfg["alpha"], per_side=cfg["per-side"], conditional_p=cfg["conditional-p"]
            )
            click.echo(f"stratum k* = {rep.k_star}, sample sizes {rep.sample_sizes}")
            click.echo(f"KS statistic {rep.ks_statistic:.6f} vs critical value {rep.critical_value:.6f} (alpha={rep.alpha})")
            passed = rep.passed
        else:
            a = cfg["a"]
            if a == "max":
                a = SymmetrizationConfig.maximal_a(cfg["n"], cfg["t"])
            config = SymmetrizationConfig(
                a=a, t=cfg["t"], n=cfg["n"], p=cfg["p"],
                replications=cfg["reps"], master_seed=cfg["seed"],
            )
            rep = verify_symmetrization(config)
            click.echo(f"a = {a:.6f}, t = {cfg['t']}, condition: {rep.condition}")
            click.echo(
                f"P(sup(mu_n - mu) >= t) ~ {rep.lhs_upper:.6f}, P(sup(mu - mu_n) >= t) ~ {rep.lhs_lower:.6f}"
            )
            click.echo(f"2 P(sup(mu_n - mu_n') >= a t) ~ {2 * rep.rhs:.6f}, 3 stderr = {3 * rep.stderr:.6f}")
            passed = rep.holds
    except (PreconditionError, ExperimentError) as exc:
        click.echo(f"error: {exc}", err=True)
        raise _Exit(EXIT_FAIL) from None
    except (ConfigurationError, ValueError) as exc:
        raise _Exit(EXIT_USAGE, str(exc)) from None
    click.echo("PASS" if passed else "FAIL")
    if not passed:
        raise _Exit(EXIT_FAIL)


# ---------------------------------------------------------------- replay

@cli.command()
@click.argument("manifest", type=click.Path())
def replay(manifest):
    """Re-run the command recorded in a manifest, rewriting its outputs."""
    try:
        data = json.loads(Path(manifest).read_text())
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read {manifest}: {exc}") from None
    argv = [data["command"]]
    for key, value in data["config"].items():
        argv += [f"--{key}", str(value)]
    code = main(argv)
    if code:
        raise _Exit(code)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="rarevc", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except _Exit as exc:
        if str(exc):
            click.echo(f"error: {exc}", err=True)
        return exc.code
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
