"""Experiment driver: INI sweeps to CSV, CSV to static SVG plots.

All unit conversion lives here.  Config files speak kilometres and dB;
every core module receives metres and linear ratios.  The dB convention is
beta_dB = 10 log10(beta).

CSV schema (UTF-8, comma-separated, '.' decimal point, header mandatory):
``sweep_value,beta_db`` followed by one column per requested engine in the
fixed order pc_exact, pc_clt, pc_lower, pc_upper, pc_mc, mc_ci.  Cells an
engine cannot fill (the exact engine under infinite fading shape) stay
empty.  The blockage engine fills pc_clt with the independent-blocking
mixture and pc_mc/mc_ci with the geometric building simulation.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .analytic import coverage_nakagami
from .approx import coverage_bounds, coverage_clt
from .core import ChannelModel
from .geometry import NetworkConfig
from .mcsim import (
    BlockageScene,
    MonteCarloConfig,
    coverage_blockage_independent,
    estimate_blockage_probability,
    simulate_coverage,
    simulate_coverage_blockage_geometric,
)
from .quadrature import QuadratureError

SWEEP_VARIABLES = ("beta", "height", "x0", "m", "alpha", "n_nodes")
ENGINES = ("exact", "clt", "bounds", "mc", "blockage")

# Canonical CSV column order; engines own the columns listed for them.
_ENGINE_COLUMNS = {
    "exact": ("pc_exact",),
    "clt": ("pc_clt",),
    "bounds": ("pc_lower", "pc_upper"),
    "mc": ("pc_mc", "mc_ci"),
    "blockage": ("pc_clt", "pc_mc", "mc_ci"),
}
_COLUMN_ORDER = ("pc_exact", "pc_clt", "pc_lower", "pc_upper", "pc_mc", "mc_ci")

PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig8")

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


class ConfigError(Exception):
    """Configuration problem, carrying a file-and-line anchor."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")


class EngineError(Exception):
    """A numerical engine failed to converge for one sweep point."""


class PlotError(Exception):
    """CSV unfit for plotting."""


@dataclass(frozen=True)
class CoverageQuery:
    """What to sweep, over which thresholds, with which engines.

    beta_grid holds thresholds in dB and must be strictly increasing;
    engines is an ordered subset of exact/clt/bounds/mc/blockage, with
    blockage standing alone because it owns its own column pair.
    """

    beta_grid: tuple[float, ...]
    sweep_variable: str
    sweep_values: tuple
    engines: tuple[str, ...]

    def __post_init__(self):
        if len(self.beta_grid) == 0:
            raise ValueError("beta_grid must be non-empty")
        if any(b >= a for b, a in zip(self.beta_grid, self.beta_grid[1:])):
            raise ValueError("beta_grid must be strictly increasing")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"sweep_variable must be one of {SWEEP_VARIABLES}, "
                f"got {self.sweep_variable!r}"
            )
        if len(self.engines) == 0:
            raise ValueError("at least one engine is required")
        unknown = [e for e in self.engines if e not in ENGINES]
        if unknown:
            raise ValueError(f"unknown engines {unknown}; choose from {ENGINES}")
        if len(set(self.engines)) != len(self.engines):
            raise ValueError("duplicate engines")
        if "blockage" in self.engines and len(self.engines) > 1:
            raise ValueError("the blockage engine cannot be combined with others")

    @property
    def columns(self) -> tuple[str, ...]:
        owned = {c for e in self.engines for c in _ENGINE_COLUMNS[e]}
        return tuple(c for c in _COLUMN_ORDER if c in owned)


@dataclass(frozen=True)
class Experiment:
    """One fully validated sweep: geometry, channel, query, outputs."""

    network: NetworkConfig
    alpha: float
    m_serving: float
    m_interferer: float
    x0: float
    query: CoverageQuery
    mc: MonteCarloConfig | None
    scene: BlockageScene | None
    output: str


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line anchor for a section header or a key inside it."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            if key is None and stripped[1:-1].strip() == section:
                return lineno
            current = stripped[1:-1].strip()
            continue
        if key is not None and current == section:
            head = stripped.split("=", 1)[0].split(":", 1)[0].strip()
            if head == key and ("=" in stripped or ":" in stripped):
                return lineno
    return 1


class _Reader:
    """configparser wrapper producing line-anchored errors."""

    _REQUIRED = object()

    def __init__(self, path):
        self.path = Path(path)
        try:
            self.text = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(path, 1, f"cannot read config: {exc}") from exc
        self.parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            self.parser.read_string(self.text, source=str(path))
        except configparser.ParsingError as exc:
            line = exc.errors[0][0] if getattr(exc, "errors", None) else 1
            raise ConfigError(path, line, f"cannot parse config: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(path, 1, f"cannot parse config: {exc}") from exc

    def fail(self, section: str, key: str | None, message: str):
        raise ConfigError(self.path, _line_of(self.text, section, key), message)

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, cast, default=_REQUIRED):
        if not self.parser.has_section(section):
            if default is not self._REQUIRED:
                return default
            raise ConfigError(self.path, 1, f"missing section [{section}]")
        if not self.parser.has_option(section, key):
            if default is not self._REQUIRED:
                return default
            self.fail(section, None, f"missing key '{key}' in section [{section}]")
        raw = self.parser.get(section, key).strip()
        try:
            return cast(raw)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, f"bad value for '{key}': {exc}")


def _parse_shape(raw: str) -> float:
    if raw.lower() in ("inf", "infinity"):
        return math.inf
    value = float(raw)
    if not (value > 0.0 and float(value).is_integer()):
        raise ValueError(f"fading shape must be a positive integer or inf, got {raw!r}")
    return value


def _parse_list(raw: str, cast) -> tuple:
    items = [tok.strip() for tok in raw.split(",") if tok.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(cast(tok) for tok in items)


def _parse_beta_grid(raw: str) -> tuple[float, ...]:
    """Either 'start:stop:count' (inclusive, evenly spaced) or a comma list."""
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError("grid shorthand is start:stop:count")
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 1:
            raise ValueError("grid count must be >= 1")
        if count == 1:
            return (start,)
        step = (stop - start) / (count - 1)
        return tuple(start + i * step for i in range(count))
    return _parse_list(raw, float)


def load_experiment(config_path) -> Experiment:
    """Parse and validate one experiment config; raises ConfigError."""
    reader = _Reader(config_path)
    n_nodes = reader.get("network", "n_nodes", int)
    disk_radius = reader.get("network", "disk_radius_km", float) * 1e3
    altitude = reader.get("network", "altitude_km", float) * 1e3
    try:
        network = NetworkConfig(n_nodes=n_nodes, disk_radius=disk_radius, altitude=altitude)
    except ValueError as exc:
        reader.fail("network", None, str(exc))

    alpha = reader.get("channel", "alpha", float)
    m_both = reader.get("channel", "m", _parse_shape, default=None)
    m_serving = reader.get("channel", "m_serving", _parse_shape, default=m_both)
    m_interferer = reader.get("channel", "m_interferer", _parse_shape, default=m_both)
    if m_serving is None or m_interferer is None:
        reader.fail("channel", None, "set 'm' or both 'm_serving' and 'm_interferer'")
    try:
        ChannelModel(alpha=alpha, m_serving=m_serving, m_interferer=m_interferer)
    except ValueError as exc:
        reader.fail("channel", None, str(exc))

    x0 = reader.get("receiver", "x0_km", float) * 1e3
    if not (0.0 <= x0 <= disk_radius):
        reader.fail("receiver", "x0_km", f"x0 must lie in [0, disk_radius], got {x0} m")

    variable = reader.get("sweep", "variable", str).strip().lower()
    beta_grid = reader.get("sweep", "beta_grid_db", _parse_beta_grid)
    engines = reader.get(
        "sweep", "engines", lambda raw: _parse_list(raw, lambda t: t.lower())
    )
    if variable == "beta":
        if reader.has("sweep", "values"):
            reader.fail("sweep", "values", "'values' is not used when variable = beta")
        sweep_values = beta_grid
    else:
        caster = {
            "height": float,
            "x0": float,
            "alpha": float,
            "m": _parse_shape,
            "n_nodes": int,
        }.get(variable, str)
        sweep_values = reader.get(
            "sweep", "values", lambda raw: _parse_list(raw, caster)
        )
    try:
        query = CoverageQuery(
            beta_grid=tuple(beta_grid),
            sweep_variable=variable,
            sweep_values=tuple(sweep_values),
            engines=tuple(engines),
        )
    except ValueError as exc:
        reader.fail("sweep", None, str(exc))

    output = reader.get("sweep", "output", str, default=Path(config_path).stem + ".csv")

    needs_mc = bool({"mc", "blockage"} & set(query.engines))
    mc = None
    if needs_mc or reader.parser.has_section("mc"):
        trials = reader.get("mc", "trials", int)
        seed = reader.get("mc", "seed", int)
        batch_size = reader.get("mc", "batch_size", int, default=4096)
        try:
            mc = MonteCarloConfig(trials=trials, seed=seed, batch_size=batch_size)
        except ValueError as exc:
            reader.fail("mc", None, str(exc))

    scene = None
    if "blockage" in query.engines:
        if not (math.isinf(m_serving) and math.isinf(m_interferer)):
            reader.fail(
                "channel", "m", "the blockage engine needs a no-fading channel (m = inf)"
            )
        footprint = reader.get(
            "blockage",
            "footprint_m",
            lambda raw: tuple(float(tok) for tok in raw.lower().split("x")),
        )
        if len(footprint) != 2:
            reader.fail("blockage", "footprint_m", "footprint_m must be 'width x depth'")
        try:
            scene = BlockageScene(
                n_buildings=reader.get("blockage", "n_buildings", int),
                building_footprint=footprint,
                building_height=reader.get("blockage", "building_height_m", float),
                region_radius=reader.get("blockage", "region_radius_km", float) * 1e3,
                eta=reader.get("blockage", "eta", float),
            )
        except ValueError as exc:
            reader.fail("blockage", None, str(exc))

    return Experiment(
        network=network,
        alpha=alpha,
        m_serving=m_serving,
        m_interferer=m_interferer,
        x0=x0,
        query=query,
        mc=mc,
        scene=scene,
        output=output,
    )


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return format(float(value), ".10g")


def _row_parameters(exp: Experiment, sweep_value):
    """Apply the sweep variable, returning (network, alpha, m_s, m_i, x0)."""
    network, alpha = exp.network, exp.alpha
    m_s, m_i, x0 = exp.m_serving, exp.m_interferer, exp.x0
    var = exp.query.sweep_variable
    if var == "height":
        network = NetworkConfig(
            n_nodes=network.n_nodes,
            disk_radius=network.disk_radius,
            altitude=float(sweep_value) * 1e3,
        )
    elif var == "n_nodes":
        network = NetworkConfig(
            n_nodes=int(sweep_value),
            disk_radius=network.disk_radius,
            altitude=network.altitude,
        )
    elif var == "x0":
        x0 = float(sweep_value) * 1e3
    elif var == "m":
        m_s = m_i = float(sweep_value)
    elif var == "alpha":
        alpha = float(sweep_value)
    return network, alpha, m_s, m_i, x0


def _compute_rows(exp: Experiment) -> list[list[str]]:
    query = exp.query
    columns = query.columns
    rows = []
    p_block_cache: dict = {}
    for sweep_value in query.sweep_values:
        network, alpha, m_s, m_i, x0 = _row_parameters(exp, sweep_value)
        betas = (sweep_value,) if query.sweep_variable == "beta" else query.beta_grid
        for beta_db in betas:
            beta = 10.0 ** (beta_db / 10.0)
            cells = {c: "" for c in columns}
            for engine in query.engines:
                try:
                    _fill_engine(
                        cells, engine, exp, network, alpha, m_s, m_i, x0,
                        beta, p_block_cache,
                    )
                except QuadratureError as exc:
                    raise EngineError(
                        f"{engine} engine failed at sweep_value={_fmt(sweep_value)}, "
                        f"beta_db={_fmt(beta_db)} "
                        f"(n_nodes={network.n_nodes}, alpha={alpha}, "
                        f"x0={x0} m, h={network.altitude} m): {exc}"
                    ) from exc
            rows.append(
                [_fmt(sweep_value), _fmt(beta_db)] + [cells[c] for c in columns]
            )
    return rows


def _fill_engine(cells, engine, exp, network, alpha, m_s, m_i, x0, beta, p_block_cache):
    if engine == "exact":
        if math.isinf(m_s):
            return  # no finite derivative order exists; leave the cell empty
        model = ChannelModel(alpha=alpha, m_serving=m_s, m_interferer=m_i)
        cells["pc_exact"] = _fmt(coverage_nakagami(network, model, x0, beta).value)
    elif engine == "clt":
        cells["pc_clt"] = _fmt(coverage_clt(network, alpha, x0, beta).value)
    elif engine == "bounds":
        lower, upper = coverage_bounds(network, alpha, x0, beta)
        cells["pc_lower"] = _fmt(lower)
        cells["pc_upper"] = _fmt(upper)
    elif engine == "mc":
        model = ChannelModel(alpha=alpha, m_serving=m_s, m_interferer=m_i)
        estimate = simulate_coverage(network, model, x0, beta, exp.mc)
        cells["pc_mc"] = _fmt(estimate.value)
        cells["mc_ci"] = _fmt(estimate.ci_halfwidth)
    elif engine == "blockage":
        key = (network, x0)
        if key not in p_block_cache:
            p_block_cache[key] = estimate_blockage_probability(
                network, exp.scene, x0, exp.mc
            )
        mixture = coverage_blockage_independent(
            network, alpha, x0, beta, p_block_cache[key]
        )
        cells["pc_clt"] = _fmt(mixture.value)
        geometric = simulate_coverage_blockage_geometric(
            network, exp.scene, x0, beta, exp.mc, alpha
        )
        cells["pc_mc"] = _fmt(geometric.value)
        cells["mc_ci"] = _fmt(geometric.ci_halfwidth)


def run_experiment(config_path, out_dir=None) -> Path:
    """Run the sweep described by an INI config; returns the CSV path.

    Raises ConfigError for bad configuration and EngineError when a
    numerical engine does not converge.  All rows are computed before the
    single output file is written.
    """
    exp = load_experiment(config_path)
    rows = _compute_rows(exp)
    out_path = Path(out_dir or ".") / exp.output
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sweep_value", "beta_db", *exp.query.columns])
        writer.writerows(rows)
    return out_path


def _read_csv(csv_path):
    try:
        with open(csv_path, encoding="utf-8", newline="") as handle:
            table = list(csv.reader(handle))
    except OSError as exc:
        raise PlotError(f"cannot read {csv_path}: {exc}") from exc
    if not table or table[0][:2] != ["sweep_value", "beta_db"]:
        raise PlotError(
            f"{csv_path}: expected a header starting 'sweep_value,beta_db'"
        )
    header, rows = table[0], table[1:]
    if not rows:
        raise PlotError(f"{csv_path}: no data rows to plot")
    width = len(header)
    if any(len(row) != width for row in rows):
        raise PlotError(f"{csv_path}: ragged rows")
    return header, rows


def _build_series(header, rows):
    """Group rows into labeled (x_token, y_token) series.

    With more than one distinct threshold the x axis is beta_db and each
    (sweep value, column) pair is a series; with a single threshold the
    sweep value is the x axis and each column is a series.
    """
    value_columns = header[2:]
    beta_values = {row[1] for row in rows}
    series: dict[str, list[tuple[str, str]]] = {}
    if len(beta_values) > 1:
        for row in rows:
            for idx, col in enumerate(value_columns, start=2):
                if row[idx] == "":
                    continue
                label = f"{col} @ {row[0]}"
                series.setdefault(label, []).append((row[1], row[idx]))
        x_label = "beta_db"
    else:
        for row in rows:
            for idx, col in enumerate(value_columns, start=2):
                if row[idx] == "":
                    continue
                series.setdefault(col, []).append((row[0], row[idx]))
        x_label = "sweep_value"
    series = {label: pts for label, pts in series.items() if pts}
    if not series:
        raise PlotError("no non-empty series found in the CSV")
    return series, x_label


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def emit_plot(csv_path, svg_path) -> Path:
    """Render a CSV sweep as a static SVG line plot; raises PlotError.

    Each series carries its raw CSV tokens in a <desc> element, so the
    numbers in the file match the CSV exactly.
    """
    header, rows = _read_csv(csv_path)
    series, x_label = _build_series(header, rows)

    xs = [float(x) for pts in series.values() for x, _ in pts]
    ys = [float(y) for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(1.0, max(ys))
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    width, height = 720, 480
    left, right, top, bottom = 70, 200, 40, 55
    plot_w, plot_h = width - left - right, height - top - bottom

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="{top - 16}" font-size="14" '
        f'font-family="sans-serif">{Path(csv_path).name}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
        f'stroke="black"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" '
            f'y2="{top + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 20}" font-size="11" '
            f'font-family="sans-serif" text-anchor="middle">{tick:.4g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 9}" y="{y + 4:.2f}" font-size="11" '
            f'font-family="sans-serif" text-anchor="end">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2}" y="{height - 12}" font-size="12" '
        f'font-family="sans-serif" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{top + plot_h / 2}" font-size="12" '
        f'font-family="sans-serif" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + plot_h / 2})">coverage probability</text>'
    )

    for index, (label, pts) in enumerate(series.items()):
        color = _PALETTE[index % len(_PALETTE)]
        coords = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in pts)
        raw = " ".join(f"{x},{y}" for x, y in pts)
        legend_y = top + 14 + 16 * index
        parts.append("<g>")
        parts.append(f"<desc>{label}|{raw}</desc>")
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{coords}"/>'
        )
        parts.append(
            f'<line x1="{left + plot_w + 12}" y1="{legend_y - 4}" '
            f'x2="{left + plot_w + 34}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{left + plot_w + 40}" y="{legend_y}" font-size="11" '
            f'font-family="sans-serif">{label}</text>'
        )
        parts.append("</g>")
    parts.append("</svg>")

    out = Path(svg_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out


def preset_path(name: str):
    """Context manager yielding a real filesystem path to a packaged preset."""
    if name not in PRESETS:
        raise ConfigError(name, 1, f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.as_file(resources.files("uavcov") / "presets" / f"{name}.ini")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coverage",
        description="Downlink coverage sweeps for finite aerial networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep config, write its CSV")
    p_run.add_argument("config", help="path to an INI sweep configuration")
    p_run.add_argument("--out-dir", default=".", help="directory for the CSV")

    p_plot = sub.add_parser("plot", help="render a sweep CSV as an SVG plot")
    p_plot.add_argument("csv", help="CSV produced by 'coverage run'")
    p_plot.add_argument("svg", help="output SVG path")

    p_preset = sub.add_parser("preset", help="run a packaged figure preset")
    p_preset.add_argument("name", choices=PRESETS)
    p_preset.add_argument("--out-dir", default=".", help="directory for the CSV")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            out = run_experiment(args.config, args.out_dir)
            print(f"wrote {out}")
        elif args.command == "plot":
            out = emit_plot(args.csv, args.svg)
            print(f"wrote {out}")
        else:
            with preset_path(args.name) as config_path:
                out = run_experiment(config_path, args.out_dir)
            print(f"wrote {out}")
    except (ConfigError, PlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
