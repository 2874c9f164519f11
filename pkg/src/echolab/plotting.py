"""gnuplot scripts for preset CSVs.

The script reads the CSV directly (``set datafile separator ','``) and
draws one line per value of the ``curve`` column.  Run it with
``gnuplot figN.gp``; it writes ``figN.png`` next to itself.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .sweep import CSV_MAGIC

_LAYOUT = {
    # preset: (x column, x label)
    "fig1": ("t_us", "t (us)"),
    "fig2": ("alpha0_abs", "alpha_0"),
    "fig3_nbar": ("nbar", "nbar = mbar"),
    "fig3_alpha0": ("alpha0_abs", "alpha_0"),
    "fig4": ("tf_us", "t_f (us)"),
}


class PlotError(ValueError):
    pass


def _read(csv_path: Path, x_col: str):
    try:
        lines = csv_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise PlotError(f"{csv_path}: {exc.strerror}") from exc
    if not lines or lines[0] != CSV_MAGIC:
        raise PlotError(f"{csv_path}: not an echolab CSV (missing '{CSV_MAGIC}')")
    rows = list(csv.reader(lines[1:]))
    if len(rows) < 2:
        raise PlotError(f"{csv_path}: no data rows")
    header = rows[0]
    for col in ("curve", x_col):
        if col not in header:
            raise PlotError(f"{csv_path}: missing column {col!r}")
    env = [c for c in header if c.startswith("envelope")]
    if not env:
        raise PlotError(f"{csv_path}: no envelope column")
    labels = list(dict.fromkeys(r[0] for r in rows[1:]))
    return header, env[0], labels


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_plot_script(csv_paths, preset: str, out_path=None) -> Path:
    """Write a gnuplot script for one preset; returns its path.

    ``csv_paths`` is one path, or for ``fig3`` the ``fig3_nbar`` and
    ``fig3_alpha0`` CSVs, which are overlaid on a shared 0..25 axis.
    Nothing is written if any CSV is empty or has the wrong schema.
    """
    paths = [Path(csv_paths)] if isinstance(csv_paths, (str, Path)) else [Path(p) for p in csv_paths]
    if not paths:
        raise PlotError("no CSV given")
    if preset == "fig3":
        keys = [p.stem if p.stem in _LAYOUT else "fig3_nbar" for p in paths]
    elif preset in _LAYOUT:
        keys = [preset] * len(paths)
    else:
        raise PlotError(f"unknown preset {preset!r}")
    datasets = []
    for path, key in zip(paths, keys):
        x_col, _ = _LAYOUT[key]
        header, env_col, labels = _read(path, x_col)
        datasets.append((path, key, header.index(x_col) + 1, header.index(env_col) + 1, labels))

    out_path = Path(out_path) if out_path else paths[0].with_name(f"{preset}.gp")
    xlabel = "nbar (nbar sweep) or alpha_0 (alpha_0 sweep)" if preset == "fig3" else _LAYOUT[keys[0]][1]
    lines = [
        f"# echolab {preset}: envelope of P+ ; run with: gnuplot {out_path.name}",
        "set terminal pngcairo size 900,600",
        f"set output {_quote(out_path.with_suffix('.png').name)}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        f"set xlabel {_quote(xlabel)}",
        "set ylabel 'E[P+]'",
        "set yrange [0.5:1]",
        "set key outside right",
    ]
    if preset in ("fig1", "fig4"):
        lines.append("set format x '%.2f'")
    plots = []
    for path, key, xi, yi, labels in datasets:
        prefix = f"{key}: " if len(datasets) > 1 else ""
        for label in labels:
            plots.append(
                f"{_quote(path.name)} using {xi}:(strcol(1) eq {_quote(label)} ? column({yi}) : NaN)"
                f" with lines lw 2 title {_quote(prefix + label)}"
            )
    lines.append("plot " + ", \\\n     ".join(plots))
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path
