"""
Deterministic CSV and JSON artifacts.

CSV files have a fixed column order, floats with 17 significant digits and LF newlines.
JSON files are written by the pydantic serializer with a trailing newline.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel

from arnold_waveguide.init import logger
from arnold_waveguide.models import EnergyMode
from arnold_waveguide.physics.classical import ResonancePoint
from arnold_waveguide.physics.ensemble import EnsembleRecord
from arnold_waveguide.physics.floquet import EvolutionRecord
from arnold_waveguide.physics.spectrum import SpectrumGroups
from arnold_waveguide.utils import sanitize_filename, write_if_changed


SPECTRUM_COLUMNS = ("q", "s", "energy", "class", "spacing")
EVOLUTION_COLUMNS = ("N", "t", "delta_q", "q_bar", "var_energy", "leakage")
CLASSICAL_COLUMNS = ("t", "var_E", "mean_E", "n_active")
POINCARE_COLUMNS = ("trajectory_id", "x_mod_2pi", "vx")
RESONANCE_COLUMNS = ("kind", "label", "eta", "omega_x", "omega_y", "vx", "vy")
SCAN_COLUMNS = ("a", "inv_sqrt_a", "M_s", "s_sep")


@dataclass(frozen=True)
class Table:
    """Rows of a CSV artifact under a fixed header."""

    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)


def format_value(value: Any) -> str:
    """Cell text: floats with 17 significant digits, None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        return format(number, ".17g")
    return str(value)


def csv_bytes(table: Table) -> bytes:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        if len(row) != len(table.columns):
            raise ValueError(f"Row has {len(row)} cells, header has {len(table.columns)}")
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue().encode("utf-8")


def json_bytes(model: BaseModel) -> bytes:
    return (model.model_dump_json(indent=2) + "\n").encode("utf-8")


def export_results(record: Table | BaseModel, fmt: Literal["csv", "json"], path: Path) -> bool:
    """
    Write a table as CSV or a pydantic model as JSON.

    Args:
        record: Table for CSV, pydantic model for JSON
        fmt: "csv" or "json"
        path: Destination; the file name is sanitized

    Returns:
        True if the file content changed

    Raises:
        TypeError: If the record does not match the format
        OSError: On write failures
    """
    name = sanitize_filename(path.name)
    if name is None:
        raise ValueError(f"Unusable artifact file name '{path.name}'")
    destination = path.with_name(name)
    if fmt == "csv":
        if not isinstance(record, Table):
            raise TypeError(f"CSV export needs a Table, got {type(record).__name__}")
        content = csv_bytes(record)
    elif fmt == "json":
        if not isinstance(record, BaseModel):
            raise TypeError(f"JSON export needs a pydantic model, got {type(record).__name__}")
        content = json_bytes(record)
    else:
        raise ValueError(f"Unsupported export format '{fmt}'")
    changed = write_if_changed(destination, content)
    logger.info("%s %s", "Wrote" if changed else "Kept", destination)
    return changed


def spectrum_table(groups: SpectrumGroups) -> Table:
    """One row per level; `spacing` is E_{s+1} - E_s, empty for the top level of a group."""
    rows = []
    for group in groups.groups:
        spacings = group.spacings
        for level in group.levels:
            spacing = float(spacings[level.s]) if level.s < spacings.size else None
            rows.append((group.q, level.s, level.energy, level.level_class.value if level.level_class else "", spacing))
    return Table(SPECTRUM_COLUMNS, rows)


def evolution_table(record: EvolutionRecord) -> Table:
    rows = list(zip(record.periods.tolist(), record.times.tolist(), record.delta_q.tolist(), record.q_bar.tolist(), record.energy_variance.tolist(), record.leakage.tolist()))
    return Table(EVOLUTION_COLUMNS, rows)


def classical_table(record: EnsembleRecord, mode: EnergyMode) -> Table:
    rows = list(zip(record.times.tolist(), record.variance(mode).tolist(), record.mean(mode).tolist(), record.n_active.tolist()))
    return Table(CLASSICAL_COLUMNS, rows)


def poincare_table(sections: Sequence[Iterable[tuple[float, float]]]) -> Table:
    rows = [(i, x, vx) for i, points in enumerate(sections) for x, vx in points]
    return Table(POINCARE_COLUMNS, rows)


def resonance_table(points: Sequence[ResonancePoint]) -> Table:
    rows = [(p.kind, p.label, p.eta, p.omega_x, p.omega_y, p.vx, p.vy) for p in points]
    return Table(RESONANCE_COLUMNS, rows)


def scan_table(points: Sequence[Any]) -> Table:
    rows = [(p.a, p.inv_sqrt_a, p.M_s, p.s_sep) for p in points]
    return Table(SCAN_COLUMNS, rows)
