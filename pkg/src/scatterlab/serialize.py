"""File formats: density matrices as JSON, Mueller matrices and coincidence
counts as CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .qstate import validate_density_matrix
from .tomography import SETTINGS, CoincidenceCounts

BASIS_TAG = "HV-product"


def fmt12(x: float) -> str:
    """Float at 12 significant digits, the package-wide CSV precision."""
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# density matrices
# ---------------------------------------------------------------------------

def density_matrix_to_obj(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    matrix = [[[float(z.real), float(z.imag)] for z in row] for row in rho]
    return {"basis": BASIS_TAG, "matrix": matrix}


def density_matrix_from_obj(obj: dict, validate: bool = True) -> np.ndarray:
    try:
        if obj.get("basis", BASIS_TAG) != BASIS_TAG:
            raise ValidationError(f"unsupported basis tag {obj.get('basis')!r}")
        rows = obj["matrix"]
        rho = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in rows]
        )
    except (KeyError, TypeError, IndexError, AttributeError) as exc:
        raise ValidationError(f"malformed density-matrix JSON: {exc}") from exc
    if rho.shape != (4, 4):
        raise ValidationError(f"density-matrix JSON has shape {rho.shape}, expected 4x4")
    if validate:
        rho = validate_density_matrix(rho)
    return rho


def save_density_matrix(rho: np.ndarray, path) -> None:
    Path(path).write_text(json.dumps(density_matrix_to_obj(rho), indent=2) + "\n")


def load_density_matrix(path, validate: bool = True) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return density_matrix_from_obj(obj, validate=validate)


# ---------------------------------------------------------------------------
# Mueller matrices
# ---------------------------------------------------------------------------

def save_mueller(m: np.ndarray, path) -> None:
    """4x4 CSV, row-major, no header; full double precision for round-trips.

    A `.json` path writes the matrix as a plain JSON array of rows instead.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 Mueller matrix, got shape {m.shape}")
    if str(path).endswith(".json"):
        Path(path).write_text(json.dumps([list(row) for row in m]) + "\n")
        return
    np.savetxt(path, m, delimiter=",", fmt="%.17g")


def load_mueller(path) -> np.ndarray:
    if str(path).endswith(".json"):
        try:
            rows = json.loads(Path(path).read_text())
            m = np.asarray(rows, dtype=float)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ValidationError(f"{path}: not a JSON 4x4 array: {exc}") from exc
    else:
        try:
            m = np.loadtxt(path, delimiter=",", dtype=float)
        except ValueError as exc:
            raise ValidationError(f"{path}: not a numeric 4x4 CSV: {exc}") from exc
    if m.shape != (4, 4):
        raise ValidationError(f"{path}: expected a 4x4 Mueller matrix, got shape {m.shape}")
    return m


# ---------------------------------------------------------------------------
# coincidence counts
# ---------------------------------------------------------------------------

def write_counts(counts: CoincidenceCounts, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["setting", "count"])
    for label, value in zip(counts.labels, counts.counts):
        writer.writerow([label, fmt12(float(value))])


def save_counts(counts: CoincidenceCounts, path) -> None:
    with open(path, "w", newline="") as fh:
        write_counts(counts, fh)


def load_counts(path) -> CoincidenceCounts:
    """Read a `setting,count` CSV with the 16 canonical labels.

    The file does not carry the per-setting normalization N; it is recovered
    as the sum of the HH, HV, VH and VV counts, whose projectors add up to
    the identity.
    """
    values = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["setting", "count"]:
            raise ValidationError(f"{path}: expected header 'setting,count'")
        for row in reader:
            if not row:
                continue
            if len(row) < 2:
                raise ValidationError(f"{path}: malformed row {row!r}")
            label = row[0].strip()
            if label not in SETTINGS:
                raise ValidationError(f"{path}: unknown setting label {label!r}")
            if label in values:
                raise ValidationError(f"{path}: duplicate setting {label!r}")
            try:
                values[label] = float(row[1])
            except ValueError as exc:
                raise ValidationError(f"{path}: bad count for {label}: {row[1]!r}") from exc
    missing = [lbl for lbl in SETTINGS if lbl not in values]
    if missing:
        raise ValidationError(f"{path}: missing settings {missing}")
    counts = np.array([values[lbl] for lbl in SETTINGS])
    n_per = float(values["HH"] + values["HV"] + values["VH"] + values["VV"])
    if n_per <= 0:
        raise ValidationError(
            f"{path}: cannot infer counts-per-setting (basis counts sum to {n_per})"
        )
    return CoincidenceCounts(counts=counts, n_per_setting=n_per)
