"""JSON schemas for channels and decomposition reports.

Complex numbers serialize as two-element ``[re, im]`` arrays, matrices as
row-major nested lists of such pairs.  ``canonical_dumps`` fixes key order
and float formatting (shortest round-trip), so identical objects always
produce byte-identical documents and serialize → parse → serialize is the
identity on canonical files.
"""

from dataclasses import dataclass
import json
import math

import numpy as np

from .channels import KrausChannel
from .errors import ParseError
from .linalg import DEFAULT_TOL, Subspace, Tolerance
from .spectral import fixed_space, peripheral_spectrum
from .structure import (
    AlphaBlock,
    BetaBlock,
    DecompositionReport,
    is_enclosure,
)

__all__ = [
    "ReportFile",
    "canonical_dumps",
    "channel_to_dict",
    "channel_from_dict",
    "load_channel",
    "report_file_from_report",
    "report_file_to_dict",
    "report_file_from_dict",
]

CHANNEL_SCHEMA = "chanstruct-channel/1"
REPORT_SCHEMA = "chanstruct-report/1"


def canonical_dumps(obj):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _complex_to_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_to_lists(m):
    m = np.asarray(m, dtype=complex)
    return [[_complex_to_pair(z) for z in row] for row in m]


def _pair_to_complex(entry, where):
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        value = complex(entry)
    elif (
        isinstance(entry, list)
        and len(entry) == 2
        and all(
            isinstance(p, (int, float)) and not isinstance(p, bool)
            for p in entry
        )
    ):
        value = complex(entry[0], entry[1])
    else:
        raise ParseError(f"{where}: expected a number or [re, im] pair, got {entry!r}")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ParseError(f"{where}: non-finite entry")
    return value


def _matrix_from_lists(data, rows, cols, where):
    if not isinstance(data, list) or len(data) != rows:
        raise ParseError(f"{where}: expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"{where}: row {i} must have {cols} entries")
        for j, entry in enumerate(row):
            out[i, j] = _pair_to_complex(entry, f"{where}[{i}][{j}]")
    return out


def _require(data, key, where):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{where}: missing required key {key!r}")
    return data[key]


def _require_int(data, key, where):
    value = _require(data, key, where)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{where}: {key!r} must be an integer")
    return value


def channel_to_dict(ch, metadata=None):
    doc = {
        "schema": CHANNEL_SCHEMA,
        "dim": ch.dim,
        "kraus": [_matrix_to_lists(v) for v in ch.kraus],
    }
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def channel_from_dict(data, tol=DEFAULT_TOL, unchecked=False):
    """Parse a channel document.  Schema faults raise ParseError; with
    ``unchecked`` false the channel must also pass trace-preservation
    validation."""
    where = "channel"
    dim = _require_int(data, "dim", where)
    if dim < 1:
        raise ParseError(f"{where}: dim must be positive")
    kraus_data = _require(data, "kraus", where)
    if not isinstance(kraus_data, list) or not kraus_data:
        raise ParseError(f"{where}: kraus must be a nonempty list of matrices")
    kraus = [
        _matrix_from_lists(m, dim, dim, f"{where}.kraus[{a}]")
        for a, m in enumerate(kraus_data)
    ]
    metadata = data.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise ParseError(f"{where}: metadata must be an object")
    return KrausChannel(kraus, tol=tol, unchecked=unchecked)


def load_channel(path, tol=DEFAULT_TOL, unchecked=False):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: malformed JSON ({err})") from err
    return channel_from_dict(data, tol=tol, unchecked=unchecked)


@dataclass(frozen=True)
class ReportFile:
    """A decomposition report plus the spectral summary that accompanies it
    on disk."""

    report: DecompositionReport
    fixed_space_dimension: int
    peripheral_spectrum: tuple


def report_file_from_report(report):
    """Attach the fixed-space dimension and peripheral spectrum of the
    report's channel."""
    if report.channel is None:
        raise ParseError("report does not retain its channel")
    tol = report.tolerance
    return ReportFile(
        report=report,
        fixed_space_dimension=fixed_space(report.channel, tol).dimension,
        peripheral_spectrum=tuple(peripheral_spectrum(report.channel, tol)),
    )


def _frame_to_lists(space):
    return _matrix_to_lists(space.frame)


def report_file_to_dict(rf):
    report = rf.report
    tol = report.tolerance
    return {
        "schema": REPORT_SCHEMA,
        "dim": report.dim,
        "channel": channel_to_dict(report.channel),
        "tolerances": {
            "rank_tol": tol.rank_tol,
            "eig_cluster_tol": tol.eig_cluster_tol,
            "psd_tol": tol.psd_tol,
        },
        "rng_seed": report.rng_seed,
        "recurrent_basis": _frame_to_lists(report.R),
        "transient_basis": _frame_to_lists(report.D),
        "alpha_blocks": [
            {
                "enclosure": _frame_to_lists(blk.enclosure),
                "rho": _matrix_to_lists(blk.rho),
            }
            for blk in report.alpha_blocks
        ],
        "beta_blocks": [
            {
                "index": blk.index,
                "enclosures": [_frame_to_lists(e) for e in blk.enclosures],
                "isometries": [_matrix_to_lists(q) for q in blk.isometries],
                "rho_ref": _matrix_to_lists(blk.rho_ref),
            }
            for blk in report.beta_blocks
        ],
        "fixed_space_dimension": rf.fixed_space_dimension,
        "peripheral_spectrum": [
            _complex_to_pair(z) for z in rf.peripheral_spectrum
        ],
        "warnings": list(report.warnings),
    }


def _subspace_from_lists(data, dim, where):
    if not isinstance(data, list):
        raise ParseError(f"{where}: expected a matrix")
    cols = 0
    if data and isinstance(data[0], list):
        cols = len(data[0])
    frame = _matrix_from_lists(data, dim, cols, where)
    try:
        return Subspace(dim, frame)
    except Exception as err:
        raise ParseError(f"{where}: frame is not orthonormal ({err})") from err


def report_file_from_dict(data, re_verify=True):
    """Parse a report document, re-verifying frame orthonormality and the
    enclosure predicate against the embedded channel."""
    where = "report"
    dim = _require_int(data, "dim", where)
    ch = channel_from_dict(
        _require(data, "channel", where), unchecked=True
    )
    if ch.dim != dim:
        raise ParseError(f"{where}: channel dimension disagrees with dim")
    tol_data = _require(data, "tolerances", where)
    try:
        tol = Tolerance(
            rank_tol=float(_require(tol_data, "rank_tol", "tolerances")),
            eig_cluster_tol=float(
                _require(tol_data, "eig_cluster_tol", "tolerances")
            ),
            psd_tol=float(_require(tol_data, "psd_tol", "tolerances")),
        )
    except (TypeError, ValueError) as err:
        raise ParseError(f"{where}: bad tolerances ({err})") from err
    seed = _require_int(data, "rng_seed", where)
    r_space = _subspace_from_lists(
        _require(data, "recurrent_basis", where), dim, "recurrent_basis"
    )
    d_space = _subspace_from_lists(
        _require(data, "transient_basis", where), dim, "transient_basis"
    )
    alpha = []
    for i, blk in enumerate(_require(data, "alpha_blocks", where)):
        enc = _subspace_from_lists(
            _require(blk, "enclosure", f"alpha_blocks[{i}]"),
            dim,
            f"alpha_blocks[{i}].enclosure",
        )
        rho = _matrix_from_lists(
            _require(blk, "rho", f"alpha_blocks[{i}]"),
            dim,
            dim,
            f"alpha_blocks[{i}].rho",
        )
        alpha.append(AlphaBlock(enclosure=enc, rho=rho))
    beta = []
    for i, blk in enumerate(_require(data, "beta_blocks", where)):
        prefix = f"beta_blocks[{i}]"
        encs = [
            _subspace_from_lists(e, dim, f"{prefix}.enclosures[{g}]")
            for g, e in enumerate(_require(blk, "enclosures", prefix))
        ]
        isos = [
            _matrix_from_lists(q, dim, dim, f"{prefix}.isometries[{g}]")
            for g, q in enumerate(_require(blk, "isometries", prefix))
        ]
        if len(isos) != len(encs):
            raise ParseError(f"{prefix}: isometry/enclosure count mismatch")
        rho_ref = _matrix_from_lists(
            _require(blk, "rho_ref", prefix), dim, dim, f"{prefix}.rho_ref"
        )
        beta.append(
            BetaBlock(
                index=_require_int(blk, "index", prefix),
                enclosures=tuple(encs),
                isometries=tuple(isos),
                rho_ref=rho_ref,
            )
        )
    spectrum = tuple(
        complex(_pair_to_complex(z, f"peripheral_spectrum[{i}]"))
        for i, z in enumerate(_require(data, "peripheral_spectrum", where))
    )
    warnings_data = _require(data, "warnings", where)
    if not isinstance(warnings_data, list) or not all(
        isinstance(w, str) for w in warnings_data
    ):
        raise ParseError(f"{where}: warnings must be a list of strings")
    report = DecompositionReport(
        dim=dim,
        R=r_space,
        D=d_space,
        alpha_blocks=tuple(alpha),
        beta_blocks=tuple(beta),
        tolerance=tol,
        rng_seed=seed,
        warnings=tuple(warnings_data),
        channel=ch,
    )
    rf = ReportFile(
        report=report,
        fixed_space_dimension=_require_int(data, "fixed_space_dimension", where),
        peripheral_spectrum=spectrum,
    )
    if re_verify:
        _re_verify(rf)
    return rf


def _re_verify(rf):
    report = rf.report
    ch = report.channel
    tol = report.tolerance
    spaces = [blk.enclosure for blk in report.alpha_blocks]
    for blk in report.beta_blocks:
        spaces.extend(blk.enclosures)
    for space in spaces:
        if not is_enclosure(ch, space, tol):
            raise ParseError(
                "report: a stored frame fails the enclosure predicate"
            )


def validation_to_dict(ch, vr):
    return {
        "dim": ch.dim,
        "kraus_count": len(ch.kraus),
        "kraus_sum_deviation": vr.kraus_sum_deviation,
        "spectral_radius": vr.spectral_radius,
        "trace_preserving": vr.trace_preserving,
        "spectral_radius_ok": vr.spectral_radius_ok,
        "passed": vr.passed,
    }
