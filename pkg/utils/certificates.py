"""
Certificate files: canonical JSON, input digests and the optional Excel
workbook export.
"""
import hashlib
import json
import logging
import math
from io import BytesIO

import numpy as np
import pandas as pd

from utils.errors import VerificationError
from utils.settings import DEFAULT_SETTINGS, TOOL_VERSION

logger = logging.getLogger(__name__)


def to_plain(obj):
    """Convert results (dataclasses with to_json, numpy values, tuples) to plain JSON data"""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    # Decimal and other exact numbers
    return float(obj)


def _number(value, digits):
    if math.isnan(value):
        raise VerificationError("NaN in certificate output", failing=value)
    # empty maxima and minima (one point maps, no pairs) are infinite
    if math.isinf(value):
        return "null"
    text = format(value, f".{digits}g")
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _dump(obj, digits):
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _number(obj, digits)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        return "[" + ",".join(_dump(v, digits) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(_dump(k, digits) + ":" + _dump(obj[k], digits) for k in sorted(obj)) + "}"
    raise VerificationError(f"Cannot serialize {type(obj).__name__} into a certificate")


def canonical_json(obj, digits=None):
    """
    Byte-stable JSON text: sorted keys, no whitespace, floats with `digits`
    significant digits (17 round-trips doubles)
    """
    digits = digits or DEFAULT_SETTINGS.float_digits
    return _dump(to_plain(obj), digits)


def input_digest(problem_json):
    """SHA-256 of the canonical JSON of a normalized problem"""
    return hashlib.sha256(canonical_json(problem_json).encode("utf-8")).hexdigest()


def verification_block(checks):
    """
    Collect named checks into a verification block

    Parameters:
    checks: dict name -> dict with at least an "ok" entry

    Returns:
    dict: {"checks": ..., "ok": all passed, "failing": names of failed checks}
    """
    failing = sorted(name for name, check in checks.items() if not check.get("ok"))
    return {"checks": checks, "ok": not failing, "failing": failing}


def build_certificate(command, digest, results, verification, settings=None, version=TOOL_VERSION):
    """
    Assemble a certificate

    Parameters:
    command: echo of the command and the flags that shaped it
    digest: input digest or None when there is no problem file
    results: command results
    verification: block from verification_block
    settings: effective Settings

    Returns:
    dict: plain JSON data
    """
    settings = settings or DEFAULT_SETTINGS
    return to_plain({
        "command": command,
        "input_digest": digest,
        "results": results,
        "verification": verification,
        "settings": settings.as_dict(),
        "tool_version": version,
    })


def intervals_frame(certificate):
    """Table of a FeasibilityCertificate: one row per coordinate, then the tail"""
    rows = [{"coordinate": str(k), "lo": iv.lo, "hi": iv.hi, "width": iv.width} for k, iv in enumerate(certificate.per_coordinate)]
    if certificate.tail_interval is not None:
        iv = certificate.tail_interval
        rows.append({"coordinate": "tail", "lo": iv.lo, "hi": iv.hi, "width": iv.width})
    return pd.DataFrame(rows, columns=["coordinate", "lo", "hi", "width"])


def checks_frame(verification):
    rows = [{"check": name, "ok": bool(check.get("ok"))} for name, check in sorted(verification["checks"].items())]
    return pd.DataFrame(rows, columns=["check", "ok"])


def create_instructions_sheet(certificate, sheet_names):
    """
    Instructions dataframe for a certificate workbook

    Parameters:
    certificate: plain certificate dict
    sheet_names: names of the data sheets that follow

    Returns:
    pd.DataFrame: two columns, Item and Description
    """
    command = certificate["command"]
    instructions = [
        ["Purpose", f"Tables exported from the certificate of the '{command.get('name')}' command."],
        ["Tool version", certificate["tool_version"]],
        ["Input digest", certificate["input_digest"] or "none (no problem file)"],
        ["Verification", "all checks passed" if certificate["verification"]["ok"] else "FAILED: " + ", ".join(certificate["verification"]["failing"])],
        ["", ""],
        ["Sheets", ""],
    ]
    instructions += [[name, SHEET_DESCRIPTIONS.get(name, "")] for name in sheet_names]
    instructions += [
        ["", ""],
        ["Note", "The JSON certificate is the reference output; numbers here are the same doubles, shown by Excel with fewer digits."],
    ]
    return pd.DataFrame(instructions, columns=["Item", "Description"])


SHEET_DESCRIPTIONS = {
    "Checks": "One row per verification check with its outcome",
    "Intervals": "Forced interval per target coordinate (lo, hi, width); 'tail' is the interval of the limit",
    "Cells": "Partition cells: cell id, representative and one row per member point",
    "Modulus": "Modulus table on the distance grid: xi, psi and the piecewise linear phi",
    "Census": "Case counts of the c_0 construction beyond the cutoff N",
    "Witnesses": "Pairs of sample points whose mixed excess exceeds eps, sorted by distance",
}


def create_workbook(certificate, tables):
    """
    Excel workbook for a certificate: an Instructions sheet, the checks, then
    one sheet per table

    Parameters:
    certificate: plain certificate dict
    tables: dict sheet name -> DataFrame

    Returns:
    BytesIO: an in-memory Excel file
    """
    output = BytesIO()
    sheets = {"Checks": checks_frame(certificate["verification"]), **tables}

    with pd.ExcelWriter(output, engine="openpyxl") as writer:
        create_instructions_sheet(certificate, list(sheets)).to_excel(writer, sheet_name="Instructions", index=False)
        for name, frame in sheets.items():
            frame.to_excel(writer, sheet_name=name[:31], index=False)

    output.seek(0)
    logger.debug("Workbook with %d data sheets", len(sheets))
    return output


def write_workbook(certificate, tables, path):
    with open(path, "wb") as handle:
        handle.write(create_workbook(certificate, tables).getvalue())
    logger.info("Wrote workbook %s", path)
