"""JSON persistence of construction histories.

A history file is a JSON array; entry i is ``{"skeleton": [...], "radius":
"...", "certificate": {...}}`` where the certificate is the one of the stage
that produced hull i (``null`` for the initial hull).  Loading only checks
syntax; mathematical consistency is the verifier's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from ..numerics import FinSet, parse_rational
from .construction import FiniteHull, StageCertificate
from .enumeration import Requirement


class HistoryFormatError(ValueError):
    """The file is not a syntactically valid history."""


@dataclass(frozen=True)
class RawRequirement:
    p: Fraction
    q: Fraction
    r: Fraction


@dataclass
class RawHistory:
    entries: list  # (tuple of Fractions, Fraction)
    certs: list  # StageCertificate with possibly inconsistent fields

    def to_construction(self):
        """Typed hulls and certificates; only meaningful for verified histories."""
        hulls = [FiniteHull(FinSet(pts, presorted=True), rad) for pts, rad in self.entries]
        certs = []
        for c in self.certs:
            req = Requirement(c.requirement.p, c.requirement.q, c.requirement.r)
            fields = dict(c.__dict__, requirement=req)
            if c.ys is not None:
                fields["ys"] = FinSet(c.ys, presorted=True)
                fields["zs"] = FinSet(c.zs, presorted=True)
            certs.append(StageCertificate(**fields))
        return hulls, certs


def history_to_json(hulls, certs) -> list:
    out = []
    for i, hull in enumerate(hulls):
        out.append({
            "skeleton": hull.skeleton.to_json(),
            "radius": f"{hull.radius.numerator}/{hull.radius.denominator}",
            "certificate": certs[i - 1].to_json() if i > 0 else None,
        })
    return out


def save_history(path, hulls, certs) -> None:
    text = json.dumps(history_to_json(hulls, certs), separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def _rational(value, where):
    if not isinstance(value, str):
        raise HistoryFormatError(f"{where}: expected a rational string, got {value!r}")
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise HistoryFormatError(f"{where}: {exc}") from exc


def _integer(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise HistoryFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _rational_list(value, where):
    if not isinstance(value, list):
        raise HistoryFormatError(f"{where}: expected a list")
    return tuple(_rational(v, f"{where}[{i}]") for i, v in enumerate(value))


def _certificate(data, where) -> StageCertificate:
    if not isinstance(data, dict):
        raise HistoryFormatError(f"{where}: expected an object")
    try:
        req = data["requirement"]
        fields = dict(
            stage=_integer(data["stage"], f"{where}.stage"),
            requirement=RawRequirement(
                _rational(req["p"], f"{where}.p"),
                _rational(req["q"], f"{where}.q"),
                _rational(req["r"], f"{where}.r"),
            ),
            case=data["case"],
            n=_integer(data["n"], f"{where}.n"),
            radius_in=_rational(data["radius_in"], f"{where}.radius_in"),
            radius_out=_rational(data["radius_out"], f"{where}.radius_out"),
        )
    except (KeyError, TypeError) as exc:
        raise HistoryFormatError(f"{where}: missing field {exc}") from exc
    if not isinstance(fields["case"], str):
        raise HistoryFormatError(f"{where}.case: expected a string")
    if "gap" in data:
        fields["gap"] = _rational(data["gap"], f"{where}.gap")
    if "outside_unit" in data:
        if not isinstance(data["outside_unit"], bool):
            raise HistoryFormatError(f"{where}.outside_unit: expected a boolean")
        fields["outside_unit"] = data["outside_unit"]
    for key in ("x_i0", "a", "b", "d", "hausdorff"):
        if key in data:
            fields[key] = _rational(data[key], f"{where}.{key}")
    if "k" in data:
        fields["k"] = _integer(data["k"], f"{where}.k")
    for key in ("ys", "zs"):
        if key in data:
            fields[key] = _rational_list(data[key], f"{where}.{key}")
    return StageCertificate(**fields)


def parse_history(data) -> RawHistory:
    if not isinstance(data, list) or not data:
        raise HistoryFormatError("history must be a nonempty JSON array")
    entries, certs = [], []
    for i, stage in enumerate(data):
        where = f"history[{i}]"
        if not isinstance(stage, dict):
            raise HistoryFormatError(f"{where}: expected an object")
        try:
            skeleton = _rational_list(stage["skeleton"], f"{where}.skeleton")
            radius = _rational(stage["radius"], f"{where}.radius")
            cert = stage["certificate"]
        except KeyError as exc:
            raise HistoryFormatError(f"{where}: missing field {exc}") from exc
        entries.append((skeleton, radius))
        if i == 0:
            if cert is not None:
                raise HistoryFormatError("history[0] must not carry a certificate")
        else:
            certs.append(_certificate(cert, f"{where}.certificate"))
    return RawHistory(entries, certs)


def load_history(path) -> RawHistory:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise HistoryFormatError(f"not valid JSON: {exc}") from exc
    return parse_history(data)
