"""MMS (MultiModal Signstream) table parsing, validation, and serialization.

An MMS instance is a delimited table with a header row, one data row per sign.
Beyond the gloss columns (``maingloss`` plus the per-arm ``domgloss`` /
``ndomgloss`` overrides), a row carries either absolute timing
(``framestart`` / ``frameend``, in seconds) or relative timing (``duration`` /
``transition``), and 39 optional inflection cells covering hand trajectory
editing, hand rotation, shoulder relocation, torso relocation, and head
rotation. Empty cells mean "no inflection": translations and rotations default
to 0, scales to 1. Angles are degrees, translations are in the skeleton's
length unit.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field, replace
from enum import Enum

HOLD_TOKEN = "<HOLD>"

#: Compact column patterns: brackets enumerate one character per expansion,
#: with a space standing for the empty alternative.
TABLE_PATTERNS = (
    "[ n]domhandreloc[ as][xyz]",
    "[ n]domhandrot[xyz]",
    "[ n]domshoulderreloc[xyz]",
    "torsoreloc[ a][xyz]",
    "headrot[xyz]",
)

#: Non-pattern columns besides ``maingloss``.
PLAIN_COLUMNS = ("domgloss", "ndomgloss", "framestart", "frameend", "duration", "transition")


class TimingMode(Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


class DurationKind(Enum):
    SECONDS = "seconds"
    SPEED_PERCENT = "speed_percent"


@dataclass(frozen=True)
class DurationValue:
    """Playback length: literal seconds, or a percentage of nominal speed."""

    kind: DurationKind
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("duration value must be positive")


@dataclass(frozen=True)
class TimingSpec:
    mode: TimingMode = TimingMode.RELATIVE
    frame_start: float | None = None
    frame_end: float | None = None
    duration: DurationValue | None = None
    transition: float | None = None


@dataclass(frozen=True)
class TrajectoryParams:
    """Translation / rotation / scale applied to a hand trajectory."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    ax: float = 0.0
    ay: float = 0.0
    az: float = 0.0
    sx: float = 1.0
    sy: float = 1.0
    sz: float = 1.0

    @property
    def is_identity(self) -> bool:
        return (
            self.x == self.y == self.z == 0.0
            and self.ax == self.ay == self.az == 0.0
            and self.sx == self.sy == self.sz == 1.0
        )


@dataclass(frozen=True)
class RotationTriple:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @property
    def is_identity(self) -> bool:
        return self.x == self.y == self.z == 0.0


@dataclass(frozen=True)
class TranslationTriple:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @property
    def is_identity(self) -> bool:
        return self.x == self.y == self.z == 0.0


@dataclass(frozen=True)
class LocRotParams:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    ax: float = 0.0
    ay: float = 0.0
    az: float = 0.0

    @property
    def is_identity(self) -> bool:
        return self.x == self.y == self.z == 0.0 and self.ax == self.ay == self.az == 0.0


@dataclass(frozen=True)
class InflectionSet:
    dom_hand_reloc: TrajectoryParams = field(default_factory=TrajectoryParams)
    ndom_hand_reloc: TrajectoryParams = field(default_factory=TrajectoryParams)
    dom_hand_rot: RotationTriple = field(default_factory=RotationTriple)
    ndom_hand_rot: RotationTriple = field(default_factory=RotationTriple)
    dom_shoulder_reloc: TranslationTriple = field(default_factory=TranslationTriple)
    ndom_shoulder_reloc: TranslationTriple = field(default_factory=TranslationTriple)
    torso_reloc: LocRotParams = field(default_factory=LocRotParams)
    head_rot: RotationTriple = field(default_factory=RotationTriple)

    @property
    def is_identity(self) -> bool:
        return (
            self.dom_hand_reloc.is_identity
            and self.ndom_hand_reloc.is_identity
            and self.dom_hand_rot.is_identity
            and self.ndom_hand_rot.is_identity
            and self.dom_shoulder_reloc.is_identity
            and self.ndom_shoulder_reloc.is_identity
            and self.torso_reloc.is_identity
            and self.head_rot.is_identity
        )


@dataclass(frozen=True)
class MmsRow:
    maingloss: str
    domgloss: str | None = None
    ndomgloss: str | None = None
    timing: TimingSpec = field(default_factory=TimingSpec)
    inflections: InflectionSet = field(default_factory=InflectionSet)


@dataclass(frozen=True)
class MmsDialect:
    delimiter: str = ","


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    row: int | None = None  # 1-based data row
    column: str | None = None

    def __str__(self) -> str:
        where = ""
        if self.row is not None:
            where = f" (row {self.row}" + (f", column {self.column}" if self.column else "") + ")"
        return f"{self.severity}: {self.message}{where}"


@dataclass(frozen=True)
class MmsDocument:
    rows: tuple[MmsRow, ...]
    source_dialect: MmsDialect = field(default_factory=MmsDialect)
    warnings: tuple[Diagnostic, ...] = ()


class MmsParseError(ValueError):
    """Raised when an MMS table cannot be parsed; carries one diagnostic per defect."""

    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def expand_column_name(compact: str) -> list[str]:
    """Expand a bracketed column pattern into its concrete column names.

    Each ``[...]`` group contributes exactly one of its characters per name
    (a space contributes the empty string); groups expand leftmost-slowest.
    """
    parts: list[list[str]] = []
    i = 0
    while i < len(compact):
        if compact[i] == "[":
            j = compact.find("]", i)
            if j < 0:
                raise ValueError(f"unbalanced bracket in pattern {compact!r}")
            options = ["" if ch == " " else ch for ch in compact[i + 1 : j]]
            if not options:
                raise ValueError(f"empty bracket group in pattern {compact!r}")
            parts.append(options)
            i = j + 1
        elif compact[i] == "]":
            raise ValueError(f"unbalanced bracket in pattern {compact!r}")
        else:
            j = compact.find("[", i)
            if j < 0:
                j = len(compact)
            parts.append([compact[i:j]])
            i = j
    return ["".join(combo) for combo in itertools.product(*parts)]


def all_column_names() -> tuple[str, ...]:
    """All 46 concrete MMS column names, ``maingloss`` first."""
    names = ["maingloss", *PLAIN_COLUMNS]
    for pattern in TABLE_PATTERNS:
        names.extend(expand_column_name(pattern))
    return tuple(names)


def _inflection_column_map() -> dict[str, tuple[str, str]]:
    """column name -> (InflectionSet field, parameter attribute)."""
    mapping: dict[str, tuple[str, str]] = {}
    groups = (
        ("domhandreloc", "dom_hand_reloc", ("x", "y", "z", "ax", "ay", "az", "sx", "sy", "sz")),
        ("ndomhandreloc", "ndom_hand_reloc", ("x", "y", "z", "ax", "ay", "az", "sx", "sy", "sz")),
        ("domhandrot", "dom_hand_rot", ("x", "y", "z")),
        ("ndomhandrot", "ndom_hand_rot", ("x", "y", "z")),
        ("domshoulderreloc", "dom_shoulder_reloc", ("x", "y", "z")),
        ("ndomshoulderreloc", "ndom_shoulder_reloc", ("x", "y", "z")),
        ("torsoreloc", "torso_reloc", ("x", "y", "z", "ax", "ay", "az")),
        ("headrot", "head_rot", ("x", "y", "z")),
    )
    for prefix, fieldname, attrs in groups:
        for attr in attrs:
            mapping[prefix + attr] = (fieldname, attr)
    return mapping

_INFLECTION_COLUMNS = _inflection_column_map()
ALL_COLUMNS = all_column_names()


def _parse_float(cell: str, row: int, column: str, errors: list[Diagnostic]) -> float | None:
    try:
        return float(cell)
    except ValueError:
        errors.append(Diagnostic("error", f"malformed number {cell!r}", row, column))
        return None


def _parse_timing(cells: dict[str, str], row_no: int, errors: list[Diagnostic]) -> TimingSpec:
    raw_start = cells.get("framestart", "")
    raw_end = cells.get("frameend", "")
    raw_duration = cells.get("duration", "")
    raw_transition = cells.get("transition", "")
    absolute = bool(raw_start or raw_end)
    relative = bool(raw_duration or raw_transition)
    if absolute and relative:
        errors.append(Diagnostic("error", "mixed timing modes", row_no))
        return TimingSpec()
    if absolute:
        if not (raw_start and raw_end):
            errors.append(
                Diagnostic("error", "absolute timing requires both framestart and frameend", row_no)
            )
            return TimingSpec()
        start = _parse_float(raw_start, row_no, "framestart", errors)
        end = _parse_float(raw_end, row_no, "frameend", errors)
        if start is None or end is None:
            return TimingSpec()
        if start < 0:
            errors.append(Diagnostic("error", "framestart must be >= 0", row_no, "framestart"))
        if end <= start:
            errors.append(Diagnostic("error", "frameend must be greater than framestart", row_no, "frameend"))
        return TimingSpec(TimingMode.ABSOLUTE, frame_start=start, frame_end=end)

    duration = None
    if raw_duration:
        kind = DurationKind.SECONDS
        number = raw_duration
        if raw_duration.endswith("%"):
            kind = DurationKind.SPEED_PERCENT
            number = raw_duration[:-1]
        value = _parse_float(number, row_no, "duration", errors)
        if value is not None:
            if value <= 0:
                errors.append(Diagnostic("error", "duration must be positive", row_no, "duration"))
            else:
                duration = DurationValue(kind, value)
    transition = None
    if raw_transition:
        value = _parse_float(raw_transition, row_no, "transition", errors)
        if value is not None:
            if value < 0:
                errors.append(Diagnostic("error", "transition must be >= 0", row_no, "transition"))
            else:
                transition = value
    return TimingSpec(TimingMode.RELATIVE, duration=duration, transition=transition)


def _parse_inflections(cells: dict[str, str], row_no: int, errors: list[Diagnostic]) -> InflectionSet:
    by_field: dict[str, dict[str, float]] = {}
    for column, (fieldname, attr) in _INFLECTION_COLUMNS.items():
        cell = cells.get(column, "")
        if not cell:
            continue
        value = _parse_float(cell, row_no, column, errors)
        if value is not None:
            by_field.setdefault(fieldname, {})[attr] = value
    if not by_field:
        return InflectionSet()
    base = InflectionSet()
    updates = {name: replace(getattr(base, name), **attrs) for name, attrs in by_field.items()}
    return replace(base, **updates)


def parse_mms(text, dialect: MmsDialect | None = None) -> MmsDocument:
    """Parse MMS table text into a document.

    Unknown columns are ignored with a warning; empty cells take their
    defaults. Structural and cell-level defects raise :class:`MmsParseError`
    carrying one diagnostic per defect.
    """
    dialect = dialect or MmsDialect()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if isinstance(text, str):
        stream = io.StringIO(text)
    else:
        stream = io.StringIO("\n".join(text))
    reader = csv.reader(stream, delimiter=dialect.delimiter)
    records = [r for r in reader if any(cell.strip() for cell in r)]
    if not records:
        raise MmsParseError([Diagnostic("error", "empty table: missing header row")])

    header = [h.strip().lower() for h in records[0]]
    errors: list[Diagnostic] = []
    warnings: list[Diagnostic] = []
    known = set(ALL_COLUMNS)
    seen: set[str] = set()
    for name in header:
        if name in seen:
            errors.append(Diagnostic("error", f"duplicate header column {name!r}"))
        seen.add(name)
        if name and name not in known:
            warnings.append(Diagnostic("warning", f"unknown column {name!r} ignored", column=name))
    if "maingloss" not in header:
        errors.append(Diagnostic("error", "missing maingloss column"))
    if errors:
        raise MmsParseError(errors)

    rows: list[MmsRow] = []
    for row_no, record in enumerate(records[1:], start=1):
        cells = {name: (record[i].strip() if i < len(record) else "") for i, name in enumerate(header)}
        maingloss = cells.get("maingloss", "")
        if not maingloss:
            errors.append(Diagnostic("error", "missing maingloss", row_no, "maingloss"))
        timing = _parse_timing(cells, row_no, errors)
        inflections = _parse_inflections(cells, row_no, errors)
        rows.append(
            MmsRow(
                maingloss=maingloss,
                domgloss=cells.get("domgloss") or None,
                ndomgloss=cells.get("ndomgloss") or None,
                timing=timing,
                inflections=inflections,
            )
        )
    if errors:
        raise MmsParseError(errors)
    return MmsDocument(tuple(rows), dialect, tuple(warnings))


def validate(doc: MmsDocument, dictionary=None) -> list[Diagnostic]:
    """Check document-level invariants; returns diagnostics (empty when clean).

    With ``dictionary`` supplied (anything supporting ``in``), gloss IDs are
    checked for existence too.
    """
    diags: list[Diagnostic] = []
    prev_abs: tuple[int, TimingSpec] | None = None
    for row_no, row in enumerate(doc.rows, start=1):
        t = row.timing
        if t.mode is TimingMode.ABSOLUTE:
            if prev_abs is not None:
                _, p = prev_abs
                if t.frame_start <= p.frame_start or t.frame_start < p.frame_end:
                    diags.append(Diagnostic("error", "non-monotonic timestamps", row_no, "framestart"))
                elif t.frame_start - p.frame_end < 0.1:
                    diags.append(
                        Diagnostic(
                            "warning",
                            "gap to previous sign is below the suggested 0.1 s minimum",
                            row_no,
                        )
                    )
            prev_abs = (row_no, t)
        if row.maingloss == HOLD_TOKEN:
            if t.mode is not TimingMode.RELATIVE or t.duration is None:
                diags.append(Diagnostic("error", f"{HOLD_TOKEN} row requires a duration", row_no))
            elif t.duration.kind is DurationKind.SPEED_PERCENT:
                diags.append(
                    Diagnostic("error", f"{HOLD_TOKEN} row cannot use a speed percentage", row_no, "duration")
                )
            if row_no == 1:
                diags.append(
                    Diagnostic("error", f"{HOLD_TOKEN} in the first row has no previous pose", row_no)
                )
        elif row_no == 1 and HOLD_TOKEN in (row.domgloss, row.ndomgloss):
            diags.append(
                Diagnostic("error", f"{HOLD_TOKEN} in the first row has no previous pose", row_no)
            )
        if dictionary is not None:
            for column, gloss in (
                ("maingloss", row.maingloss),
                ("domgloss", row.domgloss),
                ("ndomgloss", row.ndomgloss),
            ):
                if gloss and gloss != HOLD_TOKEN and gloss not in dictionary:
                    diags.append(Diagnostic("error", f"unknown gloss {gloss!r}", row_no, column))
    return diags


def _format_number(value: float) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _row_cells(row: MmsRow) -> dict[str, str]:
    cells: dict[str, str] = {"maingloss": row.maingloss}
    if row.domgloss:
        cells["domgloss"] = row.domgloss
    if row.ndomgloss:
        cells["ndomgloss"] = row.ndomgloss
    t = row.timing
    if t.mode is TimingMode.ABSOLUTE:
        cells["framestart"] = _format_number(t.frame_start)
        cells["frameend"] = _format_number(t.frame_end)
    else:
        if t.duration is not None:
            suffix = "%" if t.duration.kind is DurationKind.SPEED_PERCENT else ""
            cells["duration"] = _format_number(t.duration.value) + suffix
        if t.transition is not None:
            cells["transition"] = _format_number(t.transition)
    defaults = InflectionSet()
    for column, (fieldname, attr) in _INFLECTION_COLUMNS.items():
        value = getattr(getattr(row.inflections, fieldname), attr)
        if value != getattr(getattr(defaults, fieldname), attr):
            cells[column] = _format_number(value)
    return cells


def serialize_mms(doc: MmsDocument) -> str:
    """Serialize a document back to table text; omitted cells reparse to defaults."""
    per_row = [_row_cells(row) for row in doc.rows]
    used = {name for cells in per_row for name in cells}
    header = [name for name in ALL_COLUMNS if name in used] or ["maingloss"]
    out = io.StringIO()
    writer = csv.writer(out, delimiter=doc.source_dialect.delimiter, lineterminator="\n")
    writer.writerow(header)
    for cells in per_row:
        writer.writerow([cells.get(name, "") for name in header])
    return out.getvalue()
