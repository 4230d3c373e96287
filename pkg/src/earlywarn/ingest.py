"""OULAD CSV ingestion: parse, join activity types, filter participants.

Works on the four public OULAD tables (studentVle.csv, vle.csv,
studentInfo.csv, courses.csv). Parsing is header-name driven so column
reordering is harmless; extra columns are ignored.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    MissingFileError,
    ParseError,
    SchemaError,
    UnknownCourseError,
)

logger = logging.getLogger(__name__)

FINAL_RESULTS = ("Distinction", "Pass", "Fail", "Withdrawn")
_PRESENTATION_RE = re.compile(r"^[0-9]{4}[BJ]$")

# file -> (required OULAD columns, rename map to internal names)
_SCHEMAS = {
    "studentVle.csv": (
        ["code_module", "code_presentation", "id_student", "id_site",
         "date", "sum_click"],
        {"code_module": "course_code", "code_presentation": "presentation_code",
         "id_student": "student_id", "id_site": "site_id",
         "date": "day_offset", "sum_click": "click_count"},
    ),
    "vle.csv": (
        ["id_site", "code_module", "code_presentation", "activity_type"],
        {"id_site": "site_id", "code_module": "course_code",
         "code_presentation": "presentation_code"},
    ),
    "studentInfo.csv": (
        ["code_module", "code_presentation", "id_student", "final_result"],
        {"code_module": "course_code", "code_presentation": "presentation_code",
         "id_student": "student_id"},
    ),
    "courses.csv": (
        ["code_module", "code_presentation", "module_presentation_length"],
        {"code_module": "course_code", "code_presentation": "presentation_code",
         "module_presentation_length": "length_days"},
    ),
}


@dataclass(frozen=True)
class StudentRecord:
    student_id: int
    course_code: str
    presentation_code: str
    final_result: str


@dataclass
class OuladTables:
    """Joined, validated OULAD tables.

    ``interactions`` carries one row per (student, site, day) click record
    with the activity_type already joined on; rows whose site_id had no vle
    entry are dropped and counted in ``rows_dropped_dangling``. Read-only
    after load; safe to share across threads.
    """

    interactions: pd.DataFrame
    items: pd.DataFrame
    students: pd.DataFrame
    course_lengths: dict[tuple[str, str], int]
    rows_read: dict[str, int]
    rows_dropped_dangling: int
    # (course, presentation) -> sorted student_ids having >= 1 raw click row
    raw_participants: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)


def _read_csv(directory: Path, filename: str) -> pd.DataFrame:
    path = directory / filename
    if not path.is_file():
        raise MissingFileError(f"required file not found: {path}")
    required, rename = _SCHEMAS[filename]
    df = pd.read_csv(path)
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaError(f"{filename}: missing columns {missing}; "
                          f"found {list(df.columns)}")
    return df[required].rename(columns=rename)


def _int_column(df: pd.DataFrame, column: str, filename: str,
                minimum: int | None = None) -> pd.Series:
    """Validate an integer column, reporting the first bad row's line number."""
    values = pd.to_numeric(df[column], errors="coerce")
    bad = values.isna() | (values % 1 != 0)
    if minimum is not None:
        bad |= values < minimum
    if bad.any():
        row = int(np.argmax(bad.to_numpy()))
        raise ParseError(
            f"{filename} line {row + 2}: bad value {df[column].iloc[row]!r} "
            f"in column '{column}'")
    return values.astype(np.int64)


def _check_values(df: pd.DataFrame, column: str, filename: str,
                  pattern: re.Pattern | None = None,
                  allowed: tuple[str, ...] | None = None) -> None:
    values = df[column].astype(str)
    if pattern is not None:
        bad = ~values.str.match(pattern)
    else:
        bad = ~values.isin(allowed)
    if bad.any():
        row = int(np.argmax(bad.to_numpy()))
        raise ParseError(
            f"{filename} line {row + 2}: bad value {df[column].iloc[row]!r} "
            f"in column '{column}'")


def load_tables(directory: str | Path) -> OuladTables:
    """Parse the four OULAD CSVs and resolve referential joins.

    Raises MissingFileError / SchemaError / ParseError on malformed input.
    Interactions whose site_id has no vle.csv entry (or whose student is
    missing from studentInfo) are dropped with a counted warning, never
    silently.
    """
    directory = Path(directory)
    rows_read: dict[str, int] = {}

    interactions = _read_csv(directory, "studentVle.csv")
    rows_read["studentVle.csv"] = len(interactions)
    interactions["student_id"] = _int_column(interactions, "student_id",
                                             "studentVle.csv")
    interactions["site_id"] = _int_column(interactions, "site_id",
                                          "studentVle.csv")
    interactions["day_offset"] = _int_column(interactions, "day_offset",
                                             "studentVle.csv")
    interactions["click_count"] = _int_column(interactions, "click_count",
                                              "studentVle.csv", minimum=1)
    _check_values(interactions, "presentation_code", "studentVle.csv",
                  pattern=_PRESENTATION_RE)

    items = _read_csv(directory, "vle.csv")
    rows_read["vle.csv"] = len(items)
    items["site_id"] = _int_column(items, "site_id", "vle.csv")
    dup = items.duplicated(subset=["site_id", "course_code",
                                   "presentation_code"])
    if dup.any():
        raise ParseError(f"vle.csv line {int(np.argmax(dup.to_numpy())) + 2}: "
                         "duplicate (site, course, presentation) key")

    students = _read_csv(directory, "studentInfo.csv")
    rows_read["studentInfo.csv"] = len(students)
    students["student_id"] = _int_column(students, "student_id",
                                         "studentInfo.csv")
    _check_values(students, "final_result", "studentInfo.csv",
                  allowed=FINAL_RESULTS)

    courses = _read_csv(directory, "courses.csv")
    rows_read["courses.csv"] = len(courses)
    courses["length_days"] = _int_column(courses, "length_days", "courses.csv",
                                         minimum=1)
    course_lengths = {
        (row.course_code, row.presentation_code): int(row.length_days)
        for row in courses.itertuples()
    }

    # participation is defined on raw click rows, before any join-based drop
    raw_participants = {
        key: np.sort(group["student_id"].unique())
        for key, group in interactions.groupby(
            ["course_code", "presentation_code"], sort=True)
    }

    joined = interactions.merge(
        items, on=["site_id", "course_code", "presentation_code"], how="left")
    dangling = int(joined["activity_type"].isna().sum())
    if dangling:
        logger.warning("dropping %d interaction rows with no vle.csv entry",
                       dangling)
        joined = joined[joined["activity_type"].notna()]

    known = students.set_index(
        ["course_code", "presentation_code", "student_id"]).index
    member = pd.MultiIndex.from_frame(
        joined[["course_code", "presentation_code", "student_id"]]).isin(known)
    orphan = int(len(joined) - member.sum())
    if orphan:
        logger.warning("dropping %d interaction rows whose student is missing "
                       "from studentInfo.csv", orphan)
        joined = joined[member]

    joined = joined.reset_index(drop=True)
    return OuladTables(
        interactions=joined,
        items=items,
        students=students,
        course_lengths=course_lengths,
        rows_read=rows_read,
        rows_dropped_dangling=dangling + orphan,
        raw_participants=raw_participants,
    )


def filter_participants(tables: OuladTables, course: str,
                        presentation: str) -> list[StudentRecord]:
    """Learners of one presentation having at least one click row.

    Registered learners with zero interactions are excluded. Returned in
    ascending student_id order.
    """
    if (course, presentation) not in tables.course_lengths:
        raise UnknownCourseError(f"unknown course/presentation "
                                 f"{course}/{presentation}")
    active = tables.raw_participants.get((course, presentation))
    if active is None:
        return []
    rows = tables.students
    mask = ((rows["course_code"] == course)
            & (rows["presentation_code"] == presentation)
            & rows["student_id"].isin(active))
    subset = rows[mask].sort_values("student_id")
    return [
        StudentRecord(int(r.student_id), course, presentation, r.final_result)
        for r in subset.itertuples()
    ]


def ingestion_summary(tables: OuladTables) -> dict:
    """Summary dict mirroring the on-disk ingestion report schema."""
    participants: dict[str, dict[str, int]] = {}
    for (course, pres), ids in sorted(tables.raw_participants.items()):
        registered = tables.students[
            (tables.students["course_code"] == course)
            & (tables.students["presentation_code"] == pres)]
        n = int(registered["student_id"].isin(ids).sum())
        participants.setdefault(course, {})[pres] = n
    return {
        "rows_read": tables.rows_read,
        "rows_dropped_dangling": tables.rows_dropped_dangling,
        "participants_per_presentation": participants,
    }
