"""Shared fixtures: a small hand-written four-table CSV directory."""

from __future__ import annotations

from pathlib import Path

import pytest

# Layout of the toy course "BBB" (length 105 days -> 15 default weeks):
#   2013B: students 101, 102, 107 click; 106 is registered but never clicks
#   2013J: student 103
#   2014B: student 104
#   2014J: students 101 (second enrolment) and 105
# Site 9999 exists in no vle.csv row (dangling); student 107 only ever hits
# it. Site 9006 carries an activity type seen only in a test presentation.
# Student 999 clicks but is not registered anywhere (orphan).
COURSES = [
    ("BBB", "2013B", 105),
    ("BBB", "2013J", 105),
    ("BBB", "2014B", 105),
    ("BBB", "2014J", 105),
    ("DDD", "2013B", 50),
]

STUDENTS = [
    ("BBB", "2013B", 101, "Pass"),
    ("BBB", "2013B", 102, "Fail"),
    ("BBB", "2013B", 106, "Pass"),       # zero clicks: excluded everywhere
    ("BBB", "2013B", 107, "Fail"),       # dangling-site clicks only
    ("BBB", "2013J", 103, "Distinction"),
    ("BBB", "2014B", 104, "Withdrawn"),
    ("BBB", "2014J", 101, "Distinction"),
    ("BBB", "2014J", 105, "Pass"),
    ("DDD", "2013B", 301, "Pass"),
]

VLE = [
    (9001, "BBB", "2013B", "forumng"),
    (9002, "BBB", "2013B", "quiz"),
    (9003, "BBB", "2013J", "forumng"),
    (9004, "BBB", "2014B", "forumng"),
    (9005, "BBB", "2014J", "forumng"),
    (9006, "BBB", "2014J", "testonly"),  # activity type absent from train
    (9101, "DDD", "2013B", "resource"),
]

CLICKS = [
    ("BBB", "2013B", 101, 9001, 2, 3),
    ("BBB", "2013B", 101, 9001, 3, 4),    # same week+channel: sums to 7
    ("BBB", "2013B", 101, 9002, 9, 2),    # week 1
    ("BBB", "2013B", 102, 9001, -5, 1),   # negative day -> week 0
    ("BBB", "2013B", 102, 9999, 4, 5),    # dangling site: dropped, counted
    ("BBB", "2013B", 107, 9999, 1, 2),    # dangling only: still a participant
    ("BBB", "2013B", 999, 9001, 1, 8),    # unregistered student: dropped
    ("BBB", "2013J", 103, 9003, 0, 2),
    ("BBB", "2014B", 104, 9004, 14, 6),   # week 2
    ("BBB", "2014J", 101, 9005, 7, 2),    # week 1
    ("BBB", "2014J", 105, 9005, 70, 1),   # week 10
    ("BBB", "2014J", 105, 9006, 7, 4),    # test-only activity: dropped
    ("BBB", "2014J", 105, 9005, 200, 9),  # week 28 >= 15: dropped
    ("DDD", "2013B", 301, 9101, 1, 2),
]


def write_oulad_fixture(directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    lines = ["code_module,code_presentation,module_presentation_length"]
    lines += [f"{c},{p},{d}" for c, p, d in COURSES]
    (directory / "courses.csv").write_text("\n".join(lines) + "\n")

    lines = ["code_module,code_presentation,id_student,gender,final_result"]
    lines += [f"{c},{p},{s},M,{r}" for c, p, s, r in STUDENTS]
    (directory / "studentInfo.csv").write_text("\n".join(lines) + "\n")

    lines = ["id_site,code_module,code_presentation,activity_type,week_from"]
    lines += [f"{i},{c},{p},{a}," for i, c, p, a in VLE]
    (directory / "vle.csv").write_text("\n".join(lines) + "\n")

    lines = ["code_module,code_presentation,id_student,id_site,date,sum_click"]
    lines += [f"{c},{p},{s},{i},{d},{k}" for c, p, s, i, d, k in CLICKS]
    (directory / "studentVle.csv").write_text("\n".join(lines) + "\n")
    return directory


@pytest.fixture
def oulad_dir(tmp_path) -> Path:
    return write_oulad_fixture(tmp_path / "oulad")
