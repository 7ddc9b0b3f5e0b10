import math
from fractions import Fraction

import numpy as np

from modules.polycore import GaussianRational
from modules.report_writer import SCHEMA_VERSION, read_report, to_plain, write_curve, write_report


def test_to_plain_values():
    assert to_plain(complex(1, 2)) == [1.0, 2.0]
    assert to_plain(math.inf) == "inf"
    assert to_plain(-math.inf) == "-inf"
    assert to_plain(math.nan) == "nan"
    assert to_plain(np.float64(0.5)) == 0.5
    assert to_plain(np.int64(3)) == 3
    assert to_plain(np.bool_(True)) is True
    assert to_plain(GaussianRational(Fraction(1, 2), -1)) == ["1/2", "-1/1"]
    assert to_plain({"a": (1, np.array([2j]))}) == {"a": [1, [[0.0, 2.0]]]}


def test_report_round_trip(tmp_path):
    path = write_report(str(tmp_path / "out"), "zajac", False, {"escape_index": 3}, {"subcommand": "zajac"})
    report = read_report(path)
    assert report["schema"] == SCHEMA_VERSION == 1
    assert report["ok"] is False
    assert report["escape_index"] == 3
    assert report["config"] == {"subcommand": "zajac"}


def test_curve_file(tmp_path):
    path = write_curve(str(tmp_path), "escape_curve.csv", ("m", "min_distance"), [(0, 0.0), (1, math.inf)])
    with open(path, encoding="utf-8") as f:
        assert f.read() == "m,min_distance\n0,0.0\n1,inf\n"
