import pytest
from hypothesis import given

from conftest import float_diagrams
from frechet_pd import PersistenceDiagram, load_diagram, read_diagram, save_diagram, write_diagram
from frechet_pd.io import DiagramFormatError


@given(float_diagrams(8))
def test_json_and_csv_round_trip_exactly(D):
    for fmt in ("json", "csv"):
        assert read_diagram(write_diagram(D, fmt), fmt) == D


def test_json_layout():
    D = PersistenceDiagram([(0.1, 0.30000000000000004)])
    assert write_diagram(D) == b'{"points": [[0.1, 0.30000000000000004]]}\n'


def test_csv_with_and_without_header():
    assert read_diagram("birth,death\n0,1\n2,5\n", "csv") == PersistenceDiagram([(0, 1), (2, 5)])
    assert read_diagram("0,1\n", "csv") == PersistenceDiagram([(0, 1)])


@pytest.mark.parametrize(
    "text,fmt,msg",
    [
        ('{"points": [[0, 1]', "json", "line 1"),
        ('{"pts": []}', "json", "points"),
        ('{"points": [[0, "a"]]}', "json", r"points\[0\]"),
        ("birth,death\n0,1\n1,x\n", "csv", "line 3"),
        ("0,1,2\n", "csv", "line 1"),
    ],
)
def test_malformed_input_is_located(text, fmt, msg):
    with pytest.raises(DiagramFormatError, match=msg):
        read_diagram(text, fmt)


def test_invalid_point_rejected():
    with pytest.raises(ValueError, match="death must exceed birth"):
        read_diagram('{"points": [[2, 1]]}')


def test_files_choose_format_by_suffix(tmp_path):
    D = PersistenceDiagram([(0, 1.5)])
    for name in ("d.json", "d.csv"):
        save_diagram(D, tmp_path / name)
        assert load_diagram(tmp_path / name) == D
    assert (tmp_path / "d.csv").read_text().startswith("birth,death")
