import math

from report_writer import ROW_COLUMNS, ReportRow, ReportWriter, fmt_value


def test_fmt_value():
    assert fmt_value(True) == "true"
    assert fmt_value(math.inf) == "inf"
    assert fmt_value(-math.inf) == "-inf"
    assert fmt_value(math.nan) == "nan"
    assert fmt_value(0.1) == "0.1"
    assert fmt_value(3) == "3"


def test_row_passes_within_tolerance():
    assert ReportRow("x", "op", 1.0, -1e-9, 1e-8).passed
    assert not ReportRow("x", "op", 1.0, -1e-7, 1e-8).passed
    assert not ReportRow("x", "op", math.nan, math.nan, 1e-8).passed


def test_row_as_list():
    row = ReportRow("gaussian", "W(L2,L1)", 1.0, 0.0, 1e-7, {"p": 1.0, "E": "lp:p=2,weight=const"})
    assert row.as_list() == ["gaussian", "W(L2,L1)", "p=1;E=lp:p=2,weight=const", "1", "0", "1e-07", "true"]


def test_write_to_stdout(capsys):
    writer = ReportWriter()
    writer.add([ReportRow("a", "op", 2.0, 0.5, 0.0), ReportRow("b", "op", 1.0, -1.0, 0.0)])
    assert not writer.all_passed
    writer.write()
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(ROW_COLUMNS)
    assert lines[1].endswith("true")
    assert lines[2].endswith("false")


def test_write_table_to_file(tmp_path):
    out = tmp_path / "table.csv"
    ReportWriter(str(out)).write_table(["x", "value"], [[0.5, math.inf]])
    assert out.read_text(encoding="utf-8") == "x,value\n0.5,inf\n"


def test_empty_writer_passes():
    assert ReportWriter().all_passed
