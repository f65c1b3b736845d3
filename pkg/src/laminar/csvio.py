"""CSV writers and their parsers (every writer has a matching reader)."""
import csv
import io

FMT = "{:.12g}"


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return FMT.format(v)
    return str(v)


def write_rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _parse(v: str):
    if v == "":
        return None
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def read_rows(text: str):
    """(header, rows) with booleans, ints and floats restored."""
    r = list(csv.reader(io.StringIO(text)))
    return r[0], [tuple(_parse(v) for v in row) for row in r[1:]]


SWEEP_HEADER = ("w1_sig1", "w1_sig2", "margin", "exists", "converges", "sim_class")
SPECTRUM_HEADER = ("index", "eigenvalue", "is_quotient_lambda2")
EDGE_HEADER = ("u", "v")
SNAPSHOT_HEADER = ("cell", "layer", "x")


def sweep_csv(grid) -> str:
    return write_rows(SWEEP_HEADER, grid.rows())


def spectrum_csv(rows) -> str:
    return write_rows(SPECTRUM_HEADER, rows)


def edges_csv(graph) -> str:
    return write_rows(EDGE_HEADER, graph.edges)


def snapshot_csv(rows) -> str:
    return write_rows(SNAPSHOT_HEADER, rows)
