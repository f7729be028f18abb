import csv
import io
import json
import math
import sys

UNDEFINED = '—'


def fmt(value, decimals=2):
    """Fixed-point text for a report cell; None and non-finite values print as a dash."""
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return UNDEFINED
    return f'{value:.{decimals}f}'


def to_tsv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter='\t', lineterminator='\n', quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def to_json(data):
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def render(report, format='tsv'):
    """Text of a report object exposing table_header()/table_rows() and to_dict()."""
    if format == 'json':
        return to_json(report.to_dict())
    return to_tsv(report.table_header(), report.table_rows())


def write(text, out=None):
    """Write report text to a path, or to stdout when out is None or '-'."""
    if out is None or str(out) == '-':
        sys.stdout.write(text)
        return
    with open(out, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


class Table:
    """A ready-made header and rows, with optional extra fields for the JSON form."""

    def __init__(self, header, rows, extra=None):
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.extra = extra or {}

    def table_header(self):
        return self.header

    def table_rows(self):
        return self.rows

    def to_dict(self):
        data = {'rows': [dict(zip(self.header, r)) for r in self.rows]}
        data.update(self.extra)
        return data
