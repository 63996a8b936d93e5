"""
CSV output for the casimir command.

Floats are written with CASIMIR_CSV_DIGITS significant digits, '.' as the
decimal point and '\\n' line endings, so identical runs give identical bytes.
"""
import csv
import io
import math

from django.conf import settings

FORCE_HEADER = ('sphere_id', 'Fx', 'Fy', 'Fz', 'conv')
SCAN_TWO_HEADER = ('x', 'force_dimensionless')
SCAN_THREE_HEADER = ('x', 'theta', 'potential_dimensionless')
LARGE_N_HEADER = ('N', 'V_dimensionless', 'sign', 'ratio')


def format_value(value, digits=None):
    if value is None:
        return ''
    if isinstance(value, int):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return 'NaN'
    if value == 0:
        return '0'
    digits = digits or settings.CASIMIR_CSV_DIGITS
    return format(value, f'.{digits}g')


def render_csv(header, rows, digits=None):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value, digits) for value in row])
    return buffer.getvalue()


def write_csv(path, header, rows, digits=None):
    """Write rows to ``path`` and return the text written"""
    text = render_csv(header, rows, digits)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    return text
