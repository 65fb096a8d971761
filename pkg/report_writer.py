"""
Report writer for scenario runs: a plain-text report plus CSV tables

Every rational goes out twice in the CSV files, exactly as "p/q" and as a
fixed-precision decimal in a companion "<column>_decimal" column. Nothing
time-dependent is written, so identical inputs give identical bytes.
"""
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import pandas as pd
from jinja2 import Template

import config
from invariants import beta
from model import FoliatedModel, ValuationRecord

logger = logging.getLogger(__name__)

BETA_CURVE_COLUMNS = ['t', 'A', 'S', 'T', 'beta']

REPORT_TEMPLATE = Template("""\
{% for section in sections %}
{{ section.title }}
{{ '=' * section.title|length }}
{% for line in section.lines %}
{{ line }}
{% endfor %}
{% if not loop.last %}

{% endif %}
{% endfor %}""", trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True)


def render_decimal(value: Fraction, precision: int = None) -> str:
    """Round half away from zero to `precision` places using integers only."""
    if precision is None:
        precision = config.DECIMAL_PRECISION
    if precision < 0:
        raise ValueError(f"precision must be >= 0, got {precision}")
    value = Fraction(value)
    scale = 10 ** precision
    num, den = abs(value.numerator), value.denominator
    rounded = (2 * num * scale + den) // (2 * den)
    sign = '-' if value < 0 and rounded != 0 else ''
    whole, frac = divmod(rounded, scale)
    if precision == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{precision}d}"


def render_exact(value) -> str:
    """'p/q' for a Fraction, str() for anything else."""
    if isinstance(value, Fraction):
        return str(value)
    if value is None:
        return ''
    return str(value)


@dataclass
class ReportSection:
    title: str
    lines: List[str] = field(default_factory=list)


class ReportWriter:
    """Collects report sections and CSV tables for one scenario run"""

    def __init__(self, output_dir: str, precision: Optional[int] = None):
        self.output_dir = output_dir
        self.precision = config.DECIMAL_PRECISION if precision is None else precision
        self.sections: List[ReportSection] = []
        self.csv_files: List[str] = []
        os.makedirs(self.output_dir, exist_ok=True)

    def add_section(self, title: str, lines: Iterable[str]) -> ReportSection:
        section = ReportSection(title=title, lines=list(lines))
        self.sections.append(section)
        return section

    def frame(self, rows: Sequence[dict], columns: Sequence[str]) -> pd.DataFrame:
        """DataFrame of strings; each Fraction column gains a decimal twin."""
        records = []
        for row in rows:
            record = {}
            for col in columns:
                value = row.get(col)
                record[col] = render_exact(value)
                if isinstance(value, Fraction):
                    record[f"{col}_decimal"] = render_decimal(value, self.precision)
            records.append(record)
        ordered = []
        for col in columns:
            ordered.append(col)
            if any(isinstance(row.get(col), Fraction) for row in rows):
                ordered.append(f"{col}_decimal")
        return pd.DataFrame.from_records(records, columns=ordered)

    def write_csv(self, name: str, rows: Sequence[dict], columns: Sequence[str]) -> str:
        path = os.path.join(self.output_dir, f"{name}.csv")
        df = self.frame(rows, columns)
        df.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
        self.csv_files.append(path)
        logger.debug(f"wrote {len(df)} rows to {path}")
        return path

    def render_report(self) -> str:
        if not self.sections:
            return ''
        return REPORT_TEMPLATE.render(sections=self.sections)

    def write_report(self, filename: str = 'report.txt') -> str:
        path = os.path.join(self.output_dir, filename)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.render_report())
        logger.info(f"report saved to: {path}")
        return path


def emit_beta_curve(model: FoliatedModel, valuation: ValuationRecord,
                    t_grid: Iterable[Fraction]) -> List[dict]:
    """Rows (t, A, S, T, beta) along a t-grid; a grid point off the ample range raises."""
    rows = []
    for t in t_grid:
        report = beta(valuation, model, t)
        rows.append({'t': report.t, 'A': report.A, 'S': report.S, 'T': report.T, 'beta': report.beta})
    return rows


def beta_line(label: str, t: Fraction, value: Fraction) -> str:
    return f"beta({label}; t={t}) = {value}"
