"""Rectangular result tables with a units header and a provenance footer.

CSV layout: column-name line, units line, data rows, then '#'-prefixed
provenance comment lines.  Numbers are rendered with 6 significant digits so
reruns of identical inputs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


@dataclass
class ResultTable:
    name: str
    columns: list
    units: list
    rows: list = field(default_factory=list)
    footer: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.units) != len(self.columns):
            raise ValueError("units header must match the column count")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("rows must be rectangular")

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"expected {len(self.columns)} values, got {len(values)}"
            )
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def formatted_rows(self) -> list:
        return [[format_number(value) for value in row] for row in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns), ",".join(self.units)]
        lines += [",".join(cells) for cells in self.formatted_rows()]
        lines += [f"# {line}" for line in self.footer]
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        """Aligned text for terminal output."""
        header = [list(self.columns), [f"[{u}]" if u else "" for u in self.units]]
        body = self.formatted_rows()
        widths = [
            max(len(row[i]) for row in header + body) if header + body else 0
            for i in range(len(self.columns))
        ]
        def line(cells):
            return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()
        out = [f"== {self.name} =="]
        out += [line(cells) for cells in header]
        out += [line(cells) for cells in body]
        return "\n".join(out)
