"""
Registros de salida y su escritura en CSV o JSON.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, TextIO

from constants.information import CSV_SCHEMA_LINE

CSV_FIELDS = ("xi", "delta_rad", "n", "strategy", "method", "cost")
METHODS = ("closed", "eigen", "tree", "montecarlo", "partition")


def format_number(value) -> str:
    """
    Formato fijo para los archivos de referencia: 12 cifras significativas y
    notación científica en minúsculas fuera de [1e-4, 1e6).
    """
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    x = float(value)
    if x == 0.0:
        return "0"
    if 1e-4 <= abs(x) < 1e6:
        return f"{x:.12g}"
    return f"{x:.11e}"


@dataclass(frozen=True)
class OutputRecord:
    """Una evaluación (problema, estrategia, método)."""

    xi: float
    delta_rad: float
    n: int
    strategy: str
    cost: float
    method: str
    extra: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Método desconocido: {self.method}")
        for name in ("xi", "delta_rad", "cost"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Campo {name} no finito en el registro")

    def sort_key(self):
        return (self.xi, self.delta_rad, self.n, self.strategy, METHODS.index(self.method))

    def as_row(self, extra_fields: Sequence[str] = ()) -> list:
        row = [
            format_number(self.xi),
            format_number(self.delta_rad),
            str(self.n),
            self.strategy,
            self.method,
            format_number(self.cost),
        ]
        for name in extra_fields:
            value = self.extra.get(name, "")
            row.append(value if isinstance(value, str) else format_number(value))
        return row

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "delta_rad": self.delta_rad,
            "n": self.n,
            "strategy": self.strategy,
            "method": self.method,
            "cost": self.cost,
            "extra": dict(self.extra),
        }


def write_csv(records: Iterable[OutputRecord], stream: TextIO, extra_fields: Sequence[str] = ()) -> None:
    stream.write(CSV_SCHEMA_LINE + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(CSV_FIELDS) + list(extra_fields))
    for record in records:
        writer.writerow(record.as_row(extra_fields))


def write_json(records: Iterable[OutputRecord], stream: TextIO) -> None:
    json.dump([r.as_dict() for r in records], stream, indent=2, allow_nan=False)
    stream.write("\n")


def emit(records: Sequence[OutputRecord], fmt: str, stream: TextIO, extra_fields: Sequence[str] = ()) -> None:
    """Escribe los registros en el formato pedido (``csv`` o ``json``)."""
    if fmt == "json":
        write_json(records, stream)
    else:
        write_csv(records, stream, extra_fields)
