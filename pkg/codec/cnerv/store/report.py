import csv
import io
import math
from typing import Any, Dict, List, Optional, Sequence
from .base import StoreBase

Rows = List[Dict[str, Any]]


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return value


class StoreReport(StoreBase[Rows]):
    """CSV reports; columns follow the key order of the first row.
    Floats are written with full precision, infinite PSNR as "inf".
    """

    suffix = ".csv"

    def __init__(self, fieldnames: Optional[Sequence[str]] = None):
        self.fieldnames = list(fieldnames) if fieldnames else None

    def encode(self, obj: Rows) -> bytes:
        fieldnames = self.fieldnames or (list(obj[0]) if obj else [])
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in obj:
            writer.writerow({key: _cell(value) for key, value in row.items()})
        return buffer.getvalue().encode("utf-8")

    def decode(self, data: bytes) -> Rows:
        return [dict(row) for row in csv.DictReader(io.StringIO(data.decode("utf-8")))]


report = StoreReport()
