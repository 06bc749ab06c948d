import csv
from pathlib import Path
from typing import List

import numpy as np

from core.geometry import make_cloud
from shared.errors import InputError
from shared.logger import setup_logger
from shared.models import PointCloud

logger = setup_logger(__name__)


def _parse_row(row: List[str], lineno: int) -> List[float]:
    """
    One point per row, comma-separated decimals.
    """
    try:
        return [float(cell.replace("−", "-")) for cell in (c.strip() for c in row) if cell]
    except ValueError as e:
        raise InputError(f"line {lineno}: not a decimal ({e})") from e


def read_point_csv(path: Path) -> PointCloud:
    """
    Reads a point cloud from CSV.

    Lines starting with '#' (a header) and blank lines are skipped.
    Every row must have the same width.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"CSV file not found: {path}")

    points: List[List[float]] = []
    with path.open("r", encoding="utf-8", newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            values = _parse_row(row, lineno)
            if points and len(values) != len(points[0]):
                raise InputError(
                    f"line {lineno}: {len(values)} coordinates, expected {len(points[0])}"
                )
            points.append(values)

    if not points:
        raise InputError(f"CSV file {path.name} has no points")

    cloud = make_cloud(np.array(points, dtype=float))
    logger.info(f"Ingested {len(cloud)} points of dimension {cloud.ambient_dim} from {path.name}")
    return cloud
