from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings


class LabConfig(BaseSettings):
    # Paths
    DB_PATH: Path = Path("db")

    # Parallelism (None = machine parallelism)
    THREADS: Optional[int] = None

    # Checkers
    DEFAULT_HORIZON: int = 128
    FLOAT_TOLERANCE: float = 1e-9
    EPIGRAPH_TOLERANCE: float = 1e-6
    TAIL_SAMPLES: int = 0  # 0 = evaluate every index of the tail

    # Geometry fallbacks
    MAX_EXACT_FACE_VERTICES: int = 12
    FLOAT_SOLVER_MAX_ITER: int = 500
    SCALAR_SEARCH_MAX_ITER: int = 200
    EXHAUST_BOX_RADIUS: int = 4

    # Reports
    SCHEMA_VERSION: int = 1
    RANDOM_SEED: int = 20240611

    LOG_LEVEL: str = "WARNING"

    class Config:
        env_file = ".env"
        env_prefix = "CONVLAB_"


config = LabConfig()
