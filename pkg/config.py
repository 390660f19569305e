"""
Configuration management for roadmap-bounds.
Values are loaded from environment variables (prefix ROADMAP_) or a .env file.
Every field has a working default; invalid values fail fast at import time.
"""

from pathlib import Path
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    roadmap-bounds configuration.
    Numerical contract constants (merge tolerances, log clamps) live in code;
    only tunables that change runtime behaviour are configurable here.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="ROADMAP_",
        case_sensitive=False,
        extra="ignore",
    )

    # ==================== Logging ====================
    log_level: str = Field(default="INFO", description="Terminal logging level")
    log_dir: Path = Field(default=Path("./logs"), description="Directory for the DEBUG log file")
    log_to_file: bool = Field(default=False, description="Also write a rotating DEBUG log file")

    # ==================== Execution ====================
    workers: int = Field(default=1, description="Process-pool width for trials and comparisons")
    show_progress: bool = Field(default=True, description="Show tqdm progress bars")
    default_seed: int = Field(default=0, description="Master seed used when --seed is absent")

    # ==================== Planning defaults ====================
    knn_k: int = Field(default=32, description="Default K for KNN roadmaps")
    delta_min: float = Field(default=1e-3, description="Minimum clearance before a skeleton is pruned")
    max_subproblem_samples: int = Field(
        default=200_000, description="Largest sample target a scheduler subproblem may request"
    )

    # ==================== Numerics ====================
    brute_force_below: int = Field(default=512, description="Spatial index uses brute force below this size")
    points_per_cell: float = Field(default=4.0, description="Target occupancy of a spatial-index grid cell")
    net_check_pitch_fraction: float = Field(
        default=0.125, description="Default net_check grid pitch as a fraction of alpha"
    )
    radius_eps: float = Field(default=1e-6, description="Additive tolerance of the radius bisection")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Ensure the level is one loguru knows"""
        level = v.upper()
        if level not in {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"ROADMAP_LOG_LEVEL must be a loguru level name, got '{v}'")
        return level

    @field_validator("workers", "knn_k", "brute_force_below", "max_subproblem_samples")
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"value must be a positive integer, got {v}")
        return v

    @field_validator("delta_min", "points_per_cell", "net_check_pitch_fraction", "radius_eps")
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError(f"value must be positive, got {v}")
        return v


# Global settings instance
try:
    settings = Settings()
except Exception as e:
    print("\n" + "=" * 70)
    print("CONFIGURATION ERROR")
    print("=" * 70)
    print(f"\nError: {str(e)}\n")
    print("Check the ROADMAP_* variables in your environment or .env file.")
    print("Example .env file:")
    print("""
ROADMAP_LOG_LEVEL=INFO
ROADMAP_WORKERS=4
ROADMAP_KNN_K=32
ROADMAP_DELTA_MIN=0.001
""")
    print("=" * 70 + "\n")
    raise SystemExit(1)
