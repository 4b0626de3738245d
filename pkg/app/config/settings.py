"""
Configuration settings for the Wasserstein Rigidity Lab.
"""
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Geometry tolerances
    point_tolerance: float = Field(
        default=1e-12,
        description="Coordinate tolerance used when merging atoms"
    )
    metric_tolerance: float = Field(
        default=1e-12,
        description="Slack for triangle-inequality validation of finite spaces"
    )
    betweenness_slack: float = Field(
        default=1e-12,
        description="Slack for triangle equalities in finite betweenness scans"
    )
    separation_tolerance: float = Field(
        default=1e-12,
        description="Minimum gap between Condition B products"
    )
    geodesic_tolerance: float = Field(
        default=1e-9,
        description="Tolerance of the constant-speed geodesic check"
    )

    # Measure and transport tolerances
    weight_sum_tolerance: float = Field(
        default=1e-12,
        description="Allowed drift of total mass of a constructed measure"
    )
    ingestion_weight_tolerance: float = Field(
        default=1e-9,
        description="Allowed drift of total mass in measure JSON files"
    )
    marginal_tolerance: float = Field(
        default=1e-10,
        description="Allowed drift of plan marginals"
    )
    midpoint_tolerance: float = Field(
        default=1e-9,
        description="Tolerance of intermediate-point distance equalities"
    )
    monotonicity_slack: float = Field(
        default=1e-9,
        description="Slack of the cyclical monotonicity check"
    )
    orthogonality_tolerance: float = Field(
        default=1e-12,
        description="Tolerance of the orthogonality check on exotic maps"
    )
    frechet_tolerance: float = Field(
        default=1e-12,
        description="Tolerance when collecting Frechet minimizers"
    )
    mixture_tolerance: float = Field(
        default=1e-12,
        description="Allowed drift of mixture coefficients"
    )
    default_max_cycle: int = 5
    max_cycle_limit: int = 6
    emd_max_iterations: int = 1_000_000
    default_p: float = 2.0

    # Midpoint diameter family
    diameter_samples: int = 4
    diameter_grid_limit: int = 400

    # Runs and reports
    default_seed: int = 7
    results_base_dir: str = "results"
    report_include_timing: bool = False
    show_progress: bool = True
    log_level: str = "INFO"
    suspension_strict: bool = False

    model_config = SettingsConfigDict(
        env_prefix="WLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


# Create global instance of settings
settings = Settings()
