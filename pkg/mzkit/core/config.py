from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Application
    app_name: str = "mzkit"
    env: Literal["dev", "prod"] = "dev"

    # Logging
    log_level: str = "INFO"

    # Basis assembly
    precision: Literal["double", "extended"] = "double"
    extended_dps: int = Field(default=32, ge=16, le=34)
    basis_method: Literal["auto", "cholesky", "arnoldi", "recurrence"] = "auto"
    pivot_threshold: float = 1e-13
    onb_tolerance_double: float = 1e-8
    onb_tolerance_extended: float = 1e-12

    # Degree caps, keyed by dimension (the last key covers higher dimensions)
    cholesky_degree_cap_double: dict[int, int] = {1: 8, 2: 6, 3: 4}
    cholesky_degree_cap_extended: dict[int, int] = {1: 16, 2: 12, 3: 8}
    degree_cap: dict[int, int] = {1: 400, 2: 40, 3: 18}

    # Budgets
    quadrature_node_cap: int = 2_000_000
    carleson_net_budget: int = 250_000
    lp_atom_cap: int = 4_000

    # Execution
    threads: int = Field(default=1, ge=1)
    default_seed: int = 20240601

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        return str(v).upper()

    model_config = SettingsConfigDict(
        env_prefix="MZKIT_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    def cap_for(self, caps: dict[int, int], n: int) -> int:
        """Look up a per-dimension cap, falling back to the largest dimension listed."""
        if n in caps:
            return caps[n]
        return caps[max(caps)]

    def tolerances(self) -> dict[str, float]:
        return {
            "pivot_threshold": self.pivot_threshold,
            "onb_tolerance_double": self.onb_tolerance_double,
            "onb_tolerance_extended": self.onb_tolerance_extended,
        }


settings = Settings()
