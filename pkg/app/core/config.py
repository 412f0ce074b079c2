"""Configurações da aplicação."""
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configurações da aplicação usando Pydantic BaseSettings."""

    # Aplicação
    PROJECT_NAME: str = "Season Conclusion"
    API_V1_PREFIX: str = "/api/v1"
    DEBUG: bool = False
    ENV: str = "production"
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = False
    LOG_DIR: str = "logs"

    # Simulação
    SIM_THREADS: int = Field(default=1, ge=1)
    SIM_CHUNK_SIZE: int = Field(default=1000, ge=1)
    DEFAULT_REPLICATIONS: int = Field(default=10000, ge=1)

    # Probabilidades
    PROB_EPSILON: float = Field(default=1e-6, gt=0, lt=0.5)

    # Frank-Wolfe
    FW_MAX_ITERATIONS: int = Field(default=500, ge=1)
    FW_REL_GAP_TOL: float = Field(default=1e-6, gt=0)
    FW_STALL_TOL: float = Field(default=1e-12, gt=0)
    SOS_MAX_DUAL_ITERS: int = Field(default=100, ge=1)

    # Modelos de concordância
    SAA_SCENARIOS: int = Field(default=50, ge=1)

    # Recortes para concordância de grupos (playoff, mando de quadra, loteria)
    PLAYOFF_CUTOFF: int = 8
    HOME_COURT_CUTOFF: int = 4
    LOTTERY_CUTOFF: int = 5

    # Artefatos
    OUTPUT_DIR: str = "runs"
    VERSION: str = "1.0.0"

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_log_level(cls, v) -> str:
        """Normaliza o nível de log para maiúsculas."""
        if v is None:
            return "INFO"
        return str(v).upper()

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )


settings = Settings()
