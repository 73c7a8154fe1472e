from typing import Literal
from pydantic import BaseSettings, validator


class Settings(BaseSettings):
    PROJECT_NAME: str = "cnerv"
    VERSION: str = "1.0.0"
    # Level name understood by the logging module, e.g. "DEBUG" or "INFO"
    LOG_LEVEL: str = "INFO"
    # Floating point precision of CLI training runs; library calls default to double
    PRECISION: Literal["single", "double"] = "single"
    DEFAULT_OUT_DIR: str = "runs"

    @validator("LOG_LEVEL", pre=True)
    def normalize_log_level(cls, v: str) -> str:
        level = str(v).strip().upper()
        if level not in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
            raise ValueError(v)
        return level

    class Config:
        case_sensitive = True


settings = Settings()
