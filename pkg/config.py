from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Interpreter and checker configuration settings"""

    # Application Settings
    APP_NAME: str = "dlpaw"
    ENVIRONMENT: str = "development"

    # Machine Configuration
    FUEL: int = Field(1_000_000, ge=0)
    DEFAULT_MACHINE: str = "big"  # big, small

    # Conversion Configuration
    CONV_TERM_FUEL: int = Field(10_000, ge=0)
    CONV_NEF_FUEL: int = Field(10_000, ge=0)
    NU_UNFOLD_CAP: int = Field(2, ge=0)

    # Type Checker Configuration
    MOTIVE_SEARCH_LIMIT: int = Field(6, ge=0)
    EQ_REWRITE_MODE: str = "all"  # all, marked
    CUT_ORDER: str = "deps-first"  # deps-first, conv-first

    # Corpus
    CORPUS_DIR: str = "./corpus"

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FILE_PATH: str = "./logs/dlpaw.log"
    LOG_TO_FILE: bool = False

    class Config:
        env_file = ".env"
        env_prefix = "DLPAW_"
        case_sensitive = True
        extra = "ignore"


# Global settings instance
settings = Settings()
