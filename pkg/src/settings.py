import os
from pathlib import Path

from dotenv import find_dotenv, load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv(find_dotenv())

BASE_DIR = Path(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class LoewnerSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_LOEWNER_')

    DT: float = 1e-3
    SWALLOW_TOL: float = 1e-6
    MAX_HALVINGS: int = 12
    TIP_OFFSET_EXPONENT: float = 0.75
    UNIT_CIRCLE_TOL: float = 1e-12


class SleSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_SLE_')

    DT: float = 1e-4
    EPS0: float = 1e-6
    REFLECTION_FACTOR: float = 10.0
    MAX_HALVINGS: int = 12


class ZipperSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_ZIPPER_')

    TOL_GEO: float = 1e-3


class SoupSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_SOUP_')

    T_MIN: float = 1e-3
    T_MAX: float = 10.0
    BRIDGE_POINTS: int = 256
    DURATION_STRATA: int = 16
    RADIUS_STRATA: int = 8
    TABLE_SAMPLES: int = 2048
    MAX_EXPECTED_COUNT: float = 1e6


class SamplerSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_SAMPLER_')

    T_MAX: float = 8.0
    R_STOP: float = 1e-3
    SNAP: float = 1e-6
    CHORDAL_RADIUS: float = 1e4
    CHORDAL_RELATIVE_STEP: float = 1e-3
    TRACE_STRIDE: int = 10
    N_SAMPLES: int = 10_000
    SEED: int = 0
    WORKERS: int = 1
    Z_THRESHOLD: float = 3.0
    Z_THRESHOLD_MULTIPLE: float = 3.5


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='RESTRICTION_')

    PROJECT_NAME: str = 'radial-restriction'
    LOG_LEVEL: str = 'WARNING'

    loewner: LoewnerSettings = LoewnerSettings()
    sle: SleSettings = SleSettings()
    zipper: ZipperSettings = ZipperSettings()
    soup: SoupSettings = SoupSettings()
    sampler: SamplerSettings = SamplerSettings()


settings = Settings()
