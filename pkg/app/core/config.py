import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent


class Settings(BaseModel):
    model_config = {"frozen": True}

    log_level: str = "INFO"
    workers: int = 1
    seed: int = 2024
    subfile_bytes: int = 16
    sweep_budget: int = 500
    api_prefix: str = "/api/v1"
    data_dir: Path = PROJECT_ROOT / "data"


def load_settings() -> Settings:
    """Read HOTPLUG_* variables (after .env has been loaded)."""
    return Settings(
        log_level=os.getenv("HOTPLUG_LOG_LEVEL", "INFO").upper(),
        workers=int(os.getenv("HOTPLUG_WORKERS", "1")),
        seed=int(os.getenv("HOTPLUG_SEED", "2024")),
        subfile_bytes=int(os.getenv("HOTPLUG_SUBFILE_BYTES", "16")),
        sweep_budget=int(os.getenv("HOTPLUG_SWEEP_BUDGET", "500")),
        api_prefix=os.getenv("HOTPLUG_API_PREFIX", "/api/v1"),
        data_dir=Path(os.getenv("HOTPLUG_DATA_DIR", str(PROJECT_ROOT / "data"))),
    )


settings = load_settings()
