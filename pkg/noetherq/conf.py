import os
from pathlib import Path
from types import SimpleNamespace

from dotenv import load_dotenv

from .utils import load_module

BASE_DIR = Path(__file__).resolve().parent.parent


def environment_name() -> str:
    return (
        os.getenv("NOETHERQ_ENVIRONMENT")
        or os.getenv("ENVIRONMENT")
        or os.getenv("ENV")
        or "development"
    ).lower()


def load_env_files(environment: str, base_dir: Path = BASE_DIR) -> list[Path]:
    """Load ``envs/<environment>.env`` then ``.env``; real environment variables win."""
    loaded = []
    for env_file in (base_dir / "envs" / f"{environment}.env", base_dir / ".env"):
        if env_file.exists():
            load_dotenv(env_file, override=False)
            loaded.append(env_file)
    return loaded


ENVIRONMENT = environment_name()
ENV_FILES = load_env_files(ENVIRONMENT)

# settings modules read os.environ at import, so they load after the env files
conf = SimpleNamespace(**load_module("config.settings"))
checks = SimpleNamespace(**load_module("config.checks"))

__all__ = ["conf", "checks"]
