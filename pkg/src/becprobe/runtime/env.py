from pathlib import Path


def load_env(path: Path | None = None) -> bool:
    """Load `BECPROBE_*` settings from a `.env` file; returns whether one was found."""
    from dotenv import load_dotenv

    return load_dotenv(dotenv_path=path)
