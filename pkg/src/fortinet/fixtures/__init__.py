"""Bundled example problem files."""

from pathlib import Path


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled problem file, e.g. fixture_path("fig7.json")."""
    path = Path(__file__).resolve().parent / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path


def available() -> tuple[str, ...]:
    return tuple(sorted(p.name for p in Path(__file__).resolve().parent.glob("*.json")))
