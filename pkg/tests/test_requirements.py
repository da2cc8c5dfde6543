"""
Tests for the pinned requirements against the project manifest
"""

from __future__ import annotations

import re
import tomllib
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

NAME = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*")


def _normalize(name: str) -> str:
    return re.sub(r"[-_.]+", "-", name).lower()


def _pins() -> dict[str, str]:
    """Pinned name -> the pin's logical line, continuation lines joined."""
    text = (ROOT / "requirements.txt").read_text().replace("\\\n", " ")
    pins: dict[str, str] = {}
    for line in text.splitlines():
        if not line or line[0] in "# ":
            continue
        match = NAME.match(line)
        assert match is not None, f"Unreadable requirement line: {line!r}"
        pins[_normalize(match.group())] = line
    return pins


def test_manifest_dependencies_are_pinned():
    """
    Test 1: Every declared dependency has an exact pin

    Requirement: requirements.txt locks the runtime and dev dependencies of pyproject.toml
    Verifies: Each name from [project] and the dev group appears with ==
    """
    # Arrange
    manifest = tomllib.loads((ROOT / "pyproject.toml").read_text())
    declared = manifest["project"]["dependencies"] + manifest["dependency-groups"]["dev"]

    # Act
    pins = _pins()

    # Assert
    for requirement in declared:
        match = NAME.match(requirement)
        assert match is not None, f"Unreadable dependency: {requirement!r}"
        name = _normalize(match.group())
        assert name in pins, f"{name} is declared but not pinned"
        assert f"{match.group()}==".lower() in pins[name].lower(), f"{name} is not pinned exactly"


def test_pins_use_one_hash_mode():
    """
    Test 2: pip can install the file as written

    Requirement: Hash checking applies to every pin or to none
    Verifies: No mix of hashed and unhashed pins
    """
    # Arrange
    pins = _pins()

    # Act
    hashed = {name for name, line in pins.items() if "--hash=" in line}

    # Assert
    assert hashed in (set(), set(pins)), (
        f"{len(hashed)} of {len(pins)} pins carry hashes: {sorted(set(pins) - hashed)} do not"
    )
