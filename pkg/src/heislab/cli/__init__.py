"""CLI package for heislab."""

from __future__ import annotations

__all__: list[str] = []
