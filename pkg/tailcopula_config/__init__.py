"""TailCopula configuration library - Lua study config files."""

from .config_loader import Config

__all__ = ['Config']
