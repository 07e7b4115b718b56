"""Lazy imports for optional extras.

The base install needs only NumPy. Torch is pulled in by the ``torch`` extra
and is used solely as an autograd cross-check for the analytic gradients.
"""

from __future__ import annotations

import importlib
from types import ModuleType


def missing_extra(package: str, extra: str, feature: str) -> ImportError:
    """Return the ImportError raised when ``feature`` needs an absent extra."""
    return ImportError(
        f"{feature} needs '{package}', which is not installed. "
        f"Install it with: pip install 'panda-tta[{extra}]'"
    )


def optional_import(package: str, extra: str, feature: str) -> ModuleType:
    """Import ``package`` or raise :func:`missing_extra` naming the extra."""
    try:
        return importlib.import_module(package)
    except ImportError as exc:
        raise missing_extra(package, extra, feature) from exc
