import logging
import sys
from pathlib import Path
from typing import Any


def logger(obj: Any) -> logging.Logger:
    module_file = getattr(sys.modules.get(obj.__module__), "__file__", None)
    if module_file is not None:
        module_name = Path(module_file).stem
        return logging.getLogger(f"{module_name}.{obj.__class__.__name__}")
    return logging.getLogger(f"{obj.__module__}.{obj.__class__.__name__}")


def fraction(pct: float) -> float:
    return pct / 100.0
