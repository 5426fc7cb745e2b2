import pathlib
import sys

_src = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(_src) not in sys.path:
    try:
        import zkplot  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))
